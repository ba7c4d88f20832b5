"""Shrink an equatorial circle in S^5 by composing with conformal target
flows; the quartic energy decays geometrically to (numerically) zero.
Writes decay_trace.svg next to this script.
"""

import os

import numpy as np

from phivar import (build_quadrature, equator_map, homotopy_decay,
                    polyline_svg, sphere_chart)


def main():
    dom = sphere_chart(1)
    quad = build_quadrature(dom, [64])
    mp = equator_map(dom, quad, sphere_chart(5))
    trace = homotopy_decay(mp, max_iters=100, seed=0)
    print(f"kappa = {trace.kappa:.4f}, xi = {trace.xi:.4f}")
    for k, E in enumerate(trace.energies):
        print(f"iter {k:>3}  E_phi = {E:.6e}")
    print(f"trailing geometric ratio: {trace.trailing_geometric_mean:.4f}")
    path = os.path.join(os.path.dirname(__file__), "decay_trace.svg")
    polyline_svg([float(np.log10(max(E, 1e-300))) for E in trace.energies],
                 path=path, title="log10 quartic energy per iteration")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
