"""Verify the first and second variation formulas of the quartic energy
against centered finite differences of retracted and geodesic homotopies,
on a warped circle self-map and a latitude circle in S^3.
"""

import numpy as np

from phivar import (ambient_variation, build_quadrature, fd_first_variation,
                    fd_second_variation, first_variation, map_from_config,
                    phi_energy, second_variation, sphere_chart,
                    warped_circle_map)


def main():
    dom = sphere_chart(1)
    quad = build_quadrature(dom, [160])
    cases = [
        ("warped circle", warped_circle_map(dom, quad, dom, amplitude=0.3)),
        ("latitude in S^3", map_from_config({
            "kind": "latitude", "colatitude": 1.0,
            "target": {"kind": "sphere", "dim": 3}, "grid": [160]})),
    ]
    for name, mp in cases:
        var = ambient_variation(np.eye(mp.q)[0])
        print(f"{name}:  E_phi = {phi_energy(mp):.6f}")
        an, fd = first_variation(mp, var), fd_first_variation(mp, var)
        print(f"  first variation   analytic {an:+.8f}   fd {fd:+.8f}")
        an, fd = second_variation(mp, var), fd_second_variation(mp, var)
        print(f"  second variation  analytic {an:+.8f}   fd {fd:+.8f}")


if __name__ == "__main__":
    main()
