"""Sweep round spheres through dimensions 2..8 and print, side by side,
the pointwise stability-form verdict, the spectral instability criterion,
and the sign of the Hessian on a conformal gradient field.

All three flip together at dimension five.
"""

import numpy as np

from phivar import (build_quadrature, check_phi_ssu, conformal_gradient_field,
                    hessian_quadratic_form, phi_unstable_criterion,
                    sphere_chart, sphere_spectrum)


def main():
    print(f"{'n':>2}  {'worst form value':>18}  {'form negative':>13}  "
          f"{'spectral':>8}  {'hessian on conformal':>20}")
    for n in range(2, 9):
        chart = sphere_chart(n)
        verdict = check_phi_ssu(chart, build_quadrature(
            chart, [3] * (n - 1) + [6]))
        spectral = phi_unstable_criterion(sphere_spectrum(n))
        if n <= 5:
            quad = build_quadrature(chart, [8] * (n - 1) + [16])
        else:
            quad = build_quadrature(chart, None, scheme="monte_carlo",
                                    seed=0, n_samples=100_000)
        v = conformal_gradient_field(chart, np.eye(n + 1)[0])
        vals = hessian_quadratic_form(chart, quad, v)
        print(f"{n:>2}  {verdict.worst_value:>18.6f}  "
              f"{str(verdict.is_ssu):>13}  {str(spectral):>8}  "
              f"{np.mean(vals):>20.4f}")


if __name__ == "__main__":
    main()
