"""Symbolic derivation of the dynamical force, checked against dyncp.force.

The frequency integral of the energy is written with the operator
2 - 2 d/dm + d^2/dm^2 (at m = 1) acting on integrals of sin(m x) against the
brace factor.  Those integrals have closed forms in Si and Ci; the force
then follows from phi = -d^4 d/dd (e / d^3) with x0 = 2 k0 d and a = c t / 2d,
i.e. phi = (3 e - x0 de/dx0 + a de/da) in reduced variables.  Both regimes are
evaluated with mpmath at sample points and compared with the adopted terms.

Usage: python3 scripts/derive_closed_form.py
"""
import mpmath
import sympy as sp

from dyncp import force

z, a, m = sp.symbols("z a m", positive=True)


def kernel(b, sign):
    """Si/Ci closed form of the sine-weighted frequency integral with shift b."""
    phase = m * z
    return -sp.sin(phase) * sp.Ci(sign * b * z) + sp.cos(phase) * (sp.Si(b * z) + sign * sp.pi / 2)


def operator(expr):
    return (2 * expr - 2 * sp.diff(expr, m) + sp.diff(expr, m, 2)).subs(m, 1)


def reduced_force(sign):
    integral = -sp.Rational(1, 2) * operator(kernel(m + a, 1) + kernel(m - a, sign))
    return (-3 * integral + z * sp.diff(integral, z) - a * sp.diff(integral, a)) / (12 * sp.pi)


def main():
    samples = {1: [(1.0, 0.3), (2.0, 0.7), (5.0, 0.5), (7.27, 0.9)], -1: [(1.0, 1.5), (2.0, 3.0), (5.0, 2.2), (40.0, 1.7)]}
    worst = 0.0
    for sign, label in ((1, "before round trip"), (-1, "after round trip")):
        phi = reduced_force(sign)
        numeric = sp.lambdify((z, a), phi, modules="mpmath")
        for x0, av in samples[sign]:
            symbolic = float(numeric(mpmath.mpf(x0), mpmath.mpf(av)))
            closed = force.dynamical_force(x0, av)
            err = abs(symbolic - closed) / abs(closed)
            worst = max(worst, err)
            print(f"{label:18s} x0={x0:<5g} a={av:<4g} symbolic={symbolic:+.12e} closed={closed:+.12e} rel={err:.1e}")
    print(f"max relative difference {worst:.1e}")
    return 0 if worst < 1e-9 else 1


if __name__ == "__main__":
    raise SystemExit(main())
