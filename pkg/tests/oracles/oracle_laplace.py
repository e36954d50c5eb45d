"""Quadrature oracles for the transform-side integral primitives.

Frozen into tests/test_laplace.py.  The two primitives checked here are
the only pieces of the transform layer that involve an actual integral;
everything built on top of them is verified in-test through defining
equations (ODE residual, boundary condition, decay) and exact algebra.

    python3 tests/oracles/oracle_laplace.py
"""
from mpmath import mp, mpf, exp, sqrt, quad

mp.dps = 40

# piecewise-linear datum used across the laplace tests: knots/values
KNOTS = (0.0, 0.5, 1.25, 3.0)
VALUES = (0.8, 1.0, 0.3, 0.0)


def f_tab(y):
    y = mpf(y)
    if y <= KNOTS[0] or y >= KNOTS[-1]:
        return VALUES[0] if y <= KNOTS[0] else mpf(0)
    for (a, b), (va, vb) in zip(zip(KNOTS, KNOTS[1:]), zip(VALUES, VALUES[1:])):
        if y <= b:
            return mpf(va) + (mpf(vb) - va) * (y - a) / (mpf(b) - a)
    return mpf(0)


def exp_weighted_tab(lam):
    s = sqrt(mpf(lam))
    return quad(lambda y: exp(-y * s) * f_tab(y), list(KNOTS))


def dirichlet_potential(f, lam, x, support):
    s = sqrt(mpf(lam))
    x = mpf(x)

    def kern(y):
        return (exp(-abs(x - y) * s) - exp(-(x + y) * s)) / (2 * s) * f(y)

    pts = sorted(set(list(support) + [float(x)]))
    return quad(kern, pts + [mp.inf])


def main():
    print("# exp_weighted_integral, tabulated datum")
    for lam in (0.3, 1.0, 7.5):
        v = exp_weighted_tab(lam)
        print(f"    {lam}: {mp.nstr(v, 17)},")

    print("# dirichlet_potential, exponential datum beta=1.5")
    f_exp = lambda y: exp(-mpf("1.5") * y)
    for lam, x in ((0.5, 0.8), (2.25, 0.8), (2.25, 3.0), (1.0, 1e-3)):
        v = dirichlet_potential(f_exp, lam, x, [0.0, 10.0])
        print(f"    ({lam}, {x}): {mp.nstr(v, 17)},")
    # near the removable singularity lam = beta^2 = 2.25 (checked above)

    print("# dirichlet_potential, tabulated datum")
    for lam, x in ((0.7, 0.6), (3.0, 2.0)):
        v = dirichlet_potential(f_tab, lam, x, list(KNOTS))
        print(f"    ({lam}, {x}): {mp.nstr(v, 17)},")


if __name__ == "__main__":
    main()
