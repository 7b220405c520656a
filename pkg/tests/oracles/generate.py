"""Recompute the frozen oracle values used by the test-suite.

Run with ``python3 tests/oracles/generate.py``; every value is computed with
mpmath (50 digits) or scipy adaptive quadrature, independently of fracgreen.
"""

import itertools
import math

import mpmath as mp
from scipy import integrate

mp.mp.dps = 50


def ml_brute(alphas, beta, z, kmax):
    total = mp.mpf(0)
    for k in range(kmax + 1):
        for beta_ in itertools.product(range(k + 1), repeat=len(alphas)):
            if sum(beta_) != k:
                continue
            w = mp.factorial(k)
            for b in beta_:
                w /= mp.factorial(b)
            term = w * mp.rgamma(sum(a * b for a, b in zip(alphas, beta_)) + beta)
            for zj, bj in zip(z, beta_):
                term *= mp.mpf(zj) ** bj
            total += term
    return total


def ml_deriv(alpha, beta, l, z, n=400):
    return mp.fsum(
        mp.factorial(i + l) / mp.factorial(i) * mp.mpf(z) ** i * mp.rgamma(alpha * (i + l) + beta)
        for i in range(n)
    )


def rl_quad(f, alpha, t, origin=0.0):
    # (t - xi)^(alpha - 1) endpoint weight handled by QUADPACK's algebraic rule
    val, _ = integrate.quad(f, origin, t, weight="alg", wvar=(0.0, alpha - 1.0),
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val / math.gamma(alpha)


def main():
    out = {}
    out["gamma(1.7)"] = mp.gamma(mp.mpf("1.7"))
    out["gamma_ratio(3.2,1.2)"] = mp.gamma(mp.mpf("3.2")) / mp.gamma(mp.mpf("1.2"))
    out["E(0.5,0.5;-1)"] = mp.fsum(
        mp.mpf(-1) ** i * mp.rgamma(mp.mpf("0.5") * i + mp.mpf("0.5")) for i in range(200))
    out["E'(0.5,1;l=2;-0.3)"] = ml_deriv(mp.mpf("0.5"), 1, 2, mp.mpf("-0.3"))
    out["E((1,0.5),1;0.2,0.3)"] = ml_brute((1, mp.mpf("0.5")), 1, (mp.mpf("0.2"), mp.mpf("0.3")), 60)
    out["E((1,1.5),1;1,1)"] = ml_brute((1, mp.mpf("1.5")), 1, (1, 1), 60)
    # constant coefficients, alpha = (1.5, 0.5), A1 = 1, t = 1: 200 layers
    out["y_cc(1.5,0.5;1;1)"] = mp.fsum(
        (-1) ** k * mp.rgamma(k + mp.mpf("1.5")) for k in range(200))
    for t in (0.1, 0.5, 1.0, 2.0):
        out[f"I^0.5 s^0.5 at {t}"] = rl_quad(lambda x: x**0.5, 0.5, t)
    for t, tau in ((1, 0.3), (2, 0.5), (1.5, 1)):
        out[f"I^1.5_tau xi at {(t, tau)}"] = rl_quad(lambda x: x, 1.5, t, tau)
    for t in (0.3, 1.0, 2.0):
        out[f"-I^1.5 [t] at {t}"] = -rl_quad(lambda x: x, 1.5, t)
    for key, value in out.items():
        print(f"{key!r}: {mp.nstr(mp.mpf(value), 17)},")


if __name__ == "__main__":
    main()
