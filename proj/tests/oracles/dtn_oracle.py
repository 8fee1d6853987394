"""High-precision radial DtN coefficients on the hyperbolic ball H^{n+1}.

Regular solution: u = sinh(t)^l w(t) with
    w'' + (2l+n) coth(t) w' + (l(l+n) + s(n-s)) w = 0,  w(0) = 1,
integrated with mpmath's Taylor ODE solver, then matched at t_m to the two
Frobenius series in x = 2 e^{-t}:
    x^2 u'' + p(x) x u' + q(x) u = 0,
    p = (1-n) - n x^2 / (2 rho),  q = s(n-s) - l(l+n-1) x^2 / rho^2,  rho = 1 - x^2/4.
Lambda_l = G/F for u = F x^{n-s}(1 + ...) + G x^s (1 + ...).

usage: python3 dtn_oracle.py n s lmax > table.csv
"""
import sys

import mpmath as mp

mp.mp.dps = 40


def frobenius(n, s, l, r, order=120):
    mu = s * (n - s)
    L = l * (l + n - 1)
    # 1/rho = sum (x^2/4)^m, 1/rho^2 = sum (m+1)(x^2/4)^m
    p = [mp.mpf(0)] * (order + 1)
    q = [mp.mpf(0)] * (order + 1)
    p[0], q[0] = 1 - n, mu
    for m in range((order - 2) // 2 + 1):
        p[2 * m + 2] = -(n / 2) / mp.mpf(4) ** m
        q[2 * m + 2] = -L * (m + 1) / mp.mpf(4) ** m
    a = [mp.mpf(1)] + [mp.mpf(0)] * order
    for k in range(1, order + 1):
        acc = mp.mpf(0)
        for j in range(1, k + 1):
            acc += a[k - j] * (p[j] * (r + k - j) + q[j])
        ind = (r + k) * (r + k - 1) + p[0] * (r + k) + q[0]
        if k % 2:
            # p, q are even: odd coefficients vanish, including at the 2s-n collision
            assert acc == 0
            continue
        a[k] = -acc / ind
    return a


def eval_series(a, r, x):
    u = mp.mpf(0)
    du = mp.mpf(0)
    for k, c in enumerate(a):
        u += c * x ** (r + k)
        du += c * (r + k) * x ** (r + k - 1)
    return u, du


def regular(n, s, l, tm):
    mu = s * (n - s)
    c = -(l * (l + n) + mu) / (2 * (2 * l + n + 1))
    eps = mp.mpf("1e-12")
    f = mp.odefun(lambda t, y: [y[1], -(2 * l + n) * mp.coth(t) * y[1] - (l * (l + n) + mu) * y[0]],
                  eps, [1 + c * eps**2, 2 * c * eps])
    w, dw = f(tm)
    S, C = mp.sinh(tm), mp.cosh(tm)
    u = S**l * w
    du = S**l * (dw + l * C / S * w)
    return u, du


def dtn(n, s, l, tm=mp.mpf(2)):
    n, s = mp.mpf(n), mp.mpf(s)
    u, du_t = regular(n, s, l, tm)
    x = 2 * mp.exp(-tm)
    aF = frobenius(n, s, l, n - s)
    aG = frobenius(n, s, l, s)
    uF, dF = eval_series(aF, n - s, x)
    uG, dG = eval_series(aG, s, x)
    # du/dt = -x du/dx
    M = mp.matrix([[uF, uG], [-x * dF, -x * dG]])
    F, G = mp.lu_solve(M, mp.matrix([u, du_t]))
    return G / F


if __name__ == "__main__":
    n, s, lmax = int(sys.argv[1]), mp.mpf(sys.argv[2]), int(sys.argv[3])
    print("l,Lambda")
    for l in range(lmax + 1):
        print(f"{l},{mp.nstr(dtn(n, s, l), 20)}")
