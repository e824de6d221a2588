"""Arbitrary-precision evaluation of the IVL / measure-to-pointwise / Hölder
constants. Used once to freeze regression values in tests/constants.rs.

    python3 paper_constants.py
"""
from mpmath import mp, mpf, log, sqrt, exp, pi, gamma, log1p

mp.dps = 60


def ball_volume(d, r):
    return pi ** (mpf(d) / 2) / gamma(mpf(d) / 2 + 1) * r ** d


def constants(d, d1, d2, s_inf, sigma, c, delta0=mpf("0.01")):
    d1, d2, s_inf, sigma, c = map(mpf, (d1, d2, s_inf, sigma, c))
    if s_inf == 0:
        r0 = mpf(1) / 20
    else:
        r0 = min(mpf(1) / 20, sqrt(d1 / (400 * (1 + s_inf))))
    base = d1 * d2 / (8 * c)
    eps = base ** (1 / sigma)
    k = c * (1 + s_inf) / (r0 ** (4 * d + 1) * base ** ((d + 2) / sigma))
    theta = d1 ** 2 * d2 ** 2 * (8 * (d2 + k)) ** -2
    q_half = (mpf(1) / 2) ** 2 * ball_volume(d, (mpf(1) / 2) ** 3) * ball_volume(d, mpf(1) / 2)
    nu = (d1 * d2 / (4 * c) * base ** ((d + 2) / sigma) * r0 ** (4 * d + 1)) ** 2 / q_half
    neg_ln_mu = (1 + 1 / nu) * (-log(theta)) + log(2)
    r_holder = mpf(1) / 40
    # alpha = -ln(1 - mu/2) / ln(1/r_holder); mu is far below any float, so
    # -ln(alpha) = -ln(mu) + ln 2 + ln ln 40 to all printed digits.
    neg_ln_alpha = neg_ln_mu + log(2) + log(log(1 / r_holder))
    zeta = delta0 ** (10 * d + 17)
    return dict(r0=r0, eps=eps, theta=theta, nu=nu, neg_ln_mu=neg_ln_mu,
                neg_ln_alpha=neg_ln_alpha, zeta=zeta,
                ln_theta=log(theta), ln_nu=log(nu), ln_eps=log(eps))


if __name__ == "__main__":
    out = constants(1, "0.5", "0.5", 0, "0.25", 10)
    for key, val in out.items():
        print(f"{key} = {mp.nstr(val, 20)}")
    print("--- S_inf = 0.5, delta1 = 0.3, delta2 = 0.7, sigma = 0.2, C = 3")
    out = constants(1, "0.3", "0.7", "0.5", "0.2", 3)
    for key, val in out.items():
        print(f"{key} = {mp.nstr(val, 20)}")
