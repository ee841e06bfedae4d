#!/usr/bin/env python3
"""High-precision reference values for the unit tests.

Computed from first principles, without the closed forms used by the library:
coefficients by ODE integration, positions by solving the 2x2 mean-variance
system, value functions by quadrature. Prints one `name = value` line each.
"""
import mpmath as mp

mp.mp.dps = 40

P = dict(mu=mp.mpf("0.010"), kappa=mp.mpf("0.8"), alpha=mp.mpf(0), eta=mp.mpf("0.45"),
         eta_bar=mp.mpf("0.5"), rho=mp.mpf("0.75"), lam=mp.mpf("0.05"), r=mp.mpf("0.001"))
GAMMA = mp.mpf("0.01")
HORIZON = mp.mpf(1)
T1 = mp.mpf(13) / 12
T2 = mp.mpf(14) / 12


def coeffs(tau, p=P):
    """(A, B) at time-to-maturity tau by integrating the coefficient ODEs from maturity."""
    at = p["alpha"] - p["lam"] / p["kappa"]

    def rhs(s, y):
        a, b = y
        return [p["r"] + (p["kappa"] * at + p["rho"] * p["eta"] * p["eta_bar"]) * b + p["eta_bar"] ** 2 * b * b / 2,
                -(1 + p["kappa"] * b)]

    if tau == 0:
        return mp.mpf(0), mp.mpf(0)
    sol = mp.odefun(rhs, 0, [mp.mpf(0), mp.mpf(0)])
    a, b = sol(tau)
    return a, b


def b_only(tau, p=P):
    return -(1 - mp.e ** (-p["kappa"] * tau)) / p["kappa"]


def drift(t, T, p=P):
    return p["mu"] - p["r"] + p["lam"] * b_only(T - t, p)


def cov(t, Ti, Tj, p=P):
    bi, bj = b_only(Ti - t, p), b_only(Tj - t, p)
    return p["eta"] ** 2 + p["rho"] * p["eta"] * p["eta_bar"] * (bi + bj) + p["eta_bar"] ** 2 * bi * bj


def pair_cash(t, p=P, gamma=GAMMA):
    """Dollar exposures solving gamma * Sigma * c = mu."""
    m = mp.matrix([[cov(t, T1, T1, p), cov(t, T1, T2, p)], [cov(t, T1, T2, p), cov(t, T2, T2, p)]])
    mu = mp.matrix([drift(t, T1, p), drift(t, T2, p)])
    return mp.lu_solve(m, mu) / gamma


def sharpe_sq(t, p=P):
    m = mp.matrix([[cov(t, T1, T1, p), cov(t, T1, T2, p)], [cov(t, T1, T2, p), cov(t, T2, T2, p)]])
    mu = mp.matrix([drift(t, T1, p), drift(t, T2, p)])
    return (mu.T * mp.lu_solve(m, mu))[0]


def main():
    out = {}
    a, b = coeffs(T1)
    out["B_T1_t0"] = b
    out["A_T1_t0"] = a
    a1, _ = coeffs(mp.mpf(1))
    out["A_tau1"] = a1
    out["F_T1_state"] = mp.e ** (mp.log(100) + coeffs(T1 - mp.mpf("0.3"))[0] + coeffs(T1 - mp.mpf("0.3"))[1] * mp.mpf("0.05"))
    out["mu1_t0"] = drift(0, T1)
    out["sigma1_t0"] = mp.sqrt(cov(0, T1, T1))
    out["rho12_t0"] = cov(0, T1, T2) / mp.sqrt(cov(0, T1, T1) * cov(0, T2, T2))
    out["pi_single_T1_F100"] = drift(0, T1) / (GAMMA * 100 * cov(0, T1, T1))
    c = pair_cash(0)
    out["pi1_pair_F100"] = c[0] / 100
    out["pi2_pair_F100"] = c[1] / 100
    c = pair_cash(mp.mpf("0.5"))
    out["pi1_pair_t05_F1_90_F2_110"] = c[0] / 90
    out["pi2_pair_t05_F1_90_F2_110"] = c[1] / 110
    phi1 = mp.quad(lambda s: drift(s, T1) ** 2 / (2 * cov(s, T1, T1)), [0, HORIZON])
    phi2 = mp.quad(lambda s: drift(s, T2) ** 2 / (2 * cov(s, T2, T2)), [0, HORIZON])
    phi = mp.quad(lambda s: sharpe_sq(s) / 2, [0, HORIZON])
    out["phi_single_T1"] = phi1
    out["phi_single_T2"] = phi2
    out["phi_pair"] = phi
    out["ce_single_1"] = phi1 / GAMMA
    out["ce_single_2"] = phi2 / GAMMA
    out["ce_pair"] = phi / GAMMA
    out["mu_w"] = sharpe_sq(0) / GAMMA
    out["sigma_w"] = mp.sqrt(sharpe_sq(0)) / GAMMA
    for k, v in out.items():
        print(f"{k} = {mp.nstr(v, 17)}")


if __name__ == "__main__":
    main()
