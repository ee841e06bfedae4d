#pragma once

/**
 * @file dynamics.hpp
 * @brief Physical-measure futures dynamics dF_i / F_i = mu_i(t) dt + sigma_i(t) dZ_i.
 *
 * The drift depends on time only; the delta-dependent part cancels because
 * B solves its terminal-value ODE.
 */

#include "mfut/model.hpp"
#include "mfut/pricing.hpp"

#include <algorithm>
#include <cmath>

namespace mfut {

struct FuturesDynamics {
    double mu_i = 0.0;     ///< drift rate (1/year)
    double sigma_i = 0.0;  ///< volatility (1/sqrt(year))
    double t = 0.0;
    double maturity = 0.0;
};

/// mu_i(t) = mu - r - lambda (1 - exp(-kappa (T_i - t))) / kappa.
inline double drift_mu(double t, const ContractSpec& c, const ModelParams& p) {
    return p.mu - p.r + p.lambda * b_coeff(t, c, p);
}

/// Drift as Ito's formula produces it, before the A/B ODEs are used to simplify:
///   (lambda + alpha_tilde kappa + rho eta_bar eta) B + eta_bar^2/2 B^2 + mu + A'
///     + delta (B' - kappa B - 1)
/// with A' and B' taken from the closed forms by central differences (step h).
/// Only used to cross-check drift_mu.
inline double drift_mu_ito(double t, double delta, const ContractSpec& c, const ModelParams& p,
                           double h = 1e-6) {
    const double b = b_coeff(t, c, p);
    const double lo = std::max(0.0, t - h);
    const double hi = std::min(c.maturity, t + h);
    const double a_prime = (a_coeff(hi, c, p) - a_coeff(lo, c, p)) / (hi - lo);
    const double b_prime = (b_coeff(hi, c, p) - b_coeff(lo, c, p)) / (hi - lo);
    return (p.lambda + alpha_tilde(p) * p.kappa + p.rho * p.eta_bar * p.eta) * b +
           0.5 * p.eta_bar * p.eta_bar * b * b + p.mu + a_prime +
           delta * (b_prime - p.kappa * b - 1.0);
}

/// Squared volatility eta^2 + 2 rho eta_bar eta B + eta_bar^2 B^2 for a given B.
inline double vol_sigma_sq_from_b(double b, const ModelParams& p) {
    return p.eta * p.eta + 2.0 * p.rho * p.eta_bar * p.eta * b + p.eta_bar * p.eta_bar * b * b;
}

inline double vol_sigma(double t, const ContractSpec& c, const ModelParams& p) {
    return std::sqrt(vol_sigma_sq_from_b(b_coeff(t, c, p), p));
}

/// Instantaneous covariance rate of the two futures returns,
/// eta^2 + eta_bar^2 B_i B_j + rho eta eta_bar (B_i + B_j).
inline double covariance_rate(double bi, double bj, const ModelParams& p) {
    return p.eta * p.eta + p.eta_bar * p.eta_bar * bi * bj + p.rho * p.eta * p.eta_bar * (bi + bj);
}

/// Correlation rho_12(t) of the two futures Brownian drivers. Exactly 1 when B_1 = B_2.
inline double corr_rho12(double t, const ContractSpec& c1, const ContractSpec& c2,
                         const ModelParams& p) {
    const double b1 = b_coeff(t, c1, p);
    const double b2 = b_coeff(t, c2, p);
    if (b1 == b2) return 1.0;
    const double v = covariance_rate(b1, b2, p) /
                     std::sqrt(vol_sigma_sq_from_b(b1, p) * vol_sigma_sq_from_b(b2, p));
    return std::clamp(v, -1.0, 1.0);
}

inline FuturesDynamics futures_dynamics(double t, const ContractSpec& c, const ModelParams& p) {
    return {drift_mu(t, c, p), vol_sigma(t, c, p), t, c.maturity};
}

}  // namespace mfut
