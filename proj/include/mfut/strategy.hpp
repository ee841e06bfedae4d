#pragma once

/**
 * @file strategy.hpp
 * @brief Optimal futures positions, value functions and certainty equivalents
 *        for an exponential-utility investor.
 *
 * Positions are signed contract counts (positive = long). In every case the
 * cash exposure pi_i * F_i is a deterministic function of time.
 */

#include "mfut/dynamics.hpp"
#include "mfut/model.hpp"
#include "mfut/pricing.hpp"
#include "mfut/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace mfut {

/// Closest two maturities may be for the pair formulas.
inline constexpr double kMinMaturityGap = 1e-6;

struct StrategyOutput {
    std::vector<double> positions;        ///< contracts, signed
    std::vector<double> cash_exposures;   ///< positions[i] * F_i
    std::vector<FuturesDynamics> components;
    double rho12 = 0.0;                   ///< pair case only
};

struct ValueReport {
    double phi = 0.0;
    double value = 0.0;                 ///< -exp(-gamma w - phi)
    double certainty_equivalent = 0.0;  ///< w + phi / gamma
};

struct WealthMoments {
    double mu_w = 0.0;     ///< wealth drift per year
    double sigma_w = 0.0;  ///< wealth volatility per sqrt(year)
};

namespace detail {

inline void require_positive_price(double f, const char* name) {
    if (!(f > 0.0) || !std::isfinite(f))
        throw ValidationError(std::string(name) + " must be a positive finite price");
}

inline void require_trading_time(double t, const RiskPrefs& prefs, std::initializer_list<ContractSpec> cs) {
    validate(prefs, std::vector<ContractSpec>(cs));
    if (!(t >= 0.0)) throw ValidationError("time must be non-negative");
    if (!(t <= prefs.horizon)) throw ValidationError("time is past the trading horizon");
    for (const auto& c : cs) require_before_maturity(t, c);
}

inline void require_distinct(const ContractSpec& c1, const ContractSpec& c2) {
    if (std::abs(c1.maturity - c2.maturity) < kMinMaturityGap)
        throw ValidationError("pair maturities must differ by at least 1e-6 years");
}

/// The quadratic form (r-mu)^2 eta_bar^2 + 2 lambda (r-mu) rho eta_bar eta + lambda^2 eta^2,
/// divided by (1 - rho^2) eta_bar^2 eta^2: the squared market-price-of-risk norm.
inline double sharpe_norm_sq(const ModelParams& p) {
    const double d = p.r - p.mu;
    const double num = d * d * p.eta_bar * p.eta_bar + 2.0 * p.lambda * d * p.rho * p.eta_bar * p.eta +
                       p.lambda * p.lambda * p.eta * p.eta;
    return num / ((1.0 - p.rho * p.rho) * p.eta_bar * p.eta_bar * p.eta * p.eta);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single contract
// ---------------------------------------------------------------------------

/// Optimal number of T_1 contracts when trading that contract alone:
///   mu_1 / (gamma F_1 sigma_1^2)
///   = kappa (kappa (mu - r) - lambda (1 - e)) /
///     (gamma F_1 ((1 - e)^2 eta_bar^2 - 2 (1 - e) kappa rho eta eta_bar + kappa^2 eta^2)),
/// with e = exp(-kappa (T_1 - t)).
inline StrategyOutput single_position(double t, double f1, const ContractSpec& c, const ModelParams& p,
                                      const RiskPrefs& prefs) {
    detail::require_positive_price(f1, "F1");
    detail::require_trading_time(t, prefs, {c});

    const double k = p.kappa;
    const double one_minus_e = -std::expm1(-k * (c.maturity - t));
    const double num = k * (k * (p.mu - p.r) - p.lambda * one_minus_e);
    const double den = one_minus_e * one_minus_e * p.eta_bar * p.eta_bar -
                       2.0 * one_minus_e * k * p.rho * p.eta * p.eta_bar + k * k * p.eta * p.eta;
    const double cash = num / (prefs.gamma * den);

    StrategyOutput out;
    out.positions = {cash / f1};
    out.cash_exposures = {cash};
    out.components = {futures_dynamics(t, c, p)};
    return out;
}

// ---------------------------------------------------------------------------
// Two contracts
// ---------------------------------------------------------------------------

/// Optimal pair (pi_1, pi_2) from the fully expanded parameter formulas.
/// Exponentials are taken relative to t, E_i = exp(kappa (T_i - t)), so the
/// absolute clock never enters an exponent:
///   pi_1 = -E_1 [(1-E_2)(r-mu) eta_bar^2 + (lambda + E_2 (r kappa - lambda - kappa mu)) rho eta_bar eta
///               + E_2 kappa lambda eta^2] / (F_1 (E_1 - E_2) gamma (1-rho^2) eta_bar^2 eta^2)
/// and pi_2 symmetric with the indices swapped and the sign flipped.
inline StrategyOutput pair_position(double t, double f1, double f2, const ContractSpec& c1,
                                    const ContractSpec& c2, const ModelParams& p, const RiskPrefs& prefs) {
    detail::require_positive_price(f1, "F1");
    detail::require_positive_price(f2, "F2");
    detail::require_distinct(c1, c2);
    detail::require_trading_time(t, prefs, {c1, c2});

    const double k = p.kappa;
    const double e1 = std::exp(k * (c1.maturity - t));
    const double e2 = std::exp(k * (c2.maturity - t));
    const double d = p.r - p.mu;
    const double eb2 = p.eta_bar * p.eta_bar;
    const double ee = p.rho * p.eta_bar * p.eta;
    const double common = prefs.gamma * (1.0 - p.rho * p.rho) * eb2 * p.eta * p.eta * (e1 - e2);

    auto bracket = [&](double e_other) {
        return (1.0 - e_other) * d * eb2 + (p.lambda + e_other * (p.r * k - p.lambda - k * p.mu)) * ee +
               e_other * k * p.lambda * p.eta * p.eta;
    };
    const double cash1 = -e1 * bracket(e2) / common;
    const double cash2 = e2 * bracket(e1) / common;

    StrategyOutput out;
    out.positions = {cash1 / f1, cash2 / f2};
    out.cash_exposures = {cash1, cash2};
    out.components = {futures_dynamics(t, c1, p), futures_dynamics(t, c2, p)};
    out.rho12 = corr_rho12(t, c1, c2, p);
    return out;
}

/// Pair positions from the futures' drifts, volatilities and correlation:
///   pi_1 = (mu_1/sigma_1 - rho_12 mu_2/sigma_2) / (gamma (1 - rho_12^2) sigma_1 F_1)
/// and symmetrically for pi_2. With rho_12 = 0 each leg is the single-contract rule.
inline std::array<double, 2> pair_position_from_components(double mu1, double sigma1, double mu2, double sigma2,
                                                           double rho12, double f1, double f2, double gamma) {
    const double s1 = mu1 / sigma1, s2 = mu2 / sigma2;
    const double denom = gamma * (1.0 - rho12) * (1.0 + rho12);
    return {(s1 - rho12 * s2) / (denom * sigma1 * f1), (s2 - rho12 * s1) / (denom * sigma2 * f2)};
}

/// Pair positions through the rho_12 form. Loses precision as rho_12 -> 1;
/// kept as an independent check on pair_position.
inline StrategyOutput pair_position_rho_form(double t, double f1, double f2, const ContractSpec& c1,
                                             const ContractSpec& c2, const ModelParams& p,
                                             const RiskPrefs& prefs) {
    detail::require_positive_price(f1, "F1");
    detail::require_positive_price(f2, "F2");
    detail::require_distinct(c1, c2);
    detail::require_trading_time(t, prefs, {c1, c2});

    const auto d1 = futures_dynamics(t, c1, p);
    const auto d2 = futures_dynamics(t, c2, p);
    const double r12 = corr_rho12(t, c1, c2, p);
    const auto pi = pair_position_from_components(d1.mu_i, d1.sigma_i, d2.mu_i, d2.sigma_i, r12, f1, f2,
                                                  prefs.gamma);
    StrategyOutput out;
    out.positions = {pi[0], pi[1]};
    out.cash_exposures = {pi[0] * f1, pi[1] * f2};
    out.components = {d1, d2};
    out.rho12 = r12;
    return out;
}

// ---------------------------------------------------------------------------
// Value functions
// ---------------------------------------------------------------------------

/// Integrand of the single-contract Phi, mu_1^2 / (2 sigma_1^2), written in
/// parameters directly:
///   (lambda (1-e) - kappa (mu-r))^2 / (2 ((1-e)^2 eta_bar^2 - 2 (1-e) kappa rho eta eta_bar + kappa^2 eta^2)).
/// Phi_tilde' (t) is its negative.
inline double phi_single_rate(double t, const ContractSpec& c, const ModelParams& p) {
    const double k = p.kappa;
    const double one_minus_e = -std::expm1(-k * (c.maturity - t));
    const double num = p.lambda * one_minus_e - k * (p.mu - p.r);
    const double den = one_minus_e * one_minus_e * p.eta_bar * p.eta_bar -
                       2.0 * one_minus_e * k * p.rho * p.eta * p.eta_bar + k * k * p.eta * p.eta;
    return 0.5 * num * num / den;
}

/// Phi_tilde(t) = int_t^T mu_1^2 / (2 sigma_1^2) dt' for the single-contract problem.
inline double phi_single(double t, const ContractSpec& c, const ModelParams& p, const RiskPrefs& prefs) {
    validate(prefs, {c});
    if (!(t <= prefs.horizon)) throw ValidationError("time is past the trading horizon");
    if (t == prefs.horizon) return 0.0;
    auto integrand = [&](double s) { return phi_single_rate(s, c, p); };
    return adaptive_simpson(integrand, t, prefs.horizon, 1e-12, 40);
}

/// Phi(t) for the two-contract problem:
///   (T - t) [(r-mu)^2 eta_bar^2 + 2 lambda (r-mu) rho eta_bar eta + lambda^2 eta^2]
///   / [2 (1 - rho^2) eta_bar^2 eta^2].
/// Independent of the maturities, kappa and alpha.
inline double phi_pair(double t, const ModelParams& p, const RiskPrefs& prefs) {
    if (!(t <= prefs.horizon)) throw ValidationError("time is past the trading horizon");
    return 0.5 * (prefs.horizon - t) * detail::sharpe_norm_sq(p);
}

inline ValueReport value_and_ce(double w, double phi, const RiskPrefs& prefs) {
    return {phi, -std::exp(-prefs.gamma * w - phi), w + phi / prefs.gamma};
}

/// Drift and volatility of optimal two-contract wealth (an arithmetic Brownian motion).
inline WealthMoments wealth_moments(const ModelParams& p, const RiskPrefs& prefs) {
    const double mu_w = detail::sharpe_norm_sq(p) / prefs.gamma;
    return {mu_w, std::sqrt(mu_w / prefs.gamma)};
}

/// Wealth drift and variance rate assembled from the optimal positions at time t:
///   mu_W = sum pi_i F_i mu_i,
///   sigma_W^2 = (sum pi_i F_i)^2 eta^2 + (sum pi_i F_i B_i)^2 eta_bar^2
///               + 2 rho eta eta_bar (sum pi_i F_i)(sum pi_i F_i B_i).
inline WealthMoments wealth_moments_from_positions(double t, const ContractSpec& c1, const ContractSpec& c2,
                                                   const ModelParams& p, const RiskPrefs& prefs) {
    const auto s = pair_position(t, 1.0, 1.0, c1, c2, p, prefs);
    const double b1 = b_coeff(t, c1, p), b2 = b_coeff(t, c2, p);
    const double x0 = s.cash_exposures[0] + s.cash_exposures[1];
    const double x1 = s.cash_exposures[0] * b1 + s.cash_exposures[1] * b2;
    const double mu_w = s.cash_exposures[0] * s.components[0].mu_i + s.cash_exposures[1] * s.components[1].mu_i;
    const double var = x0 * x0 * p.eta * p.eta + x1 * x1 * p.eta_bar * p.eta_bar +
                       2.0 * p.rho * p.eta * p.eta_bar * x0 * x1;
    return {mu_w, std::sqrt(std::max(var, 0.0))};
}

// ---------------------------------------------------------------------------
// Three contracts
// ---------------------------------------------------------------------------

struct SingularityReport {
    Eigen::Matrix3d matrix;
    double determinant = 0.0;
    double scaled_determinant = 0.0;  ///< |det| / product of diagonal entries
    int rank = 0;                     ///< singular values above 1e-10 * largest
    Eigen::Vector3d singular_values;
};

/// First-order-condition matrix of the three-contract problem, with F_i^2 sigma_i^2
/// on the diagonal and F_i F_j a_ij off it, a_ij the covariance rate of contracts i and j.
/// Two Brownian drivers span at most two directions, so the matrix has rank 2.
inline SingularityReport three_futures_singularity(double t, const std::array<double, 3>& prices,
                                                   const std::array<ContractSpec, 3>& contracts,
                                                   const ModelParams& p) {
    std::array<double, 3> b{};
    for (int i = 0; i < 3; ++i) {
        detail::require_positive_price(prices[i], "F");
        b[i] = b_coeff(t, contracts[i], p);
    }
    SingularityReport rep;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            rep.matrix(i, j) = prices[i] * prices[j] *
                               (i == j ? vol_sigma_sq_from_b(b[i], p) : covariance_rate(b[i], b[j], p));

    rep.determinant = rep.matrix.determinant();
    const double diag = rep.matrix(0, 0) * rep.matrix(1, 1) * rep.matrix(2, 2);
    rep.scaled_determinant = std::abs(rep.determinant) / diag;

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(rep.matrix);
    rep.singular_values = svd.singularValues();
    const double cutoff = 1e-10 * rep.singular_values(0);
    rep.rank = static_cast<int>((rep.singular_values.array() > cutoff).count());
    return rep;
}

}  // namespace mfut
