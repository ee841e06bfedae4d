#pragma once

/**
 * @file pricing.hpp
 * @brief Exponential-affine futures prices F = exp(X + A(t) + B(t) delta).
 *
 * A and B solve, backward from A(T_i) = B(T_i) = 0,
 *   B' = kappa B + 1
 *   A' = -(r + eta_bar^2/2 B^2 + B (alpha_tilde kappa + rho eta eta_bar))
 * and are evaluated here from their closed forms only.
 */

#include "mfut/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfut {

struct AffineCoeffs {
    double a = 0.0;         ///< A_i(t)
    double b = 0.0;         ///< B_i(t), in (-1/kappa, 0]
    double t = 0.0;
    double maturity = 0.0;
};

namespace detail {

inline void require_before_maturity(double t, const ContractSpec& c) {
    if (!(t <= c.maturity))
        throw ValidationError("time " + format_double(t) + " is past contract maturity " +
                              format_double(c.maturity));
}

/// (1 - exp(-k tau)) / k without cancellation for small k tau.
inline double one_minus_exp_over(double k, double tau) { return -std::expm1(-k * tau) / k; }

}  // namespace detail

/// B_i(t) = -(1 - exp(-kappa (T_i - t))) / kappa.
inline double b_coeff(double t, const ContractSpec& c, const ModelParams& p) {
    detail::require_before_maturity(t, c);
    return -detail::one_minus_exp_over(p.kappa, c.maturity - t);
}

/// Explicit A_i(t), using the risk-neutral equilibrium level alpha_tilde.
inline double a_coeff(double t, const ContractSpec& c, const ModelParams& p) {
    detail::require_before_maturity(t, c);
    const double tau = c.maturity - t;
    const double k = p.kappa;
    const double at = alpha_tilde(p);
    const double eb2 = p.eta_bar * p.eta_bar;
    const double cross = p.eta * p.eta_bar * p.rho;

    const double linear = (p.r - at + eb2 / (2.0 * k * k) - cross / k) * tau;
    const double quad = eb2 / 4.0 * detail::one_minus_exp_over(2.0 * k, tau) * 2.0 / (k * k);
    const double expo = (at * k + cross - eb2 / k) * detail::one_minus_exp_over(k, tau) / k;
    return linear + quad + expo;
}

inline AffineCoeffs affine_coeffs(double t, const ContractSpec& c, const ModelParams& p) {
    return {a_coeff(t, c, p), b_coeff(t, c, p), t, c.maturity};
}

/// F_i(t, X, delta). Equals exp(x) exactly at maturity.
inline double futures_price(const MarketState& s, const ContractSpec& c, const ModelParams& p) {
    validate(s);
    if (s.t == c.maturity) return std::exp(s.x);
    const auto k = affine_coeffs(s.t, c, p);
    return std::exp(s.x + k.a + k.b * s.delta);
}

/// Finite-difference steps for the pricing PDE check. The x and delta steps
/// are relative (scaled by max(1, |value|)); the t step is absolute.
struct FdBumps {
    double x = 1e-4;
    double delta = 1e-4;
    double t = 1e-6;

    static FdBumps uniform(double bump) { return {bump, bump, 1e-6}; }
};

/**
 * Absolute residual of the pricing PDE
 *   eta^2/2 F_xx + rho eta eta_bar F_xd + eta_bar^2/2 F_dd
 *     + (r - delta - eta^2/2) F_x + kappa (alpha_tilde - delta) F_d + F_t = 0
 * for an arbitrary price function @p price(t, x, delta), with every partial
 * taken by central differences. Divided by F.
 */
template <typename PriceFn>
double pde_residual(PriceFn&& price, const MarketState& s, const ModelParams& p, const FdBumps& h) {
    const double hx = h.x * std::max(1.0, std::abs(s.x));
    const double hd = h.delta * std::max(1.0, std::abs(s.delta));
    const double ht = h.t;
    const double t = s.t, x = s.x, d = s.delta;

    const double f = price(t, x, d);
    const double fx_p = price(t, x + hx, d), fx_m = price(t, x - hx, d);
    const double fd_p = price(t, x, d + hd), fd_m = price(t, x, d - hd);
    const double f_x = (fx_p - fx_m) / (2.0 * hx);
    const double f_d = (fd_p - fd_m) / (2.0 * hd);
    const double f_xx = (fx_p - 2.0 * f + fx_m) / (hx * hx);
    const double f_dd = (fd_p - 2.0 * f + fd_m) / (hd * hd);
    const double f_xd = (price(t, x + hx, d + hd) - price(t, x + hx, d - hd) -
                         price(t, x - hx, d + hd) + price(t, x - hx, d - hd)) /
                        (4.0 * hx * hd);
    const double f_t = (price(t + ht, x, d) - price(t - ht, x, d)) / (2.0 * ht);

    const double lhs = 0.5 * p.eta * p.eta * f_xx + p.rho * p.eta * p.eta_bar * f_xd +
                       0.5 * p.eta_bar * p.eta_bar * f_dd +
                       (p.r - d - 0.5 * p.eta * p.eta) * f_x +
                       p.kappa * (alpha_tilde(p) - d) * f_d + f_t;
    return std::abs(lhs) / f;
}

/// PDE residual of the closed-form futures price. Requires t + bump.t <= maturity.
inline double pde_residual(const MarketState& s, const ContractSpec& c, const ModelParams& p,
                           const FdBumps& h = {}) {
    auto price = [&](double t, double x, double d) { return futures_price({t, x, d}, c, p); };
    return pde_residual(price, s, p, h);
}

inline double pde_residual(const MarketState& s, const ContractSpec& c, const ModelParams& p,
                           double bump) {
    return pde_residual(s, c, p, FdBumps::uniform(bump));
}

}  // namespace mfut
