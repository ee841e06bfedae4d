#pragma once

/**
 * @file verification.hpp
 * @brief Independent numerical checks of the closed forms.
 *
 * Every check compares a closed-form quantity against a route that does not
 * share its derivation: RK4 integration of the coefficient ODEs, finite
 * differences of the pricing PDE, the HJB equations with analytic partials,
 * quadrature of unsimplified rates, and Monte Carlo under the optimal control.
 */

#include "mfut/dynamics.hpp"
#include "mfut/model.hpp"
#include "mfut/pricing.hpp"
#include "mfut/quadrature.hpp"
#include "mfut/simulation.hpp"
#include "mfut/strategy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace mfut::verify {

struct CheckResult {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// Residual-style check: passes iff observed <= threshold.
inline CheckResult residual_check(std::string name, double observed, double threshold, std::string detail = {}) {
    return {std::move(name), std::isfinite(observed) && observed <= threshold, observed, threshold, std::move(detail)};
}

/// Comparison check: passes iff |observed - target| <= threshold.
inline CheckResult comparison_check(std::string name, double observed, double target, double threshold,
                                    std::string detail = {}) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "target=%.17g", target);
    if (!detail.empty()) detail = std::string(buf) + "; " + detail;
    else detail = buf;
    return {std::move(name), std::isfinite(observed) && std::abs(observed - target) <= threshold, observed, threshold,
            std::move(detail)};
}

/// Deliberate corruption of the closed-form side of a check, for negative controls.
/// a_slope adds a_slope * (T_i - t) to A (keeps A(T_i) = 0 but shifts A' by a_slope);
/// kappa_scale multiplies kappa in the closed form only.
struct Corruption {
    double a_slope = 0.0;
    double kappa_scale = 1.0;

    bool active() const { return a_slope != 0.0 || kappa_scale != 1.0; }
};

inline ModelParams corrupted_params(const ModelParams& p, const Corruption& c) {
    ModelParams q = p;
    q.kappa *= c.kappa_scale;
    return q;
}

inline double closed_form_a(double t, const ContractSpec& c, const ModelParams& p, const Corruption& cor) {
    return a_coeff(t, c, corrupted_params(p, cor)) + cor.a_slope * (c.maturity - t);
}

inline double closed_form_b(double t, const ContractSpec& c, const ModelParams& p, const Corruption& cor) {
    return b_coeff(t, c, corrupted_params(p, cor));
}

// ---------------------------------------------------------------------------
// Coefficient ODEs
// ---------------------------------------------------------------------------

struct OdePoint {
    double t, a, b;
};

/// Right-hand side in t of the coefficient ODEs:
///   B' = kappa B + 1,   A' = -(r + eta_bar^2/2 B^2 + B (alpha_tilde kappa + rho eta eta_bar)).
inline std::pair<double, double> coeff_ode_rhs(double b, const ModelParams& p) {
    const double db = p.kappa * b + 1.0;
    const double da = -(p.r + 0.5 * p.eta_bar * p.eta_bar * b * b +
                        b * (alpha_tilde(p) * p.kappa + p.rho * p.eta * p.eta_bar));
    return {da, db};
}

/// Classical RK4, integrated backward from A(T_i) = B(T_i) = 0 with steps of at
/// most @p max_step, reporting the solution at @p grid_size evenly spaced times
/// in [0, T_i] (returned in increasing t).
inline std::vector<OdePoint> rk4_coefficients(const ContractSpec& c, const ModelParams& p, std::size_t grid_size,
                                              double max_step = 1e-4) {
    std::vector<OdePoint> out(grid_size);
    const double T = c.maturity;
    double a = 0.0, b = 0.0, t = T;
    const double spacing = grid_size > 1 ? T / static_cast<double>(grid_size - 1) : 0.0;
    out[grid_size - 1] = {T, 0.0, 0.0};
    for (std::size_t idx = grid_size - 1; idx-- > 0;) {
        const double target = spacing * static_cast<double>(idx);
        const auto n = static_cast<std::size_t>(std::ceil((t - target) / max_step));
        const double h = -(t - target) / static_cast<double>(std::max<std::size_t>(n, 1));
        for (std::size_t s = 0; s < n; ++s) {
            const auto k1 = coeff_ode_rhs(b, p);
            const auto k2 = coeff_ode_rhs(b + 0.5 * h * k1.second, p);
            const auto k3 = coeff_ode_rhs(b + 0.5 * h * k2.second, p);
            const auto k4 = coeff_ode_rhs(b + h * k3.second, p);
            a += h / 6.0 * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first);
            b += h / 6.0 * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);
        }
        t = target;
        out[idx] = {t, a, b};
    }
    return out;
}

/// A, B closed forms vs RK4, and the ODE residuals of the closed forms with
/// derivatives by central differences (one-sided at the grid ends).
inline std::vector<CheckResult> run_ode_checks(const ModelParams& p, const std::vector<ContractSpec>& contracts,
                                               std::size_t grid_size = 1000, const Corruption& cor = {},
                                               double fd_step = 1e-6) {
    std::vector<CheckResult> out;
    for (std::size_t ci = 0; ci < contracts.size(); ++ci) {
        const auto& c = contracts[ci];
        const std::string tag = "T" + std::to_string(ci + 1);
        const auto oracle = rk4_coefficients(c, p, grid_size);
        double max_da = 0.0, max_db = 0.0, max_ra = 0.0, max_rb = 0.0;
        for (const auto& pt : oracle) {
            max_da = std::max(max_da, std::abs(closed_form_a(pt.t, c, p, cor) - pt.a));
            max_db = std::max(max_db, std::abs(closed_form_b(pt.t, c, p, cor) - pt.b));

            const double lo = std::max(0.0, pt.t - fd_step), hi = std::min(c.maturity, pt.t + fd_step);
            const double da = (closed_form_a(hi, c, p, cor) - closed_form_a(lo, c, p, cor)) / (hi - lo);
            const double db = (closed_form_b(hi, c, p, cor) - closed_form_b(lo, c, p, cor)) / (hi - lo);
            const auto rhs = coeff_ode_rhs(closed_form_b(pt.t, c, p, cor), p);
            max_ra = std::max(max_ra, std::abs(da - rhs.first));
            max_rb = std::max(max_rb, std::abs(db - rhs.second));
        }
        const std::string grid = "grid=" + std::to_string(grid_size);
        out.push_back(residual_check("ode.rk4_diff.A." + tag, max_da, 1e-8, grid));
        out.push_back(residual_check("ode.rk4_diff.B." + tag, max_db, 1e-8, grid));
        out.push_back(residual_check("ode.fd_residual.A." + tag, max_ra, 1e-6, grid));
        out.push_back(residual_check("ode.fd_residual.B." + tag, max_rb, 1e-6, grid));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pricing PDE
// ---------------------------------------------------------------------------

/// Largest scaled PDE residual over @p n_points random interior points
/// t in [0, T_i - 0.01], F between 20 and 200, delta in [-0.3, 0.3].
inline std::vector<CheckResult> run_pde_checks(const ModelParams& p, const std::vector<ContractSpec>& contracts,
                                               std::size_t n_points = 200, std::uint64_t seed = 7,
                                               const Corruption& cor = {}) {
    std::vector<CheckResult> out;
    std::mt19937_64 rng(seed);
    for (std::size_t ci = 0; ci < contracts.size(); ++ci) {
        const auto& c = contracts[ci];
        std::uniform_real_distribution<double> ut(0.0, std::max(0.0, c.maturity - 0.01));
        std::uniform_real_distribution<double> ux(std::log(20.0), std::log(200.0));
        std::uniform_real_distribution<double> ud(-0.3, 0.3);
        auto price = [&](double t, double x, double d) {
            return std::exp(x + closed_form_a(t, c, p, cor) + closed_form_b(t, c, p, cor) * d);
        };
        double worst = 0.0;
        for (std::size_t i = 0; i < n_points; ++i) {
            const MarketState s{ut(rng), ux(rng), ud(rng)};
            worst = std::max(worst, pde_residual(price, s, p, FdBumps{}));
        }
        out.push_back(residual_check("pde.residual.T" + std::to_string(ci + 1), worst, 1e-6,
                                     "points=" + std::to_string(n_points)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// HJB equations
// ---------------------------------------------------------------------------

/// Value-function partials for u = -exp(-gamma w - phi(t)); all F-derivatives vanish.
struct ExpUtilityPartials {
    double u, u_t, u_w, u_ww;

    ExpUtilityPartials(double gamma, double w, double phi, double phi_prime) {
        u = -std::exp(-gamma * w - phi);
        u_t = -phi_prime * u;
        u_w = -gamma * u;
        u_ww = gamma * gamma * u;
    }
};

/// Controlled part of the single-contract HJB (u_w1 = 0 here):
///   pi mu F u_w + 1/2 pi^2 sigma^2 F^2 u_ww.
inline double hjb_bracket_single(double pi, double mu, double sigma, double f, const ExpUtilityPartials& d) {
    return pi * mu * f * d.u_w + 0.5 * pi * pi * sigma * sigma * f * f * d.u_ww;
}

/// Controlled part of the pair HJB (u_w1 = u_w2 = 0 here):
///   (pi_1 mu_1 F_1 + pi_2 mu_2 F_2) u_w
///   + 1/2 (pi_1^2 s_1^2 F_1^2 + pi_2^2 s_2^2 F_2^2 + 2 rho_12 pi_1 pi_2 s_1 s_2 F_1 F_2) u_ww.
inline double hjb_bracket_pair(double pi1, double pi2, double mu1, double s1, double mu2, double s2, double r12,
                               double f1, double f2, const ExpUtilityPartials& d) {
    const double a = pi1 * s1 * f1, b = pi2 * s2 * f2;
    return (pi1 * mu1 * f1 + pi2 * mu2 * f2) * d.u_w + 0.5 * (a * a + b * b + 2.0 * r12 * a * b) * d.u_ww;
}

/// Pair dPhi/dt before simplification:
///   -(mu_1^2 s_2^2 + mu_2^2 s_1^2 - 2 rho_12 mu_1 mu_2 s_1 s_2) / (2 (1 - rho_12^2) s_1^2 s_2^2).
inline double phi_pair_rate_from_components(double mu1, double s1, double mu2, double s2, double r12) {
    const double num = mu1 * mu1 * s2 * s2 + mu2 * mu2 * s1 * s1 - 2.0 * r12 * mu1 * mu2 * s1 * s2;
    return -num / (2.0 * (1.0 - r12) * (1.0 + r12) * s1 * s1 * s2 * s2);
}

inline double phi_pair_rate_unsimplified(double t, const ContractSpec& c1, const ContractSpec& c2,
                                         const ModelParams& p) {
    const auto d1 = futures_dynamics(t, c1, p), d2 = futures_dynamics(t, c2, p);
    return phi_pair_rate_from_components(d1.mu_i, d1.sigma_i, d2.mu_i, d2.sigma_i, corr_rho12(t, c1, c2, p));
}

struct HjbGrid {
    std::size_t n_t = 50;
    std::size_t n_w = 50;
    double w_lo = -100.0;
    double w_hi = 100.0;
    std::vector<double> prices{50.0, 100.0, 200.0};
    double perturbation = 0.01;
};

namespace detail {

inline double grid_point(double lo, double hi, std::size_t i, std::size_t n) {
    return n <= 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

/// Relative bump of a position; a zero position gets a 1% bump of a unit-cash position.
inline double bump_of(double pi, double frac, double gamma, double f) {
    return pi != 0.0 ? frac * std::abs(pi) : frac / (gamma * f);
}

}  // namespace detail

/// HJB residuals of the single and pair problems on a (t, w) grid at several
/// prices, perturbation optimality of the controls, and the rho_12 = 0 reduction.
/// Times run over [0, T) since the equations hold before the horizon.
inline std::vector<CheckResult> run_hjb_checks(const ModelParams& p, const RiskPrefs& prefs,
                                               const ContractSpec& c1, const ContractSpec& c2,
                                               const HjbGrid& grid = {}) {
    const double g = prefs.gamma;
    const double phi_pair_prime = -0.5 * mfut::detail::sharpe_norm_sq(p);
    const double t_hi = prefs.horizon * (1.0 - 1.0 / static_cast<double>(grid.n_t));

    double single_res = 0.0, pair_res = 0.0, reduction_gap = 0.0;
    std::size_t single_fail = 0, pair_fail = 0, nodes = 0;
    for (std::size_t it = 0; it < grid.n_t; ++it) {
        const double t = detail::grid_point(0.0, t_hi, it, grid.n_t);
        const auto d1 = futures_dynamics(t, c1, p), d2 = futures_dynamics(t, c2, p);
        const double r12 = corr_rho12(t, c1, c2, p);
        const double phi_s = phi_single(t, c1, p, prefs);
        const double phi_s_prime = -phi_single_rate(t, c1, p);
        const double phi_p = phi_pair(t, p, prefs);
        for (std::size_t iw = 0; iw < grid.n_w; ++iw) {
            const double w = detail::grid_point(grid.w_lo, grid.w_hi, iw, grid.n_w);
            const ExpUtilityPartials us(g, w, phi_s, phi_s_prime);
            const ExpUtilityPartials up(g, w, phi_p, phi_pair_prime);
            for (double f : grid.prices) {
                ++nodes;
                // single
                const double pi = single_position(t, f, c1, p, prefs).positions[0];
                const double br = hjb_bracket_single(pi, d1.mu_i, d1.sigma_i, f, us);
                single_res = std::max(single_res, std::abs(us.u_t + br));
                const double h = detail::bump_of(pi, grid.perturbation, g, f);
                if (!(hjb_bracket_single(pi + h, d1.mu_i, d1.sigma_i, f, us) < br &&
                      hjb_bracket_single(pi - h, d1.mu_i, d1.sigma_i, f, us) < br))
                    ++single_fail;

                // pair, at F_1 = f and F_2 = 0.95 f
                const double f2 = 0.95 * f;
                const auto pp = pair_position(t, f, f2, c1, c2, p, prefs);
                const double p1 = pp.positions[0], p2 = pp.positions[1];
                auto bracket = [&](double a, double b) {
                    return hjb_bracket_pair(a, b, d1.mu_i, d1.sigma_i, d2.mu_i, d2.sigma_i, r12, f, f2, up);
                };
                const double bp = bracket(p1, p2);
                pair_res = std::max(pair_res, std::abs(up.u_t + bp));
                const double h1 = detail::bump_of(p1, grid.perturbation, g, f);
                const double h2 = detail::bump_of(p2, grid.perturbation, g, f2);
                if (!(bracket(p1 + h1, p2) < bp && bracket(p1 - h1, p2) < bp && bracket(p1, p2 + h2) < bp &&
                      bracket(p1, p2 - h2) < bp))
                    ++pair_fail;

                // rho_12 = 0 with a driftless second contract: the pair problem is the single one.
                const auto syn = pair_position_from_components(d1.mu_i, d1.sigma_i, 0.0, d2.sigma_i, 0.0, f, f2, g);
                const ExpUtilityPartials ur(g, w, phi_s,
                                            phi_pair_rate_from_components(d1.mu_i, d1.sigma_i, 0.0, d2.sigma_i, 0.0));
                const double red_pair =
                    ur.u_t + hjb_bracket_pair(syn[0], syn[1], d1.mu_i, d1.sigma_i, 0.0, d2.sigma_i, 0.0, f, f2, ur);
                const double red_single = us.u_t + br;
                reduction_gap = std::max(reduction_gap, std::abs(red_pair - red_single));
            }
        }
    }
    const std::string where = std::to_string(grid.n_t) + "x" + std::to_string(grid.n_w) + " (t,w) grid x " +
                              std::to_string(grid.prices.size()) + " prices";
    return {
        residual_check("hjb.residual.single", single_res, 1e-8, where),
        residual_check("hjb.residual.pair", pair_res, 1e-8, where),
        residual_check("hjb.perturbation.single", static_cast<double>(single_fail), 0.0,
                       "nodes where a 1% control change did not lower the bracket, of " + std::to_string(nodes)),
        residual_check("hjb.perturbation.pair", static_cast<double>(pair_fail), 0.0,
                       "nodes where a 1% control change did not lower the bracket, of " + std::to_string(nodes)),
        residual_check("hjb.reduction.rho12_zero", reduction_gap, 1e-12,
                       "|pair residual - single residual| with synthetic rho_12 = 0, mu_2 = 0"),
    };
}

// ---------------------------------------------------------------------------
// Closed-form identities
// ---------------------------------------------------------------------------

/// Relative difference of the expanded pair formulas against the rho_12 form
/// at @p n random admissible inputs (maturities at least a month apart).
inline CheckResult run_dual_formula_check(std::size_t n = 100, std::uint64_t seed = 11) {
    std::mt19937_64 rng(seed);
    auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ModelParams p;
        p.mu = U(-0.1, 0.1);
        p.kappa = U(0.2, 2.0);
        p.eta = U(0.1, 0.8);
        p.eta_bar = U(0.1, 0.8);
        p.rho = U(-0.9, 0.9);
        p.lambda = U(-0.2, 0.2);
        p.r = U(0.0, 0.05);
        const double t1 = U(0.25, 2.0);
        const double t2 = t1 + U(1.0 / 12.0, 1.0);
        RiskPrefs prefs{U(0.005, 0.2), U(0.0, t1)};
        const double t = U(0.0, prefs.horizon);
        const double f1 = U(20.0, 200.0), f2 = U(20.0, 200.0);
        const auto a = pair_position(t, f1, f2, {t1}, {t2}, p, prefs);
        const auto b = pair_position_rho_form(t, f1, f2, {t1}, {t2}, p, prefs);
        const double scale = std::max(std::abs(a.cash_exposures[0]), std::abs(a.cash_exposures[1]));
        for (int k = 0; k < 2; ++k)
            worst = std::max(worst, std::abs(a.cash_exposures[k] - b.cash_exposures[k]) / scale);
    }
    return residual_check("strategy.dual_formula", worst, 1e-10,
                          "max relative difference over " + std::to_string(n) + " random inputs");
}

/// sigma_W^2 = mu_W / gamma, Phi = gamma mu_W (T - t)/2, moments from positions,
/// Phi vs quadrature of the unsimplified rate, and independence of alpha and kappa.
inline std::vector<CheckResult> run_identity_checks(const ModelParams& p, const RiskPrefs& prefs,
                                                    const ContractSpec& c1, const ContractSpec& c2) {
    std::vector<CheckResult> out;
    const auto wm = wealth_moments(p, prefs);
    out.push_back(residual_check("identity.sigma_w_sq",
                                 std::abs(wm.sigma_w * wm.sigma_w - wm.mu_w / prefs.gamma) /
                                     std::max(1e-300, wm.mu_w / prefs.gamma),
                                 1e-14, "relative |sigma_W^2 - mu_W/gamma|"));

    double phi_gap = 0.0, moments_gap = 0.0;
    for (int i = 0; i <= 10; ++i) {
        const double t = prefs.horizon * i / 10.0;
        const double phi = phi_pair(t, p, prefs);
        const double via_mu = prefs.gamma * wm.mu_w * (prefs.horizon - t) / 2.0;
        phi_gap = std::max(phi_gap, std::abs(phi - via_mu) / std::max(1e-300, std::abs(phi) + 1e-300));
        const auto pm = wealth_moments_from_positions(t, c1, c2, p, prefs);
        moments_gap = std::max({moments_gap, std::abs(pm.mu_w - wm.mu_w) / wm.mu_w,
                                std::abs(pm.sigma_w - wm.sigma_w) / wm.sigma_w});
    }
    out.push_back(residual_check("identity.phi_vs_mu_w", phi_gap, 1e-14, "relative, 11 times in [0,T]"));
    out.push_back(residual_check("identity.moments_from_positions", moments_gap, 1e-9,
                                 "relative, positions-based mu_W and sigma_W at 11 times"));

    auto rate = [&](double s) { return -phi_pair_rate_unsimplified(s, c1, c2, p); };
    const double quad = adaptive_simpson(rate, 0.0, prefs.horizon, 1e-14, 40);
    const double closed = phi_pair(0.0, p, prefs);
    out.push_back(residual_check("identity.phi_pair_quadrature", std::abs(quad - closed), 1e-10,
                                 "absolute, quadrature of the unsimplified rate vs closed form"));

    // alpha enters neither Phi nor the wealth moments: bitwise equality.
    bool alpha_same = true;
    for (double alpha : {-0.1, 0.0, 0.1}) {
        ModelParams q = p;
        q.alpha = alpha;
        const auto m = wealth_moments(q, prefs);
        alpha_same = alpha_same && phi_pair(0.0, q, prefs) == phi_pair(0.0, p, prefs) && m.mu_w == wm.mu_w &&
                     m.sigma_w == wm.sigma_w;
    }
    out.push_back(residual_check("identity.alpha_independence", alpha_same ? 0.0 : 1.0, 0.0,
                                 "0 when bit-identical across alpha in {-0.1, 0, 0.1}"));

    double kappa_spread = 0.0, kappa_quad = 0.0;
    for (double kappa : {0.4, 0.8, 1.6}) {
        ModelParams q = p;
        q.kappa = kappa;
        const auto mc = wealth_moments(q, prefs);
        const auto mp = wealth_moments_from_positions(0.0, c1, c2, q, prefs);
        kappa_spread = std::max({kappa_spread, std::abs(phi_pair(0.0, q, prefs) - closed) / closed,
                                 std::abs(mc.mu_w - wm.mu_w) / wm.mu_w, std::abs(mc.sigma_w - wm.sigma_w) / wm.sigma_w,
                                 std::abs(mp.mu_w - wm.mu_w) / wm.mu_w});
        const double phi_q = adaptive_simpson([&](double s) { return -phi_pair_rate_unsimplified(s, c1, c2, q); },
                                              0.0, prefs.horizon, 1e-14, 40);
        kappa_quad = std::max(kappa_quad, std::abs(phi_q - closed));
    }
    out.push_back(residual_check("identity.kappa_independence", kappa_spread, 1e-12,
                                 "relative spread of Phi, mu_W, sigma_W (closed form and from positions) "
                                 "across kappa in {0.4, 0.8, 1.6}"));
    out.push_back(residual_check("identity.kappa_independence_quadrature", kappa_quad, 1e-10,
                                 "absolute, quadrature of the unsimplified pair rate across kappa"));
    return out;
}

/// Three-contract first-order-condition matrix: scaled determinant and rank at random inputs.
inline std::vector<CheckResult> run_singularity_checks(const ModelParams& base, std::size_t n = 100,
                                                       std::uint64_t seed = 13) {
    std::mt19937_64 rng(seed);
    auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    double worst_det = 0.0;
    std::size_t wrong_rank = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ModelParams p = base;
        p.kappa = U(0.2, 2.0);
        p.eta = U(0.1, 0.8);
        p.eta_bar = U(0.1, 0.8);
        p.rho = U(-0.9, 0.9);
        const double t1 = U(0.25, 1.5);
        const double t2 = t1 + U(1.0 / 12.0, 0.5);
        const double t3 = t2 + U(1.0 / 12.0, 0.5);
        const double t = U(0.0, t1);
        const auto rep = three_futures_singularity(t, {U(20, 200), U(20, 200), U(20, 200)},
                                                   {ContractSpec{t1}, {t2}, {t3}}, p);
        worst_det = std::max(worst_det, rep.scaled_determinant);
        if (rep.rank != 2) ++wrong_rank;
    }
    return {residual_check("singularity.scaled_det", worst_det, 1e-10, std::to_string(n) + " random inputs"),
            residual_check("singularity.rank", static_cast<double>(wrong_rank), 0.0,
                           "inputs whose numerical rank is not 2")};
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;  ///< unbiased
    double se_mean = 0.0;
    double se_variance = 0.0;  ///< Gaussian approximation sqrt(2/(n-1)) * variance
};

inline SampleStats sample_stats(const std::vector<double>& v) {
    SampleStats s;
    const double n = static_cast<double>(v.size());
    for (double x : v) s.mean += x;
    s.mean /= n;
    for (double x : v) s.variance += (x - s.mean) * (x - s.mean);
    s.variance /= (n - 1.0);
    s.se_mean = std::sqrt(s.variance / n);
    s.se_variance = s.variance * std::sqrt(2.0 / (n - 1.0));
    return s;
}

struct McSpec {
    std::size_t n_paths = 100000;
    std::size_t steps_per_year = kDefaultStepsPerYear;
    std::uint64_t seed = 20240601;
    unsigned workers = 1;
    double band = 3.0;  ///< pass band in standard errors
    bool extended = true;  ///< also run the suboptimal-strategy and doubled-gamma runs
};

inline std::vector<double> terminal_utilities(const std::vector<double>& wealth, double gamma) {
    std::vector<double> u(wealth.size());
    std::transform(wealth.begin(), wealth.end(), u.begin(), [gamma](double w) { return -std::exp(-gamma * w); });
    return u;
}

/// Monte Carlo of the optimal strategies from t = 0, w_0 = 0: expected utility against
/// the closed-form value functions and terminal wealth moments against mu_W T and sigma_W^2 T.
inline std::vector<CheckResult> run_mc_checks(const ModelParams& p, const RiskPrefs& prefs, const ContractSpec& c1,
                                              const ContractSpec& c2, const McSpec& spec = {},
                                              const MarketState& init = {0.0, std::log(100.0), 0.0}) {
    SimConfig cfg;
    cfg.n_paths = spec.n_paths;
    cfg.n_steps = std::max<std::size_t>(1, static_cast<std::size_t>(
                                               std::ceil((prefs.horizon - init.t) * spec.steps_per_year - 1e-9)));
    cfg.seed = spec.seed;
    cfg.workers = spec.workers;
    cfg.record_paths = false;
    const double span = prefs.horizon - init.t;
    const std::string runs = "paths=" + std::to_string(cfg.n_paths) + " steps=" + std::to_string(cfg.n_steps);
    auto band = [&](const SampleStats& s) { return spec.band * s.se_mean; };

    std::vector<CheckResult> out;

    const auto single = simulate_wealth(p, prefs, {c1}, init, 0.0, cfg);
    const auto us = sample_stats(terminal_utilities(single.wealth_terminal, prefs.gamma));
    const double v_single = value_and_ce(0.0, phi_single(init.t, c1, p, prefs), prefs).value;
    out.push_back(comparison_check("mc.utility.single", us.mean, v_single, band(us), runs));

    const auto pair = simulate_wealth(p, prefs, {c1, c2}, init, 0.0, cfg);
    const auto up = sample_stats(terminal_utilities(pair.wealth_terminal, prefs.gamma));
    const double v_pair = value_and_ce(0.0, phi_pair(init.t, p, prefs), prefs).value;
    out.push_back(comparison_check("mc.utility.pair", up.mean, v_pair, band(up), runs));

    const auto wm = wealth_moments(p, prefs);
    const auto ws = sample_stats(pair.wealth_terminal);
    out.push_back(comparison_check("mc.wealth.mean", ws.mean, wm.mu_w * span, spec.band * ws.se_mean, runs));
    out.push_back(comparison_check("mc.wealth.variance", ws.variance, wm.sigma_w * wm.sigma_w * span,
                                   spec.band * ws.se_variance, runs));

    if (spec.extended) {
        // Half-size positions must do measurably worse than the optimum.
        const auto half = simulate_wealth(p, prefs, {c1, c2}, init, 0.0, cfg, 0.5);
        const auto uh = sample_stats(terminal_utilities(half.wealth_terminal, prefs.gamma));
        const double gap = v_pair - uh.mean;
        out.push_back({"mc.suboptimal.half_positions", gap > spec.band * uh.se_mean, gap, spec.band * uh.se_mean,
                       "passes when (closed-form value - MC utility of half positions) exceeds the band; " + runs});

        RiskPrefs doubled = prefs;
        doubled.gamma *= 2.0;
        const auto d = simulate_wealth(p, doubled, {c1, c2}, init, 0.0, cfg);
        const auto ud = sample_stats(terminal_utilities(d.wealth_terminal, doubled.gamma));
        const double v_d = value_and_ce(0.0, phi_pair(init.t, p, doubled), doubled).value;
        out.push_back(comparison_check("mc.utility.pair_gamma_doubled", ud.mean, v_d, band(ud), runs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Suite and report
// ---------------------------------------------------------------------------

struct SuiteOptions {
    Corruption corruption;
    McSpec mc;
    bool run_mc = true;
    std::size_t ode_grid = 1000;
    std::size_t pde_points = 200;
    std::size_t random_inputs = 100;
};

struct Report {
    std::vector<CheckResult> checks;
    std::vector<std::string> warnings;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
    std::size_t failures() const {
        return static_cast<std::size_t>(
            std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
    }
};

/// Runs every check in a fixed order.
inline Report run_suite(const ModelParams& p, const RiskPrefs& prefs, const ContractSpec& c1,
                        const ContractSpec& c2, const SuiteOptions& opt = {}) {
    validate(p);
    validate(prefs, {c1, c2});
    Report rep;
    if (std::abs(p.rho) > 0.9999)
        rep.warnings.push_back("|rho| > 0.9999: the (Z^s, Z^delta) system is near singular and the pair "
                               "formulas divide by 1 - rho^2");
    if (std::abs(c1.maturity - c2.maturity) < 1.0 / 365.0)
        rep.warnings.push_back("maturities less than a day apart: rho_12 is close to 1");

    auto append = [&](std::vector<CheckResult> v) {
        for (auto& c : v) rep.checks.push_back(std::move(c));
    };
    append(run_ode_checks(p, {c1, c2}, opt.ode_grid, opt.corruption));
    append(run_pde_checks(p, {c1, c2}, opt.pde_points, 7, opt.corruption));
    append(run_hjb_checks(p, prefs, c1, c2));
    rep.checks.push_back(run_dual_formula_check(opt.random_inputs));
    append(run_identity_checks(p, prefs, c1, c2));
    append(run_singularity_checks(p, opt.random_inputs));
    if (opt.run_mc) append(run_mc_checks(p, prefs, c1, c2, opt.mc));
    return rep;
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One row per check: name,status,observed,threshold,detail.
inline void write_report_csv(std::ostream& out, const Report& rep) {
    out << "name,status,observed,threshold,detail\n";
    for (const auto& c : rep.checks) {
        std::string detail = c.detail;
        std::replace(detail.begin(), detail.end(), '"', '\'');
        out << c.name << ',' << (c.passed ? "pass" : "fail") << ',' << format_number(c.observed) << ','
            << format_number(c.threshold) << ",\"" << detail << "\"\n";
    }
}

inline nlohmann::ordered_json report_json(const Report& rep) {
    nlohmann::ordered_json j;
    j["passed"] = rep.all_passed();
    j["total"] = rep.checks.size();
    j["failures"] = rep.failures();
    j["warnings"] = rep.warnings;
    auto& arr = j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : rep.checks)
        arr.push_back({{"name", c.name},
                       {"status", c.passed ? "pass" : "fail"},
                       {"observed", c.observed},
                       {"threshold", c.threshold},
                       {"detail", c.detail}});
    return j;
}

}  // namespace mfut::verify
