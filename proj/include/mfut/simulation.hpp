#pragma once

/**
 * @file simulation.hpp
 * @brief Monte Carlo paths of (X, delta), futures prices and self-financing wealth.
 *
 * (X, delta) is advanced with its exact jointly Gaussian transition, so the
 * state has no discretization error at any step size. Wealth is rebalanced
 * once per step: the position chosen at t_k is marked to the realized
 * futures change over [t_k, t_{k+1}], with no interest on cash.
 *
 * Every path draws from its own generator seeded from (seed, path index),
 * so results do not depend on how paths are split across workers.
 */

#include "mfut/model.hpp"
#include "mfut/pricing.hpp"
#include "mfut/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

namespace mfut {

enum class Measure { P, Q };

struct SimConfig {
    std::size_t n_paths = 1;
    std::size_t n_steps = 500;
    std::uint64_t seed = 42;
    Measure measure = Measure::P;
    double horizon = 1.0;       ///< end of the time grid (absolute)
    unsigned workers = 1;
    bool record_paths = true;   ///< false keeps terminal values only
    bool allow_zero_noise = false;

    double dt(double t0) const { return (horizon - t0) / static_cast<double>(n_steps); }
};

/// Grid steps per year of horizon used unless a caller asks otherwise.
inline constexpr std::size_t kDefaultStepsPerYear = 500;

inline std::size_t default_steps(double span) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span * kDefaultStepsPerYear - 1e-9)));
}

/// Row-major (path, step) matrix.
struct PathMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    PathMatrix() = default;
    PathMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    bool empty() const { return data.empty(); }

    friend bool operator==(const PathMatrix&, const PathMatrix&) = default;
};

struct PathSet {
    std::vector<double> times;
    std::vector<ContractSpec> contracts;
    // Full paths, populated when SimConfig::record_paths is set.
    PathMatrix x_paths;
    PathMatrix delta_paths;
    std::vector<PathMatrix> futures_paths;
    std::optional<PathMatrix> wealth_paths;
    // Terminal values, always populated.
    std::vector<double> x_terminal;
    std::vector<double> delta_terminal;
    std::vector<std::vector<double>> futures_terminal;
    std::vector<double> wealth_terminal;

    std::size_t n_paths() const { return x_terminal.size(); }
    std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }

    friend bool operator==(const PathSet&, const PathSet&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) {
    return splitmix64(splitmix64(seed) ^ splitmix64(path + 0x632be59bd9b4e019ULL));
}

/// u + expm1(-u) = int_0^u (1 - e^{-v}) dv, by series for small u.
inline double int_one_minus_exp(double u) {
    if (u > 0.1) return u + std::expm1(-u);
    double term = -u, sum = 0.0;  // (-u)^n / n!, n >= 2
    for (int n = 2; n < 20; ++n) {
        term *= -u / n;
        sum += term;
    }
    return sum;
}

/// int_0^u (1 - e^{-v})^2 dv, by series for small u.
inline double int_one_minus_exp_sq(double u) {
    if (u > 0.1) return u + 2.0 * std::expm1(-u) - 0.5 * std::expm1(-2.0 * u);
    double pow_fact = u * u / 2.0, sum = 0.0;  // u^n / n!
    for (int n = 3; n < 22; ++n) {
        pow_fact *= u / n;
        const double coeff = (std::ldexp(1.0, n - 1) - 2.0) * ((n % 2) ? 1.0 : -1.0);
        sum += coeff * pow_fact;
    }
    return sum;
}

/// Exact one-step transition of (X, delta) over a step h under the chosen measure.
struct ExactTransition {
    double decay = 1.0;      // e^{-kappa h}
    double theta = 0.0;      // equilibrium convenience yield
    double x_drift = 0.0;    // (d0 - theta) h
    double x_on_dev = 0.0;   // coefficient on (delta - theta) in the X mean
    double l11 = 0.0, l21 = 0.0, l22 = 0.0;

    ExactTransition(const ModelParams& p, Measure m, double h) {
        const double k = p.kappa;
        const double u = k * h;
        theta = (m == Measure::P) ? p.alpha : alpha_tilde(p);
        const double d0 = ((m == Measure::P) ? p.mu : p.r) - 0.5 * p.eta * p.eta;
        decay = std::exp(-u);
        const double one_minus_e = -std::expm1(-u);
        x_drift = (d0 - theta) * h;
        x_on_dev = -one_minus_e / k;

        const double eb2 = p.eta_bar * p.eta_bar;
        const double var_d = eb2 * (-std::expm1(-2.0 * u)) / (2.0 * k);
        const double j1 = int_one_minus_exp(u) / k;     // int_0^h (1 - e^{-k v}) dv
        const double j2 = int_one_minus_exp_sq(u) / k;  // int_0^h (1 - e^{-k v})^2 dv
        const double var_x = p.eta * p.eta * h + eb2 * j2 / (k * k) - 2.0 * p.rho * p.eta * p.eta_bar * j1 / k;
        // int_0^h e^{-k v} (1 - e^{-k v}) dv = (1-e)/k - (1-e^2)/(2k)
        const double mixed = 0.5 * one_minus_e * one_minus_e / k;
        const double cov = p.rho * p.eta * p.eta_bar * one_minus_e / k - eb2 * mixed / k;

        l11 = std::sqrt(std::max(var_d, 0.0));
        l21 = l11 > 0.0 ? cov / l11 : 0.0;
        l22 = std::sqrt(std::max(var_x - l21 * l21, 0.0));
    }

    void advance(double& x, double& delta, double z1, double z2) const {
        const double dev = delta - theta;
        x += x_drift + x_on_dev * dev + l21 * z1 + l22 * z2;
        delta = theta + dev * decay + l11 * z1;
    }
};

struct WealthPlan {
    std::vector<std::vector<double>> cash;  // [contract][step], pi_i * F_i at t_k
};

template <typename Fn>
void parallel_paths(std::size_t n_paths, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n_paths, 1))));
    if (workers == 1) {
        fn(std::size_t{0}, n_paths);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

inline PathSet simulate_impl(const ModelParams& params, const MarketState& init, const SimConfig& cfg,
                             const std::vector<ContractSpec>& contracts, const WealthPlan* plan, double w0) {
    validate(params, cfg.allow_zero_noise);
    validate(init);
    if (cfg.n_paths < 1 || cfg.n_steps < 1) throw ValidationError("n_paths and n_steps must be at least 1");
    if (!(cfg.horizon > init.t)) throw ValidationError("simulation horizon must be after the initial time");
    for (const auto& c : contracts)
        if (!(cfg.horizon <= c.maturity))
            throw ValidationError("simulation horizon must not exceed any contract maturity");

    const std::size_t n = cfg.n_paths, steps = cfg.n_steps, nc = contracts.size();
    const double h = cfg.dt(init.t);
    const ExactTransition tr(params, cfg.measure, h);

    PathSet out;
    out.contracts = contracts;
    out.times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) out.times[k] = init.t + h * static_cast<double>(k);
    out.times.back() = cfg.horizon;

    // A_i, B_i on the grid; futures prices are exp(x + A + B delta) pointwise.
    std::vector<std::vector<double>> a(nc, std::vector<double>(steps + 1)), b = a;
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t k = 0; k <= steps; ++k) {
            a[i][k] = a_coeff(out.times[k], contracts[i], params);
            b[i][k] = b_coeff(out.times[k], contracts[i], params);
        }
    auto price = [&](std::size_t i, std::size_t k, double x, double d) {
        return out.times[k] == contracts[i].maturity ? std::exp(x) : std::exp(x + a[i][k] + b[i][k] * d);
    };

    if (cfg.record_paths) {
        out.x_paths = PathMatrix(n, steps + 1);
        out.delta_paths = PathMatrix(n, steps + 1);
        out.futures_paths.assign(nc, PathMatrix(n, steps + 1));
        if (plan) out.wealth_paths = PathMatrix(n, steps + 1);
    }
    out.x_terminal.resize(n);
    out.delta_terminal.resize(n);
    out.futures_terminal.assign(nc, std::vector<double>(n));
    if (plan) out.wealth_terminal.resize(n);

    auto run = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> f(nc), f_next(nc);
        for (std::size_t path = lo; path < hi; ++path) {
            std::mt19937_64 rng(path_seed(cfg.seed, path));
            std::normal_distribution<double> normal;
            double x = init.x, d = init.delta, w = w0;
            for (std::size_t i = 0; i < nc; ++i) f[i] = price(i, 0, x, d);
            auto record = [&](std::size_t k) {
                if (!cfg.record_paths) return;
                out.x_paths(path, k) = x;
                out.delta_paths(path, k) = d;
                for (std::size_t i = 0; i < nc; ++i) out.futures_paths[i](path, k) = f[i];
                if (plan) (*out.wealth_paths)(path, k) = w;
            };
            record(0);
            for (std::size_t k = 0; k < steps; ++k) {
                const double z1 = normal(rng);
                const double z2 = normal(rng);
                tr.advance(x, d, z1, z2);
                for (std::size_t i = 0; i < nc; ++i) f_next[i] = price(i, k + 1, x, d);
                if (plan)
                    for (std::size_t i = 0; i < nc; ++i) w += plan->cash[i][k] / f[i] * (f_next[i] - f[i]);
                f.swap(f_next);
                record(k + 1);
            }
            out.x_terminal[path] = x;
            out.delta_terminal[path] = d;
            for (std::size_t i = 0; i < nc; ++i) out.futures_terminal[i][path] = f[i];
            if (plan) out.wealth_terminal[path] = w;
        }
    };
    parallel_paths(n, cfg.workers, run);
    return out;
}

}  // namespace detail

/// Simulates (X, delta) and the prices of @p contracts on a uniform grid from init.t to cfg.horizon.
inline PathSet simulate_state(const ModelParams& params, const MarketState& init, const SimConfig& cfg,
                              const std::vector<ContractSpec>& contracts = {}) {
    return detail::simulate_impl(params, init, cfg, contracts, nullptr, 0.0);
}

/// Simulates the self-financing wealth of the optimal strategy on one contract
/// (single-contract control) or two (pair control), over [init.t, prefs.horizon].
/// cfg.horizon is replaced by prefs.horizon. @p strategy_scale multiplies every
/// position and exists to measure the cost of a deliberately suboptimal strategy.
inline PathSet simulate_wealth(const ModelParams& params, const RiskPrefs& prefs,
                               const std::vector<ContractSpec>& contracts, const MarketState& init, double w0,
                               SimConfig cfg, double strategy_scale = 1.0) {
    if (cfg.measure != Measure::P)
        throw ValidationError("wealth simulation requires the physical measure P");
    if (contracts.size() != 1 && contracts.size() != 2)
        throw ValidationError("wealth simulation trades one or two contracts");
    validate(prefs, contracts);
    cfg.horizon = prefs.horizon;
    if (!(cfg.horizon > init.t)) throw ValidationError("simulation horizon must be after the initial time");

    const double h = cfg.dt(init.t);
    detail::WealthPlan plan;
    plan.cash.assign(contracts.size(), std::vector<double>(cfg.n_steps, 0.0));
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
        const double t = init.t + h * static_cast<double>(k);
        const auto s = contracts.size() == 1
                           ? single_position(t, 1.0, contracts[0], params, prefs)
                           : pair_position(t, 1.0, 1.0, contracts[0], contracts[1], params, prefs);
        for (std::size_t i = 0; i < contracts.size(); ++i) plan.cash[i][k] = strategy_scale * s.cash_exposures[i];
    }
    return detail::simulate_impl(params, init, cfg, contracts, &plan, w0);
}

/// CSV with columns path,step,t,x,delta,F1[,F2][,wealth]; 17 significant digits.
inline void write_paths_csv(std::ostream& out, const PathSet& ps) {
    if (ps.x_paths.empty()) throw ValidationError("path set has no recorded paths");
    out << "path,step,t,x,delta";
    for (std::size_t i = 0; i < ps.futures_paths.size(); ++i) out << ",F" << (i + 1);
    if (ps.wealth_paths) out << ",wealth";
    out << '\n';
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
    };
    for (std::size_t p = 0; p < ps.x_paths.rows; ++p)
        for (std::size_t k = 0; k < ps.times.size(); ++k) {
            out << p << ',' << k;
            put(ps.times[k]);
            put(ps.x_paths(p, k));
            put(ps.delta_paths(p, k));
            for (const auto& fm : ps.futures_paths) put(fm(p, k));
            if (ps.wealth_paths) put((*ps.wealth_paths)(p, k));
            out << '\n';
        }
}

}  // namespace mfut
