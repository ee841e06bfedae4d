#pragma once

/**
 * @file model.hpp
 * @brief Parameter and contract types for the two-factor stochastic
 *        convenience-yield commodity model.
 *
 * Physical-measure dynamics of the log spot X and convenience yield delta:
 *   dX     = (mu - eta^2/2 - delta) dt + eta dZ^s
 *   ddelta = kappa (alpha - delta) dt + eta_bar dZ^delta,   d<Z^s,Z^delta> = rho dt
 *
 * Under the pricing measure the convenience yield reverts to
 * alpha_tilde = alpha - lambda / kappa and the spot drifts at r.
 *
 * All times are absolute year fractions on one clock: t = 0 is "now",
 * contract maturities and the trading horizon are measured from it.
 */

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfut {

/// Raised when an input violates a model constraint. The message names the constraint.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Smallest admissible mean-reversion speed; B(t) and alpha_tilde divide by kappa.
inline constexpr double kKappaMin = 1e-8;

struct ModelParams {
    double mu = 0.010;       ///< drift of log spot under P (1/year)
    double kappa = 0.800;    ///< mean-reversion speed of the convenience yield (1/year)
    double alpha = 0.0;      ///< P-measure equilibrium convenience yield (1/year)
    double eta = 0.450;      ///< spot volatility (1/sqrt(year))
    double eta_bar = 0.500;  ///< convenience-yield volatility (1/sqrt(year))
    double rho = 0.750;      ///< correlation of the two Brownian drivers
    double lambda = 0.050;   ///< market price of convenience-yield risk (1/year)
    double r = 0.001;        ///< risk-free rate (1/year)

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Estimated parameter set used throughout the numerical examples (alpha unstated, set to 0).
inline ModelParams default_params() { return ModelParams{}; }

struct ContractSpec {
    double maturity = 0.0;  ///< absolute maturity T_i (year fraction)

    friend bool operator==(const ContractSpec&, const ContractSpec&) = default;
};

struct RiskPrefs {
    double gamma = 0.01;   ///< absolute risk aversion in U(w) = -exp(-gamma w)
    double horizon = 1.0;  ///< trading horizon T

    friend bool operator==(const RiskPrefs&, const RiskPrefs&) = default;
};

/// Snapshot (t, X_t, delta_t). The spot price is exp(x) and is never stored.
struct MarketState {
    double t = 0.0;
    double x = 0.0;
    double delta = 0.0;

    double spot() const { return std::exp(x); }
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace detail

/// Checks every parameter constraint and returns the parameters unchanged.
/// With @p allow_zero_noise the eta/eta_bar positivity checks become
/// non-negativity checks; only the noise-free simulator tests use it.
inline const ModelParams& validate(const ModelParams& p, bool allow_zero_noise = false) {
    using detail::require;
    require(std::isfinite(p.mu) && std::isfinite(p.alpha) && std::isfinite(p.lambda),
            "mu, alpha and lambda must be finite");
    require(std::isfinite(p.kappa) && p.kappa > kKappaMin, "kappa must exceed 1e-8");
    if (allow_zero_noise) {
        require(std::isfinite(p.eta) && p.eta >= 0.0, "eta must be non-negative");
        require(std::isfinite(p.eta_bar) && p.eta_bar >= 0.0, "eta_bar must be non-negative");
    } else {
        require(std::isfinite(p.eta) && p.eta > 0.0, "eta must be positive");
        require(std::isfinite(p.eta_bar) && p.eta_bar > 0.0, "eta_bar must be positive");
    }
    require(std::isfinite(p.rho) && p.rho > -1.0 && p.rho < 1.0,
            "rho must lie strictly in (-1,1)");
    require(std::isfinite(p.r) && p.r >= 0.0, "r must be non-negative");
    return p;
}

inline const ContractSpec& validate(const ContractSpec& c) {
    detail::require(std::isfinite(c.maturity) && c.maturity >= 0.0,
                    "contract maturity must be non-negative");
    return c;
}

/// Validates gamma and checks that the horizon ends no later than any traded contract.
inline const RiskPrefs& validate(const RiskPrefs& prefs, const std::vector<ContractSpec>& contracts) {
    using detail::require;
    require(std::isfinite(prefs.gamma) && prefs.gamma > 0.0, "gamma must be positive");
    require(std::isfinite(prefs.horizon) && prefs.horizon >= 0.0, "horizon must be non-negative");
    for (const auto& c : contracts) {
        validate(c);
        require(prefs.horizon <= c.maturity, "horizon must not exceed any contract maturity");
    }
    return prefs;
}

inline const MarketState& validate(const MarketState& s) {
    detail::require(std::isfinite(s.t) && s.t >= 0.0, "state time must be non-negative");
    detail::require(std::isfinite(s.x) && std::isfinite(s.delta), "state x and delta must be finite");
    return s;
}

/// Risk-neutral equilibrium convenience yield, alpha - lambda / kappa.
inline double alpha_tilde(const ModelParams& p) { return p.alpha - p.lambda / p.kappa; }

// ---------------------------------------------------------------------------
// Flat key-value configuration
// ---------------------------------------------------------------------------

/// Resolved run configuration. Maturities are either year fractions (T1/T2)
/// or ISO dates (T1_date/T2_date) converted later against a reference date.
struct Config {
    ModelParams params;
    RiskPrefs prefs;
    ContractSpec c1{13.0 / 12.0};
    ContractSpec c2{14.0 / 12.0};
    std::optional<std::string> t1_date;
    std::optional<std::string> t2_date;

    friend bool operator==(const Config&, const Config&) = default;
};

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "mu", "kappa", "alpha", "eta", "eta_bar", "rho", "lambda", "r",
        "gamma", "horizon", "T1", "T2", "T1_date", "T2_date"};
    return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& key) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': not a number: '" + text + "'");
    }
    if (used != text.size())
        throw ValidationError("config key '" + key + "': trailing characters in '" + text + "'");
    return v;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace detail

/// Applies one `key = value` assignment. Unknown keys are rejected.
inline void set_config_value(Config& cfg, const std::string& key, const std::string& raw) {
    const std::string value = detail::trim(raw);
    auto num = [&] { return detail::parse_double(value, key); };
    if (key == "mu") cfg.params.mu = num();
    else if (key == "kappa") cfg.params.kappa = num();
    else if (key == "alpha") cfg.params.alpha = num();
    else if (key == "eta") cfg.params.eta = num();
    else if (key == "eta_bar") cfg.params.eta_bar = num();
    else if (key == "rho") cfg.params.rho = num();
    else if (key == "lambda") cfg.params.lambda = num();
    else if (key == "r") cfg.params.r = num();
    else if (key == "gamma") cfg.prefs.gamma = num();
    else if (key == "horizon") cfg.prefs.horizon = num();
    else if (key == "T1") cfg.c1.maturity = num();
    else if (key == "T2") cfg.c2.maturity = num();
    else if (key == "T1_date") cfg.t1_date = value;
    else if (key == "T2_date") cfg.t2_date = value;
    else throw ValidationError("unknown config key '" + key + "'");
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Keys not set keep their defaults (the estimated parameter set, gamma 0.01,
/// horizon 1, T1 = 13/12, T2 = 14/12).
inline Config parse_config(std::istream& in) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return cfg;
}

inline Config parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

/// Writes every key, numbers in shortest round-trip form.
inline std::string serialize_config(const Config& cfg) {
    using detail::format_double;
    std::ostringstream out;
    out << "mu = " << format_double(cfg.params.mu) << '\n'
        << "kappa = " << format_double(cfg.params.kappa) << '\n'
        << "alpha = " << format_double(cfg.params.alpha) << '\n'
        << "eta = " << format_double(cfg.params.eta) << '\n'
        << "eta_bar = " << format_double(cfg.params.eta_bar) << '\n'
        << "rho = " << format_double(cfg.params.rho) << '\n'
        << "lambda = " << format_double(cfg.params.lambda) << '\n'
        << "r = " << format_double(cfg.params.r) << '\n'
        << "gamma = " << format_double(cfg.prefs.gamma) << '\n'
        << "horizon = " << format_double(cfg.prefs.horizon) << '\n'
        << "T1 = " << format_double(cfg.c1.maturity) << '\n'
        << "T2 = " << format_double(cfg.c2.maturity) << '\n';
    if (cfg.t1_date) out << "T1_date = " << *cfg.t1_date << '\n';
    if (cfg.t2_date) out << "T2_date = " << *cfg.t2_date << '\n';
    return out.str();
}

}  // namespace mfut
