#pragma once

/**
 * @file app.hpp
 * @brief Backtests on settlement-price CSVs, parameter sweeps and
 *        certainty-equivalent tables behind the command-line front end.
 *
 * Day count for backtests is ACT/365 measured from the first CSV date,
 * which is t = 0. Maturity dates from the config use the same convention.
 */

#include "mfut/model.hpp"
#include "mfut/strategy.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace mfut::app {

inline constexpr double kDaysPerYear = 365.0;

/// Parses YYYY-MM-DD. Throws ValidationError on anything else.
inline std::chrono::sys_days parse_iso_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        throw ValidationError("not an ISO-8601 date (YYYY-MM-DD): '" + text + "'");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw ValidationError("invalid calendar date: '" + text + "'");
    return std::chrono::sys_days{ymd};
}

/// Year fraction between two dates, ACT/365.
inline double act365(std::chrono::sys_days from, std::chrono::sys_days to) {
    return static_cast<double>((to - from).count()) / kDaysPerYear;
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Backtest
// ---------------------------------------------------------------------------

struct BacktestRow {
    std::string date;
    double f1 = 0.0;
    double f2 = 0.0;
};

struct BacktestResult {
    std::string date;
    double t, f1, f2, pi1, pi2, pi_sum, cash1, cash2;
};

/// Reads a `date,F1,F2` CSV. Prices must be positive and dates strictly increasing.
inline std::vector<BacktestRow> read_backtest_csv(std::istream& in) {
    std::vector<BacktestRow> rows;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw ValidationError("backtest CSV line " + std::to_string(lineno) + ": " + why);
    };
    if (!std::getline(in, line)) throw ValidationError("backtest CSV is empty");
    ++lineno;
    if (detail::trim(line) != "date,F1,F2") fail("expected header 'date,F1,F2'");

    std::chrono::sys_days prev{};
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
            cells.push_back(detail::trim(line.substr(start, pos - start)));
        cells.push_back(detail::trim(line.substr(start)));
        if (cells.size() != 3) fail("expected 3 fields, got " + std::to_string(cells.size()));

        BacktestRow row;
        row.date = cells[0];
        std::chrono::sys_days day;
        try {
            day = parse_iso_date(row.date);
            row.f1 = detail::parse_double(cells[1], "F1");
            row.f2 = detail::parse_double(cells[2], "F2");
        } catch (const ValidationError& e) {
            fail(e.what());
        }
        if (!(row.f1 > 0.0) || !(row.f2 > 0.0) || !std::isfinite(row.f1) || !std::isfinite(row.f2))
            fail("prices must be positive");
        if (!rows.empty() && !(day > prev)) fail("dates must be strictly increasing");
        prev = day;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("backtest CSV has no data rows");
    return rows;
}

/// Contract maturities in year fractions from @p reference, preferring the T1_date/T2_date keys.
inline std::pair<ContractSpec, ContractSpec> resolve_maturities(const Config& cfg, std::chrono::sys_days reference) {
    ContractSpec c1 = cfg.c1, c2 = cfg.c2;
    if (cfg.t1_date) c1.maturity = act365(reference, parse_iso_date(*cfg.t1_date));
    if (cfg.t2_date) c2.maturity = act365(reference, parse_iso_date(*cfg.t2_date));
    return {c1, c2};
}

/// Optimal pair positions for every row, parameters held fixed over the window.
/// The trading horizon is taken to be the near maturity.
inline std::vector<BacktestResult> run_backtest(const Config& cfg, const std::vector<BacktestRow>& rows) {
    validate(cfg.params);
    if (rows.empty()) throw ValidationError("no backtest rows");
    const auto t0 = parse_iso_date(rows.front().date);
    const auto [c1, c2] = resolve_maturities(cfg, t0);
    if (!(c1.maturity < c2.maturity)) throw ValidationError("backtest requires T1 < T2");
    RiskPrefs prefs{cfg.prefs.gamma, c1.maturity};
    validate(prefs, {c1, c2});

    std::vector<BacktestResult> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const double t = act365(t0, parse_iso_date(row.date));
        if (!(t < c1.maturity))
            throw ValidationError("backtest date " + row.date + " is not before the near-contract maturity");
        const auto s = pair_position(t, row.f1, row.f2, c1, c2, cfg.params, prefs);
        out.push_back({row.date, t, row.f1, row.f2, s.positions[0], s.positions[1],
                       s.positions[0] + s.positions[1], s.cash_exposures[0], s.cash_exposures[1]});
    }
    return out;
}

inline void write_backtest_csv(std::ostream& out, const std::vector<BacktestResult>& rows) {
    out << "date,t,F1,F2,pi1,pi2,pi_sum,cash1,cash2\n";
    for (const auto& r : rows)
        out << r.date << ',' << format_number(r.t) << ',' << format_number(r.f1) << ',' << format_number(r.f2)
            << ',' << format_number(r.pi1) << ',' << format_number(r.pi2) << ',' << format_number(r.pi_sum) << ','
            << format_number(r.cash1) << ',' << format_number(r.cash2) << '\n';
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> v = {"eta_bar", "eta", "gamma", "lambda", "T1", "T2"};
    return v;
}

inline const std::vector<std::string>& sweep_outputs() {
    static const std::vector<std::string> v = {"pi1",         "pi2",         "pi1_single", "pi2_single", "ce_pair",
                                               "ce_single_1", "ce_single_2", "mu_w",       "sigma_w"};
    return v;
}

struct SweepSpec {
    std::string parameter;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 2;
    std::vector<std::string> outputs{"pi1", "pi2"};
    double f1 = 100.0;
    double f2 = 100.0;
    double t = 0.0;  ///< evaluation time for positions; certainty equivalents use t as well
};

struct SweepTable {
    std::vector<std::string> columns;  ///< outputs, in requested order
    std::vector<double> param_values;
    std::vector<std::vector<double>> rows;
};

inline Config apply_sweep_value(Config cfg, const std::string& param, double v) {
    set_config_value(cfg, param, format_number(v));
    return cfg;
}

inline void validate_sweep_point(const Config& cfg, double t) {
    validate(cfg.params);
    validate(cfg.prefs, {cfg.c1, cfg.c2});
    mfut::detail::require_distinct(cfg.c1, cfg.c2);
    if (!(t >= 0.0 && t <= cfg.prefs.horizon)) throw ValidationError("sweep time must lie in [0, horizon]");
}

/// Evaluates the requested outputs on an even grid of the swept parameter.
/// Every grid point is validated before anything is evaluated.
inline SweepTable run_sweep(const Config& base, const SweepSpec& spec) {
    const auto& params = sweep_parameters();
    if (std::find(params.begin(), params.end(), spec.parameter) == params.end())
        throw ValidationError("cannot sweep '" + spec.parameter + "'");
    if (!(spec.lo < spec.hi)) throw ValidationError("sweep requires lo < hi");
    if (spec.n < 2) throw ValidationError("sweep requires n >= 2");
    if (spec.outputs.empty()) throw ValidationError("sweep requires at least one output");
    for (const auto& o : spec.outputs)
        if (std::find(sweep_outputs().begin(), sweep_outputs().end(), o) == sweep_outputs().end())
            throw ValidationError("unknown sweep output '" + o + "'");
    mfut::detail::require_positive_price(spec.f1, "F1");
    mfut::detail::require_positive_price(spec.f2, "F2");

    SweepTable table;
    table.columns = spec.outputs;
    std::vector<Config> points;
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double v = i + 1 == spec.n ? spec.hi
                                         : spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) /
                                                         static_cast<double>(spec.n - 1);
        auto cfg = apply_sweep_value(base, spec.parameter, v);
        try {
            validate_sweep_point(cfg, spec.t);
        } catch (const ValidationError& e) {
            throw ValidationError("sweep point " + spec.parameter + "=" + format_number(v) + ": " + e.what());
        }
        table.param_values.push_back(v);
        points.push_back(std::move(cfg));
    }

    for (const auto& cfg : points) {
        std::vector<double> row;
        const auto& p = cfg.params;
        const auto& pr = cfg.prefs;
        for (const auto& o : spec.outputs) {
            double v = 0.0;
            if (o == "pi1") v = pair_position(spec.t, spec.f1, spec.f2, cfg.c1, cfg.c2, p, pr).positions[0];
            else if (o == "pi2") v = pair_position(spec.t, spec.f1, spec.f2, cfg.c1, cfg.c2, p, pr).positions[1];
            else if (o == "pi1_single") v = single_position(spec.t, spec.f1, cfg.c1, p, pr).positions[0];
            else if (o == "pi2_single") v = single_position(spec.t, spec.f2, cfg.c2, p, pr).positions[0];
            else if (o == "ce_pair") v = value_and_ce(0.0, phi_pair(spec.t, p, pr), pr).certainty_equivalent;
            else if (o == "ce_single_1")
                v = value_and_ce(0.0, phi_single(spec.t, cfg.c1, p, pr), pr).certainty_equivalent;
            else if (o == "ce_single_2")
                v = value_and_ce(0.0, phi_single(spec.t, cfg.c2, p, pr), pr).certainty_equivalent;
            else if (o == "mu_w") v = wealth_moments(p, pr).mu_w;
            else if (o == "sigma_w") v = wealth_moments(p, pr).sigma_w;
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline void write_sweep_csv(std::ostream& out, const SweepTable& table) {
    out << "param_value";
    for (const auto& c : table.columns) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        out << format_number(table.param_values[i]);
        for (double v : table.rows[i]) out << ',' << format_number(v);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Certainty equivalents
// ---------------------------------------------------------------------------

struct CeTable {
    double ce_pair = 0.0;      ///< C_0(0), both contracts
    double ce_single_1 = 0.0;  ///< T1 contract alone
    double ce_single_2 = 0.0;  ///< T2 contract alone
};

/// Certainty equivalents at t = 0 and zero wealth.
inline CeTable ce_table(const Config& cfg) {
    validate(cfg.params);
    validate(cfg.prefs, {cfg.c1, cfg.c2});
    const auto& p = cfg.params;
    const auto& pr = cfg.prefs;
    return {value_and_ce(0.0, phi_pair(0.0, p, pr), pr).certainty_equivalent,
            value_and_ce(0.0, phi_single(0.0, cfg.c1, p, pr), pr).certainty_equivalent,
            value_and_ce(0.0, phi_single(0.0, cfg.c2, p, pr), pr).certainty_equivalent};
}

inline void write_ce_csv(std::ostream& out, const CeTable& t) {
    out << "ce_pair,ce_single_1,ce_single_2\n"
        << format_number(t.ce_pair) << ',' << format_number(t.ce_single_1) << ',' << format_number(t.ce_single_2)
        << '\n';
}

/// Fully resolved configuration for provenance blocks in JSON summaries.
inline nlohmann::ordered_json config_json(const Config& cfg) {
    nlohmann::ordered_json j;
    j["mu"] = cfg.params.mu;
    j["kappa"] = cfg.params.kappa;
    j["alpha"] = cfg.params.alpha;
    j["eta"] = cfg.params.eta;
    j["eta_bar"] = cfg.params.eta_bar;
    j["rho"] = cfg.params.rho;
    j["lambda"] = cfg.params.lambda;
    j["r"] = cfg.params.r;
    j["gamma"] = cfg.prefs.gamma;
    j["horizon"] = cfg.prefs.horizon;
    j["T1"] = cfg.c1.maturity;
    j["T2"] = cfg.c2.maturity;
    if (cfg.t1_date) j["T1_date"] = *cfg.t1_date;
    if (cfg.t2_date) j["T2_date"] = *cfg.t2_date;
    return j;
}

}  // namespace mfut::app
