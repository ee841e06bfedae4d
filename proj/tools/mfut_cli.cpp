// Command-line front end: backtest, sweep, ce, simulate, verify.
//
// Exit codes: 0 success, 1 validation error, 2 verification failure.

#include "mfut/app.hpp"
#include "mfut/simulation.hpp"
#include "mfut/verification.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitValidation = 1;
constexpr int kExitVerification = 2;

struct GlobalOptions {
    std::string config_path;
    std::vector<std::string> overrides;
};

mfut::Config load_config(const GlobalOptions& g) {
    mfut::Config cfg;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw mfut::ValidationError("cannot open config file '" + g.config_path + "'");
        cfg = mfut::parse_config(in);
    }
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw mfut::ValidationError("--set expects key=value, got '" + kv + "'");
        mfut::set_config_value(cfg, mfut::detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
    }
    return cfg;
}

/// Writes @p text to @p path, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mfut::ValidationError("cannot write '" + path + "'");
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

struct BacktestOptions {
    std::string csv;
    std::string out;
    std::string summary;
};

int cmd_backtest(const GlobalOptions& g, const BacktestOptions& o) {
    const auto cfg = load_config(g);
    std::ifstream in(o.csv);
    if (!in) throw mfut::ValidationError("cannot open backtest CSV '" + o.csv + "'");
    const auto rows = mfut::app::read_backtest_csv(in);
    const auto results = mfut::app::run_backtest(cfg, rows);

    std::ostringstream csv;
    mfut::app::write_backtest_csv(csv, results);
    emit(o.out, csv.str());

    if (!o.summary.empty()) {
        const auto t0 = mfut::app::parse_iso_date(rows.front().date);
        const auto [c1, c2] = mfut::app::resolve_maturities(cfg, t0);
        json j;
        j["command"] = "backtest";
        j["config"] = mfut::app::config_json(cfg);
        j["day_count"] = "ACT/365 from first CSV date";
        j["reference_date"] = rows.front().date;
        j["T1_years"] = c1.maturity;
        j["T2_years"] = c2.maturity;
        j["rows"] = results.size();
        emit(o.summary, dump(j));
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
    mfut::app::SweepSpec spec;
    std::string outputs = "pi1,pi2";
    std::string out;
    std::string summary;
};

int cmd_sweep(const GlobalOptions& g, SweepOptions o) {
    const auto cfg = load_config(g);
    o.spec.outputs.clear();
    std::stringstream ss(o.outputs);
    for (std::string item; std::getline(ss, item, ',');)
        if (!mfut::detail::trim(item).empty()) o.spec.outputs.push_back(mfut::detail::trim(item));
    const auto table = mfut::app::run_sweep(cfg, o.spec);

    std::ostringstream csv;
    mfut::app::write_sweep_csv(csv, table);
    emit(o.out, csv.str());
    if (!o.summary.empty()) {
        json j;
        j["command"] = "sweep";
        j["config"] = mfut::app::config_json(cfg);
        j["parameter"] = o.spec.parameter;
        j["lo"] = o.spec.lo;
        j["hi"] = o.spec.hi;
        j["n"] = o.spec.n;
        j["outputs"] = o.spec.outputs;
        j["F1"] = o.spec.f1;
        j["F2"] = o.spec.f2;
        j["t"] = o.spec.t;
        emit(o.summary, dump(j));
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct CeOptions {
    std::string out;
    std::string summary;
};

int cmd_ce(const GlobalOptions& g, const CeOptions& o) {
    const auto cfg = load_config(g);
    const auto t = mfut::app::ce_table(cfg);
    std::ostringstream csv;
    mfut::app::write_ce_csv(csv, t);
    emit(o.out, csv.str());
    if (!o.summary.empty()) {
        json j;
        j["command"] = "ce";
        j["config"] = mfut::app::config_json(cfg);
        j["t"] = 0.0;
        j["w"] = 0.0;
        j["ce_pair"] = t.ce_pair;
        j["ce_single_1"] = t.ce_single_1;
        j["ce_single_2"] = t.ce_single_2;
        emit(o.summary, dump(j));
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::size_t paths = 1000;
    std::size_t steps = 0;  // 0: 500 per year of horizon
    std::uint64_t seed = 42;
    std::string measure = "P";
    int contracts = 2;
    double w0 = 0.0;
    double f0 = 100.0;  // initial spot price
    double delta0 = 0.0;
    unsigned workers = 1;
    double max_cells = 2e7;
    std::string out;
    std::string summary;
};

json stats_json(const std::vector<double>& v) {
    const auto s = mfut::verify::sample_stats(v);
    return {{"mean", s.mean}, {"variance", s.variance}, {"se_mean", s.se_mean}, {"se_variance", s.se_variance}};
}

int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o) {
    const auto cfg = load_config(g);
    mfut::validate(cfg.params);
    if (o.contracts != 1 && o.contracts != 2) throw mfut::ValidationError("--contracts must be 1 or 2");
    if (o.measure != "P" && o.measure != "Q") throw mfut::ValidationError("--measure must be P or Q");
    if (!(o.f0 > 0.0)) throw mfut::ValidationError("--spot must be positive");

    std::vector<mfut::ContractSpec> contracts{cfg.c1};
    if (o.contracts == 2) contracts.push_back(cfg.c2);
    mfut::validate(cfg.prefs, contracts);

    mfut::SimConfig sc;
    sc.n_paths = o.paths;
    sc.n_steps = o.steps ? o.steps : mfut::default_steps(cfg.prefs.horizon);
    sc.seed = o.seed;
    sc.measure = o.measure == "P" ? mfut::Measure::P : mfut::Measure::Q;
    sc.horizon = cfg.prefs.horizon;
    sc.workers = o.workers;
    sc.record_paths = !o.out.empty();
    if (sc.n_paths < 1 || sc.n_steps < 1) throw mfut::ValidationError("--paths and --steps must be at least 1");
    const double cells = static_cast<double>(sc.n_paths) * static_cast<double>(sc.n_steps + 1);
    if (sc.record_paths && cells > o.max_cells)
        throw mfut::ValidationError("recording " + std::to_string(static_cast<long long>(cells)) +
                                    " path cells exceeds --max-cells; lower --paths or --steps, raise --max-cells, "
                                    "or omit --out to keep terminal values only");

    const mfut::MarketState init{0.0, std::log(o.f0), o.delta0};
    const auto ps = sc.measure == mfut::Measure::P
                        ? mfut::simulate_wealth(cfg.params, cfg.prefs, contracts, init, o.w0, sc)
                        : mfut::simulate_state(cfg.params, init, sc, contracts);

    if (sc.record_paths) {
        std::ostringstream csv;
        mfut::write_paths_csv(csv, ps);
        emit(o.out, csv.str());
    }

    json j;
    j["command"] = "simulate";
    j["config"] = mfut::app::config_json(cfg);
    j["paths"] = sc.n_paths;
    j["steps"] = sc.n_steps;
    j["seed"] = sc.seed;
    j["measure"] = o.measure;
    j["contracts"] = o.contracts;
    j["w0"] = o.w0;
    j["spot0"] = o.f0;
    j["delta0"] = o.delta0;

    auto& fut = j["futures_terminal"] = json::array();
    for (std::size_t i = 0; i < contracts.size(); ++i) {
        auto s = stats_json(ps.futures_terminal[i]);
        s["price_at_t0"] = mfut::futures_price(init, contracts[i], cfg.params);
        fut.push_back(s);
    }

    if (sc.measure == mfut::Measure::P) {
        std::vector<double> gain(ps.wealth_terminal.size());
        for (std::size_t i = 0; i < gain.size(); ++i) gain[i] = ps.wealth_terminal[i] - o.w0;
        const auto s = mfut::verify::sample_stats(gain);
        const double span = cfg.prefs.horizon - init.t;
        double mean_exact = 0.0, var_exact = 0.0;
        if (o.contracts == 2) {
            const auto wm = mfut::wealth_moments(cfg.params, cfg.prefs);
            mean_exact = wm.mu_w * span;
            var_exact = wm.sigma_w * wm.sigma_w * span;
        } else {
            // Single-contract wealth is Gaussian with mean 2 Phi/gamma and variance 2 Phi/gamma^2.
            const double phi = mfut::phi_single(init.t, cfg.c1, cfg.params, cfg.prefs);
            mean_exact = 2.0 * phi / cfg.prefs.gamma;
            var_exact = 2.0 * phi / (cfg.prefs.gamma * cfg.prefs.gamma);
        }
        j["wealth_gain"] = stats_json(gain);
        j["wealth_gain"]["analytic_mean"] = mean_exact;
        j["wealth_gain"]["analytic_variance"] = var_exact;
        j["wealth_gain"]["mean_within_3se"] = std::abs(s.mean - mean_exact) <= 3.0 * s.se_mean;
        j["wealth_gain"]["variance_within_3se"] = std::abs(s.variance - var_exact) <= 3.0 * s.se_variance;
    }
    emit(o.summary, dump(j));
    return 0;
}

// ---------------------------------------------------------------------------

struct VerifyOptions {
    std::string out_dir = ".";
    std::size_t mc_paths = 100000;
    std::uint64_t seed = 20240601;
    unsigned workers = 1;
    bool no_mc = false;
    bool corrupt = false;
};

int cmd_verify(const GlobalOptions& g, const VerifyOptions& o) {
    const auto cfg = load_config(g);
    mfut::verify::SuiteOptions opt;
    opt.run_mc = !o.no_mc;
    opt.mc.n_paths = o.mc_paths;
    opt.mc.seed = o.seed;
    opt.mc.workers = o.workers;
    if (o.corrupt) opt.corruption.a_slope = 0.01;

    const auto rep = mfut::verify::run_suite(cfg.params, cfg.prefs, cfg.c1, cfg.c2, opt);

    std::filesystem::create_directories(o.out_dir);
    std::ostringstream csv;
    mfut::verify::write_report_csv(csv, rep);
    emit((std::filesystem::path(o.out_dir) / "report.csv").string(), csv.str());

    auto j = mfut::verify::report_json(rep);
    j["config"] = mfut::app::config_json(cfg);
    j["corrupted_coefficients"] = o.corrupt;
    j["mc_paths"] = o.no_mc ? 0 : o.mc_paths;
    emit((std::filesystem::path(o.out_dir) / "report.json").string(), dump(j));

    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& c : rep.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  observed=" << mfut::app::format_number(c.observed)
                  << "  threshold=" << mfut::app::format_number(c.threshold) << "  " << c.detail << '\n';
    std::cout << (rep.all_passed() ? "all checks passed" : std::to_string(rep.failures()) + " check(s) failed")
              << '\n';
    return rep.all_passed() ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Optimal futures trading under a two-factor convenience-yield model"};
    cli.require_subcommand(1);

    GlobalOptions g;
    cli.add_option("-c,--config", g.config_path, "flat key = value config file")->check(CLI::ExistingFile);
    cli.add_option("--set", g.overrides, "override a config key, key=value (repeatable)");

    BacktestOptions bt;
    auto* backtest = cli.add_subcommand("backtest", "optimal pair positions over a settlement-price CSV");
    backtest->add_option("--csv", bt.csv, "input CSV with header date,F1,F2")->required();
    backtest->add_option("-o,--out", bt.out, "output CSV (default stdout)");
    backtest->add_option("--summary", bt.summary, "JSON summary path");

    SweepOptions sw;
    auto* sweep = cli.add_subcommand("sweep", "evaluate outputs over a parameter grid");
    sweep->add_option("--param", sw.spec.parameter, "eta_bar | eta | gamma | lambda | T1 | T2")->required();
    sweep->add_option("--lo", sw.spec.lo, "grid start")->required();
    sweep->add_option("--hi", sw.spec.hi, "grid end")->required();
    sweep->add_option("--n", sw.spec.n, "grid points")->required();
    sweep->add_option("--outputs", sw.outputs,
                      "comma list of pi1,pi2,pi1_single,pi2_single,ce_pair,ce_single_1,ce_single_2,mu_w,sigma_w");
    sweep->add_option("--f1", sw.spec.f1, "T1 futures price");
    sweep->add_option("--f2", sw.spec.f2, "T2 futures price");
    sweep->add_option("--t", sw.spec.t, "evaluation time");
    sweep->add_option("-o,--out", sw.out, "output CSV (default stdout)");
    sweep->add_option("--summary", sw.summary, "JSON summary path");

    CeOptions ce;
    auto* cecmd = cli.add_subcommand("ce", "certainty equivalents at t = 0, w = 0");
    cecmd->add_option("-o,--out", ce.out, "output CSV (default stdout)");
    cecmd->add_option("--summary", ce.summary, "JSON summary path");

    SimulateOptions sim;
    auto* simulate = cli.add_subcommand("simulate", "Monte Carlo of state, futures and optimal wealth");
    simulate->add_option("--paths", sim.paths, "number of paths");
    simulate->add_option("--steps", sim.steps, "time steps (default 500 per year of horizon)");
    simulate->add_option("--seed", sim.seed, "RNG seed");
    simulate->add_option("--measure", sim.measure, "P (with wealth) or Q");
    simulate->add_option("--contracts", sim.contracts, "1 or 2 traded contracts");
    simulate->add_option("--w0", sim.w0, "initial wealth");
    simulate->add_option("--spot", sim.f0, "initial spot price");
    simulate->add_option("--delta0", sim.delta0, "initial convenience yield");
    simulate->add_option("--workers", sim.workers, "worker threads");
    simulate->add_option("--max-cells", sim.max_cells, "cap on recorded path cells (paths x (steps+1))");
    simulate->add_option("-o,--out", sim.out, "path CSV (omit to keep terminal values only)");
    simulate->add_option("--summary", sim.summary, "JSON summary path (default stdout)");

    VerifyOptions ver;
    auto* verify = cli.add_subcommand("verify", "run the verification suite");
    verify->add_option("--out-dir", ver.out_dir, "directory for report.csv and report.json");
    verify->add_option("--mc-paths", ver.mc_paths, "Monte Carlo paths");
    verify->add_option("--seed", ver.seed, "Monte Carlo seed");
    verify->add_option("--workers", ver.workers, "worker threads");
    verify->add_flag("--no-mc", ver.no_mc, "skip the Monte Carlo checks");
    verify->add_flag("--corrupt-coefficients", ver.corrupt, "negative control: shift A' by 0.01 in the closed form");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (*backtest) return cmd_backtest(g, bt);
        if (*sweep) return cmd_sweep(g, sw);
        if (*cecmd) return cmd_ce(g, ce);
        if (*simulate) return cmd_simulate(g, sim);
        if (*verify) return cmd_verify(g, ver);
    } catch (const mfut::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
