#include "mfut/verification.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mfut;

namespace {
const ModelParams kP = default_params();
const ContractSpec kT1{13.0 / 12.0};
const ContractSpec kT2{14.0 / 12.0};
const RiskPrefs kPrefs{0.01, 1.0};

bool all_pass(const std::vector<verify::CheckResult>& v) {
    return std::all_of(v.begin(), v.end(), [](const auto& c) { return c.passed; });
}
}  // namespace

TEST(OdeChecks, PassForClosedForm) {
    const auto r = verify::run_ode_checks(kP, {kT1, kT2});
    EXPECT_EQ(r.size(), 8u);
    EXPECT_TRUE(all_pass(r));
}

TEST(OdeChecks, Rk4IntegratorIsFourthOrder) {
    // Grid spacing 13/120: one RK4 step per interval vs two.
    const auto coarse = verify::rk4_coefficients(kT1, kP, 11, 0.2);
    const auto fine = verify::rk4_coefficients(kT1, kP, 11, 0.1);
    const double err_c = std::abs(coarse.front().b - b_coeff(coarse.front().t, kT1, kP));
    const double err_f = std::abs(fine.front().b - b_coeff(fine.front().t, kT1, kP));
    EXPECT_GT(err_c / err_f, 12.0);
}

TEST(OdeChecks, FailWhenCoefficientsCorrupted) {
    verify::Corruption cor;
    cor.a_slope = 0.01;
    EXPECT_FALSE(all_pass(verify::run_ode_checks(kP, {kT1}, 1000, cor)));
    EXPECT_FALSE(all_pass(verify::run_pde_checks(kP, {kT1}, 50, 7, cor)));
    verify::Corruption k;
    k.kappa_scale = 1.01;
    EXPECT_FALSE(all_pass(verify::run_ode_checks(kP, {kT1}, 1000, k)));
}

TEST(PdeChecks, PassAtRandomPoints) { EXPECT_TRUE(all_pass(verify::run_pde_checks(kP, {kT1, kT2}))); }

TEST(HjbChecks, ResidualsAndPerturbations) {
    const auto r = verify::run_hjb_checks(kP, kPrefs, kT1, kT2);
    EXPECT_TRUE(all_pass(r));
    EXPECT_EQ(r.size(), 5u);
}

TEST(HjbChecks, BracketIsMaximisedByOptimalPosition) {
    const verify::ExpUtilityPartials d(kPrefs.gamma, 0.0, 0.004, -0.001);
    const auto dyn = futures_dynamics(0.2, kT1, kP);
    const double f = 100.0;
    const double opt = dyn.mu_i / (kPrefs.gamma * f * dyn.sigma_i * dyn.sigma_i);
    const double at = verify::hjb_bracket_single(opt, dyn.mu_i, dyn.sigma_i, f, d);
    EXPECT_GT(at, verify::hjb_bracket_single(1.1 * opt, dyn.mu_i, dyn.sigma_i, f, d));
    EXPECT_GT(at, verify::hjb_bracket_single(0.9 * opt, dyn.mu_i, dyn.sigma_i, f, d));
}

TEST(IdentityChecks, AllHold) { EXPECT_TRUE(all_pass(verify::run_identity_checks(kP, kPrefs, kT1, kT2))); }

TEST(DualFormula, Agrees) { EXPECT_TRUE(verify::run_dual_formula_check().passed); }

TEST(Singularity, RankTwoEverywhere) { EXPECT_TRUE(all_pass(verify::run_singularity_checks(kP))); }

TEST(SampleStats, KnownValues) {
    const auto s = verify::sample_stats({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.variance, 5.0 / 3.0);
    EXPECT_DOUBLE_EQ(s.se_mean, std::sqrt(5.0 / 3.0 / 4.0));
}

TEST(Suite, WarnsNearUnitCorrelation) {
    auto p = kP;
    p.rho = 0.999999;
    verify::SuiteOptions opt;
    opt.run_mc = false;
    const auto rep = verify::run_suite(p, kPrefs, kT1, kT2, opt);
    EXPECT_FALSE(rep.warnings.empty());
    EXPECT_FALSE(rep.checks.empty());
}

TEST(Suite, ReportsAreStable) {
    verify::SuiteOptions opt;
    opt.run_mc = false;
    const auto a = verify::run_suite(kP, kPrefs, kT1, kT2, opt);
    const auto b = verify::run_suite(kP, kPrefs, kT1, kT2, opt);
    EXPECT_TRUE(a.all_passed());
    std::ostringstream ca, cb;
    verify::write_report_csv(ca, a);
    verify::write_report_csv(cb, b);
    EXPECT_EQ(ca.str(), cb.str());
    EXPECT_EQ(ca.str().substr(0, ca.str().find('\n')), "name,status,observed,threshold,detail");
    EXPECT_EQ(verify::report_json(a).dump(), verify::report_json(b).dump());
}

TEST(Suite, CorruptionFailsTheSuite) {
    verify::SuiteOptions opt;
    opt.run_mc = false;
    opt.corruption.a_slope = 0.01;
    const auto rep = verify::run_suite(kP, kPrefs, kT1, kT2, opt);
    EXPECT_FALSE(rep.all_passed());
    EXPECT_GT(rep.failures(), 0u);
}
