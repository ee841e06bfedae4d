#include "mfut/model.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mfut;

TEST(ModelParams, DefaultsAreTheEstimatedSet) {
    const auto p = default_params();
    EXPECT_DOUBLE_EQ(p.mu, 0.01);
    EXPECT_DOUBLE_EQ(p.kappa, 0.8);
    EXPECT_DOUBLE_EQ(p.alpha, 0.0);
    EXPECT_DOUBLE_EQ(p.eta, 0.45);
    EXPECT_DOUBLE_EQ(p.eta_bar, 0.5);
    EXPECT_DOUBLE_EQ(p.rho, 0.75);
    EXPECT_DOUBLE_EQ(p.lambda, 0.05);
    EXPECT_DOUBLE_EQ(p.r, 0.001);
    EXPECT_NO_THROW(validate(p));
}

TEST(ModelParams, RiskNeutralEquilibrium) {
    const auto p = default_params();
    EXPECT_DOUBLE_EQ(alpha_tilde(p), -0.0625);
}

TEST(ModelParams, RejectsTinyKappa) {
    auto p = default_params();
    p.kappa = 1e-9;
    try {
        validate(p);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("kappa"), std::string::npos);
    }
}

TEST(ModelParams, RejectsUnitCorrelation) {
    auto p = default_params();
    for (double rho : {1.0, -1.0, 1.5}) {
        p.rho = rho;
        EXPECT_THROW(validate(p), ValidationError) << rho;
    }
    p.rho = 0.999999;
    EXPECT_NO_THROW(validate(p));
}

TEST(ModelParams, RejectsNegativeRateAndZeroVolatility) {
    auto p = default_params();
    p.r = -0.01;
    EXPECT_THROW(validate(p), ValidationError);
    p = default_params();
    p.eta = 0.0;
    EXPECT_THROW(validate(p), ValidationError);
    EXPECT_NO_THROW(validate(p, true));
    p = default_params();
    p.eta_bar = -0.1;
    EXPECT_THROW(validate(p), ValidationError);
}

TEST(ContractSpec, RejectsNegativeMaturity) {
    EXPECT_NO_THROW(validate(ContractSpec{0.0}));
    EXPECT_THROW(validate(ContractSpec{-1.0}), ValidationError);
    EXPECT_THROW(validate(ContractSpec{std::nan("")}), ValidationError);
    EXPECT_NO_THROW(validate(ContractSpec{0.5}));
}

TEST(RiskPrefs, HorizonMustNotExceedMaturity) {
    EXPECT_NO_THROW(validate(RiskPrefs{0.01, 1.0}, {ContractSpec{1.0}, ContractSpec{2.0}}));
    EXPECT_THROW(validate(RiskPrefs{0.01, 1.5}, {ContractSpec{13.0 / 12.0}}), ValidationError);
    EXPECT_THROW(validate(RiskPrefs{0.0, 1.0}, {ContractSpec{2.0}}), ValidationError);
}

TEST(MarketState, SpotIsExpOfLogPrice) {
    MarketState s{0.0, std::log(80.0), 0.02};
    EXPECT_NEAR(s.spot(), 80.0, 1e-12);
}

TEST(Config, ParsesKeyValueWithComments) {
    const auto cfg = parse_config_string(
        "# estimated set\n"
        "mu = 0.02\n"
        "  kappa=1.2   # inline\n"
        "\n"
        "T1 = 1.5\n"
        "T2_date = 2014-07-22\n");
    EXPECT_DOUBLE_EQ(cfg.params.mu, 0.02);
    EXPECT_DOUBLE_EQ(cfg.params.kappa, 1.2);
    EXPECT_DOUBLE_EQ(cfg.c1.maturity, 1.5);
    ASSERT_TRUE(cfg.t2_date.has_value());
    EXPECT_EQ(*cfg.t2_date, "2014-07-22");
    EXPECT_DOUBLE_EQ(cfg.params.eta, 0.45);
}

TEST(Config, RejectsUnknownKeysAndBadNumbers) {
    EXPECT_THROW(parse_config_string("sigma = 0.3\n"), ValidationError);
    EXPECT_THROW(parse_config_string("mu = abc\n"), ValidationError);
    EXPECT_THROW(parse_config_string("mu 0.3\n"), ValidationError);
    EXPECT_THROW(parse_config_string("mu = 0.3x\n"), ValidationError);
}

TEST(Config, SerializeRoundTripsExactly) {
    Config cfg;
    cfg.params.mu = 0.1 + 0.2;
    cfg.params.rho = -1.0 / 3.0;
    cfg.prefs.gamma = 0.05;
    cfg.t1_date = "2014-06-20";
    const auto back = parse_config_string(serialize_config(cfg));
    EXPECT_EQ(back, cfg);
}

TEST(Config, EveryKeyIsSettable) {
    for (const auto& key : config_keys()) {
        Config cfg;
        const std::string value = key.ends_with("_date") ? "2014-06-20" : "0.5";
        EXPECT_NO_THROW(set_config_value(cfg, key, value)) << key;
    }
}
