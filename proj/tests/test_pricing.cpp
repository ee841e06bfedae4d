#include "mfut/pricing.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mfut;

namespace {
const ModelParams kP = default_params();
const ContractSpec kT1{13.0 / 12.0};
}  // namespace

// Reference values from tests/oracle/oracle.py (ODE integration at 40 digits).
TEST(AffineCoeffs, MatchReferenceValues) {
    EXPECT_NEAR(b_coeff(0.0, kT1, kP), -0.7245620193641476, 1e-14);
    EXPECT_NEAR(a_coeff(0.0, kT1, kP), -0.023114114441943226, 1e-14);
    EXPECT_NEAR(a_coeff(0.0, ContractSpec{1.0}, kP), -0.021407310422844954, 1e-14);
}

TEST(AffineCoeffs, VanishAtMaturity) {
    const auto ab = affine_coeffs(kT1.maturity, kT1, kP);
    EXPECT_EQ(ab.a, 0.0);
    EXPECT_EQ(ab.b, 0.0);
}

TEST(AffineCoeffs, SlopeIsBoundedByTimeToMaturity) {
    for (double t : {0.0, 0.3, 0.9, 1.08}) {
        const double tau = kT1.maturity - t;
        const double b = b_coeff(t, kT1, kP);
        EXPECT_LT(b, 0.0);
        EXPECT_GT(b, -tau);
        EXPECT_GT(b, -1.0 / kP.kappa);
    }
}

TEST(AffineCoeffs, SmallKappaLimit) {
    auto p = kP;
    p.kappa = 1e-7;
    EXPECT_NEAR(b_coeff(0.0, kT1, p), -kT1.maturity, 1e-7);
}

TEST(AffineCoeffs, RejectPastMaturity) {
    EXPECT_THROW(b_coeff(1.2, kT1, kP), ValidationError);
    EXPECT_THROW(a_coeff(1.0 + 1e-9, ContractSpec{1.0}, kP), ValidationError);
}

TEST(FuturesPrice, MatchesReferenceState) {
    const MarketState s{0.3, std::log(100.0), 0.05};
    EXPECT_NEAR(futures_price(s, kT1, kP), 95.566389118029352, 1e-10);
}

TEST(FuturesPrice, ConvergesToSpotAtMaturity) {
    const MarketState s{kT1.maturity, std::log(73.5), 0.3};
    EXPECT_EQ(futures_price(s, kT1, kP), s.spot());
    const MarketState near{kT1.maturity - 1e-9, std::log(73.5), 0.3};
    EXPECT_NEAR(futures_price(near, kT1, kP), 73.5, 1e-6);
}

TEST(FuturesPrice, HigherConvenienceYieldLowersPrice) {
    const MarketState lo{0.0, std::log(100.0), 0.0};
    const MarketState hi{0.0, std::log(100.0), 0.1};
    EXPECT_LT(futures_price(hi, kT1, kP), futures_price(lo, kT1, kP));
}

TEST(FuturesPrice, RejectsInvalidState) {
    EXPECT_THROW(futures_price({0.0, std::nan(""), 0.0}, kT1, kP), ValidationError);
    EXPECT_THROW(futures_price({1.5, 0.0, 0.0}, kT1, kP), ValidationError);
}

TEST(PdeResidual, SmallAtRandomInteriorPoints) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> t(0.0, 1.0), x(std::log(20.0), std::log(200.0)), d(-0.3, 0.3);
    for (int i = 0; i < 100; ++i) {
        const MarketState s{t(rng), x(rng), d(rng)};
        EXPECT_LT(pde_residual(s, kT1, kP), 1e-6);
    }
}

TEST(PdeResidual, ShrinksQuadraticallyWithBump) {
    const MarketState s{0.3, std::log(100.0), 0.05};
    const double coarse = pde_residual(s, kT1, kP, 1e-3);
    const double fine = pde_residual(s, kT1, kP, 1e-4);
    EXPECT_GT(coarse / fine, 30.0);
}

TEST(PdeResidual, DetectsWrongPricingFunction) {
    const MarketState s{0.3, std::log(100.0), 0.05};
    auto wrong = [](double t, double x, double d) {
        return std::exp(x + a_coeff(t, kT1, kP) + 0.01 * (kT1.maturity - t) + b_coeff(t, kT1, kP) * d);
    };
    EXPECT_GT(pde_residual(wrong, s, kP, FdBumps{}), 1e-3);
}
