#include "mfut/dynamics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mfut;

namespace {
const ModelParams kP = default_params();
const ContractSpec kT1{13.0 / 12.0};
const ContractSpec kT2{14.0 / 12.0};
}  // namespace

TEST(FuturesDynamics, MatchReferenceValues) {
    const auto d = futures_dynamics(0.0, kT1, kP);
    EXPECT_NEAR(d.mu_i, -0.02722810096820738, 1e-15);
    EXPECT_NEAR(d.sigma_i, 0.2986768294341947, 1e-14);
    EXPECT_NEAR(corr_rho12(0.0, kT1, kT2, kP), 0.99842069196077679, 1e-13);
}

TEST(FuturesDynamics, SimplifiedDriftMatchesItoForm) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> t(0.0, 1.0), d(-0.5, 0.5);
    for (int i = 0; i < 50; ++i) {
        const double ti = t(rng);
        EXPECT_NEAR(drift_mu_ito(ti, d(rng), kT1, kP), drift_mu(ti, kT1, kP), 1e-8);
    }
}

TEST(FuturesDynamics, VolatilityConvergesToSpotVolatility) {
    EXPECT_NEAR(vol_sigma(kT1.maturity, kT1, kP), kP.eta, 1e-15);
    EXPECT_NEAR(drift_mu(kT1.maturity, kT1, kP), kP.mu - kP.r, 1e-15);
}

TEST(FuturesDynamics, CovarianceIsPositiveDefinite) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        ModelParams p = kP;
        p.kappa = 0.05 + 3.0 * u(rng);
        p.rho = -0.99 + 1.98 * u(rng);
        p.eta = 0.05 + u(rng);
        p.eta_bar = 0.05 + u(rng);
        const double t = u(rng);
        const double b1 = b_coeff(t, kT1, p), b2 = b_coeff(t, kT2, p);
        const double s11 = covariance_rate(b1, b1, p), s22 = covariance_rate(b2, b2, p);
        const double s12 = covariance_rate(b1, b2, p);
        EXPECT_GT(s11, 0.0);
        EXPECT_GT(s22, 0.0);
        EXPECT_GT(s11 * s22 - s12 * s12, -1e-15 * s11 * s22);
        const double r12 = corr_rho12(t, kT1, kT2, p);
        EXPECT_LE(std::abs(r12), 1.0);
    }
}

TEST(FuturesDynamics, SameMaturityIsPerfectlyCorrelated) {
    EXPECT_EQ(corr_rho12(0.2, kT1, kT1, kP), 1.0);
}

TEST(FuturesDynamics, CloserMaturitiesAreMoreCorrelated) {
    const double far = corr_rho12(0.0, kT1, ContractSpec{2.0}, kP);
    const double near = corr_rho12(0.0, kT1, kT2, kP);
    EXPECT_GT(near, far);
}
