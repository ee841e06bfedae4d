#include "mfut/quadrature.hpp"

#include <gtest/gtest.h>

#include <numbers>

using mfut::adaptive_simpson;

TEST(AdaptiveSimpson, ExactForCubics) {
    auto f = [](double x) { return 3.0 * x * x * x - x + 2.0; };
    EXPECT_NEAR(adaptive_simpson(f, -1.0, 2.0), 3.0 * 15.0 / 4.0 - 1.5 + 6.0, 1e-13);
}

TEST(AdaptiveSimpson, SmoothIntegrands) {
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-11);
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::exp(-x * x); }, -5.0, 5.0), std::sqrt(std::numbers::pi),
                1e-11);
}

TEST(AdaptiveSimpson, EmptyAndReversedIntervals) {
    auto f = [](double x) { return x * x; };
    EXPECT_EQ(adaptive_simpson(f, 1.0, 1.0), 0.0);
    EXPECT_NEAR(adaptive_simpson(f, 1.0, 0.0), -1.0 / 3.0, 1e-14);
}

TEST(AdaptiveSimpson, NoisyIntegrandStopsAtBudget) {
    std::size_t calls = 0;
    auto noisy = [&](double x) {
        ++calls;
        return x + 1e-9 * std::sin(1e7 * x);
    };
    const double v = adaptive_simpson(noisy, 0.0, 1.0, 1e-16, 40, 10000);
    EXPECT_LE(calls, 10004u);
    EXPECT_NEAR(v, 0.5, 1e-8);
}
