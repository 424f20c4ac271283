#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <usc_dimer/lyapunov.hpp>

#include "oracles/divergence.hpp"

using namespace usc_dimer;

namespace {

ModelParams usc(double gamma) { return ModelParams::from_gamma(2.0, 1.0, gamma, Coupling::usc, 1.0); }

} // namespace

TEST(Lyapunov, LinearRwaIsZero) {
    LyapunovConfig cfg;
    cfg.integrator.t_end = 200.0;
    const ModelParams p{2.0, 1.0, 0.0, Coupling::rwa, 1.0};
    EXPECT_LT(std::abs(lyapunov_max(initial_state(1.0, 0.3, 0.0), p, cfg)), 2e-2);
}

TEST(Lyapunov, TangentAgreesWithTwoTrajectoryOracle) {
    const auto s0 = initial_state(1.0, 0.8, std::numbers::pi);
    const double tangent = lyapunov_max(s0, usc(-7.0));
    const double oracle = oracle::two_trajectory_divergence(s0, usc(-7.0), 1000.0).slope;
    EXPECT_NEAR(oracle, 0.77, 0.04);
    EXPECT_NEAR(tangent, oracle, 0.1 * oracle);
}

TEST(Lyapunov, RegularOrbitsNearZero) {
    for (double rho0 : {-0.5, 0.0, 0.8}) EXPECT_LT(std::abs(lyapunov_max(initial_state(1.0, rho0, 0.0), usc(7.0))), 1e-2);
}

TEST(Lyapunov, IndependentOfInitialTangent) {
    const auto s0 = initial_state(1.0, -0.8, std::numbers::pi);
    LyapunovConfig a, b;
    b.tangent0 = {complex(0.0, 1.0), complex(-0.3, 0.2)};
    EXPECT_NEAR(lyapunov_max(s0, usc(-7.0), a), lyapunov_max(s0, usc(-7.0), b), 0.05);
}

TEST(Lyapunov, RenormalizationIntervalDoesNotMatter) {
    const auto s0 = initial_state(1.0, 0.8, std::numbers::pi);
    LyapunovConfig a, b;
    a.integrator.t_end = b.integrator.t_end = 10.0;
    b.renorm_interval = 0.25;
    EXPECT_NEAR(lyapunov_max(s0, usc(-7.0), a), lyapunov_max(s0, usc(-7.0), b), 1e-6);
}
