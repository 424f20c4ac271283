#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <usc_dimer/model.hpp>

using namespace usc_dimer;

namespace {

ClassicalState random_state(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return {complex(g(rng), g(rng)), complex(g(rng), g(rng)), 0.0};
}

ModelParams random_params(std::mt19937_64& rng, Coupling c) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    return {u(rng), u(rng) + 4.0, u(rng), c, 1.0};
}

} // namespace

TEST(ModelParams, GammaRoundTrip) {
    const auto p = ModelParams::from_gamma(2.0, 0.5, -7.0, Coupling::usc, 17.0);
    EXPECT_DOUBLE_EQ(p.gamma_tilde, -7.0 * 0.5 / 17.0);
    EXPECT_DOUBLE_EQ(p.gamma(), -7.0);
    EXPECT_EQ(p.theta(), 1.0);
}

TEST(ModelParams, RejectsInvalid) {
    EXPECT_THROW(coupling_from_theta(2), ConfigError);
    EXPECT_THROW(ModelParams::from_gamma(1.0, 0.0, 1.0, Coupling::rwa, 1.0), ConfigError);
    EXPECT_THROW(ModelParams::from_gamma(1.0, 1.0, 1.0, Coupling::rwa, 0.0), ConfigError);
    ModelParams p;
    p.omega = std::nan("");
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Phase, WrapIntoHalfOpenInterval) {
    EXPECT_DOUBLE_EQ(wrap_phase(std::numbers::pi), std::numbers::pi);
    EXPECT_DOUBLE_EQ(wrap_phase(-std::numbers::pi), std::numbers::pi);
    EXPECT_NEAR(wrap_phase(3.0 * std::numbers::pi / 2.0), -std::numbers::pi / 2.0, 1e-15);
    EXPECT_EQ(safe_arg(complex(0.0, 0.0)), 0.0);
    EXPECT_EQ(safe_arg(complex(-0.0, -0.0)), 0.0);
}

TEST(InitialState, ImbalanceAndPhase) {
    const auto s = initial_state(2.0, 0.5, 1.0);
    const auto o = observables(s, ModelParams{});
    EXPECT_NEAR(o.norm_n, 2.0, 1e-15);
    EXPECT_NEAR(o.imbalance_rho / o.norm_n, 0.5, 1e-15);
    EXPECT_NEAR(o.phase_phi, 1.0, 1e-15);
    const auto full = initial_state(1.0, 1.0, 0.0);
    EXPECT_EQ(full.psi0, complex(1.0, 0.0));
    EXPECT_EQ(std::abs(full.psi1), 0.0);
    EXPECT_THROW(initial_state(1.0, 1.5, 0.0), ConfigError);
}

// d psi/dt = -i dH/dpsi^*, dH/dpsi^* = (d/dx + i d/dy) H / 2; checked by central differences.
TEST(EquationsOfMotion, AreHamiltonianFlow) {
    std::mt19937_64 rng(11);
    for (auto c : {Coupling::rwa, Coupling::usc}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto p = random_params(rng, c);
            const auto s = random_state(rng);
            const auto [f0, f1] = eom_rhs(s, p);
            const double h = 1e-6;
            auto grad = [&](int site) {
                auto shifted = [&](complex d) {
                    ClassicalState q = s;
                    (site == 0 ? q.psi0 : q.psi1) += d;
                    return classical_energy(q, p);
                };
                const double dx = (shifted({h, 0}) - shifted({-h, 0})) / (2 * h);
                const double dy = (shifted({0, h}) - shifted({0, -h})) / (2 * h);
                return 0.5 * complex(dx, dy);  // dH/dpsi^*
            };
            const complex i(0.0, 1.0);
            EXPECT_NEAR(std::abs(f0 - (-i * grad(0))), 0.0, 1e-6);
            EXPECT_NEAR(std::abs(f1 - (-i * grad(1))), 0.0, 1e-6);
        }
    }
}

TEST(EquationsOfMotion, TangentIsDirectionalDerivative) {
    std::mt19937_64 rng(5);
    for (auto c : {Coupling::rwa, Coupling::usc}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto p = random_params(rng, c);
            const auto s = random_state(rng);
            const auto d = random_state(rng);
            const double e = 1e-6;
            ClassicalState plus{s.psi0 + e * d.psi0, s.psi1 + e * d.psi1, 0.0};
            ClassicalState minus{s.psi0 - e * d.psi0, s.psi1 - e * d.psi1, 0.0};
            const auto [a0, a1] = eom_rhs(plus, p);
            const auto [b0, b1] = eom_rhs(minus, p);
            const auto [g0, g1] = eom_tangent(s, d.psi0, d.psi1, p);
            EXPECT_NEAR(std::abs((a0 - b0) / (2 * e) - g0), 0.0, 1e-6);
            EXPECT_NEAR(std::abs((a1 - b1) / (2 * e) - g1), 0.0, 1e-6);
        }
    }
}

TEST(EquationsOfMotion, RwaConservesNormLocally) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_params(rng, Coupling::rwa);
        const auto s = random_state(rng);
        const auto [f0, f1] = eom_rhs(s, p);
        const double dn = 2.0 * (std::conj(s.psi0) * f0 + std::conj(s.psi1) * f1).real();
        EXPECT_NEAR(dn, 0.0, 1e-12 * (1.0 + std::norm(s.psi0) + std::norm(s.psi1)) * 10.0);
    }
}
