#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include <usc_dimer/poincare.hpp>

using namespace usc_dimer;

namespace {

Trajectory orbit(double gamma, double rho0, double phi0, double t_end) {
    const auto p = ModelParams::from_gamma(2.0, 1.0, gamma, Coupling::usc, 1.0);
    return integrate(initial_state(1.0, rho0, phi0), p, {1e-12, 1e-14, 0.05, t_end, true});
}

std::size_t occupied_boxes(const PoincareSection& s, std::size_t limit, int grid) {
    std::set<std::pair<int, int>> boxes;
    for (std::size_t i = 0; i < std::min(limit, s.points.size()); ++i) {
        const auto& p = s.points[i];
        const int x = std::clamp(static_cast<int>((p.rho_over_n + 1.0) / 2.0 * grid), 0, grid - 1);
        const int y = std::clamp(static_cast<int>((p.phi + std::numbers::pi) / (2.0 * std::numbers::pi) * grid), 0,
                                 grid - 1);
        boxes.insert({x, y});
    }
    return boxes.size();
}

} // namespace

TEST(Poincare, CrossingsLieOnSectionWithRisingNorm) {
    const auto tr = orbit(-7.0, 0.8, std::numbers::pi, 200.0);
    const auto sec = poincare_section(tr);
    EXPECT_FALSE(sec.degenerate);
    ASSERT_GT(sec.points.size(), 20u);
    EXPECT_NEAR(sec.section_level, mean_norm(tr), 0.0);
    for (const auto& pt : sec.points) {
        const auto s = tr.state_at(pt.time);
        EXPECT_NEAR(observables(s, tr.params).norm_n, sec.section_level, 1e-9 * sec.section_level);
        const auto [d0, d1] = eom_rhs(s, tr.params);
        const double dn = 2.0 * (std::conj(s.psi0) * d0 + std::conj(s.psi1) * d1).real();
        EXPECT_GT(dn, 0.0);
        EXPECT_GE(pt.rho_over_n, -1.0);
        EXPECT_LE(pt.rho_over_n, 1.0);
    }
    for (std::size_t i = 1; i < sec.points.size(); ++i) EXPECT_GT(sec.points[i].time, sec.points[i - 1].time);
}

TEST(Poincare, RwaSectionIsDegenerate) {
    const auto p = ModelParams::from_gamma(2.0, 1.0, 2.0, Coupling::rwa, 1.0);
    const auto tr = integrate(initial_state(1.0, 0.5, 0.0), p, {1e-12, 1e-14, 0.1, 10.0, true});
    const auto sec = poincare_section(tr);
    EXPECT_TRUE(sec.degenerate);
    EXPECT_EQ(sec.points.size(), tr.size());
}

TEST(Poincare, ChaoticSectionFillsMoreArea) {
    const auto regular = poincare_section(orbit(7.0, 0.8, 0.0, 1000.0));
    const auto chaotic = poincare_section(orbit(-7.0, 0.8, std::numbers::pi, 1000.0));
    const std::size_t k = std::min(regular.points.size(), chaotic.points.size());
    ASSERT_GT(k, 100u);
    EXPECT_GT(occupied_boxes(chaotic, k, 40), 2 * occupied_boxes(regular, k, 40));
}
