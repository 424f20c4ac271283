#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <usc_dimer/integrator.hpp>

using namespace usc_dimer;

namespace {

// y1' = y2, y2' = -y1
struct Oscillator {
    void operator()(double, const RealVec<2>& y, RealVec<2>& dy) const { dy = {y[1], -y[0]}; }
};

// y' = -t y^2 on a single component; exact y = 2 / (1 + t^2) from y(0) = 2
struct Riccati {
    void operator()(double t, const RealVec<1>& y, RealVec<1>& dy) const { dy = {-t * y[0] * y[0]}; }
};

} // namespace

TEST(Dopri5, HarmonicOscillatorLandsExactly) {
    Oscillator rhs;
    Dopri5<2, Oscillator> s(rhs, 0.0, {1.0, 0.0}, {1e-12, 1e-14});
    s.advance_to(10.0, [](const DenseSegment<2>&) {});
    EXPECT_EQ(s.time(), 10.0);
    EXPECT_NEAR(s.state()[0], std::cos(10.0), 1e-10);
    EXPECT_NEAR(s.state()[1], -std::sin(10.0), 1e-10);
}

TEST(Dopri5, BackwardIntegration) {
    Oscillator rhs;
    Dopri5<2, Oscillator> s(rhs, 0.0, {1.0, 0.0}, {1e-12, 1e-14});
    s.advance_to(-3.0, [](const DenseSegment<2>&) {});
    EXPECT_NEAR(s.state()[0], std::cos(3.0), 1e-10);
    EXPECT_NEAR(s.state()[1], std::sin(3.0), 1e-10);
}

TEST(Dopri5, FifthOrderConvergence) {
    Riccati rhs;
    std::vector<double> errs;
    for (double h : {0.2, 0.1, 0.05}) {
        RealVec<1> y{2.0};
        double t = 0.0;
        const int steps = static_cast<int>(std::lround(2.0 / h));
        for (int k = 0; k < steps; ++k, t += h) y = Dopri5<1, Riccati>::fixed_step(rhs, t, y, h);
        errs.push_back(std::abs(y[0] - 2.0 / 5.0));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = std::log2(errs[i] / errs[i + 1]);
        EXPECT_GT(order, 4.5);
        EXPECT_LT(order, 6.5);
    }
}

TEST(Dopri5, DenseOutputMatchesSolution) {
    Oscillator rhs;
    Dopri5<2, Oscillator> s(rhs, 0.0, {1.0, 0.0}, {1e-11, 1e-13});
    DenseSolution<2> sol;
    s.advance_to(20.0, [&](const DenseSegment<2>& seg) { sol.push(seg); });
    EXPECT_GT(sol.size(), 10u);
    EXPECT_EQ(sol.t_begin(), 0.0);
    EXPECT_EQ(sol.t_end(), 20.0);
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        const double t = 0.01 * k;
        const auto y = sol.eval(t);
        worst = std::max(worst, std::abs(y[0] - std::cos(t)));
    }
    EXPECT_LT(worst, 1e-8);
    // segment end points are continuous
    const auto y = sol.eval(sol.t_end());
    EXPECT_NEAR(y[0], s.state()[0], 1e-14);
}

TEST(Dopri5, TighterToleranceTakesMoreSteps) {
    Oscillator rhs;
    Dopri5<2, Oscillator> loose(rhs, 0.0, {1.0, 0.0}, {1e-6, 1e-8});
    Dopri5<2, Oscillator> tight(rhs, 0.0, {1.0, 0.0}, {1e-12, 1e-14});
    loose.advance_to(50.0, [](const DenseSegment<2>&) {});
    tight.advance_to(50.0, [](const DenseSegment<2>&) {});
    EXPECT_GT(tight.accepted_steps(), 5 * loose.accepted_steps());
}

TEST(Dopri5, StepSizeUnderflowOnBlowUp) {
    // y' = y^2 from y(0) = 1 blows up at t = 1
    auto rhs = [](double, const RealVec<1>& y, RealVec<1>& dy) { dy = {y[0] * y[0]}; };
    Dopri5<1, decltype(rhs)> s(rhs, 0.0, {1.0}, {1e-10, 1e-12, 1e-14 * 2.0});
    EXPECT_THROW(s.advance_to(2.0, [](const DenseSegment<1>&) {}), StepSizeUnderflow);
}
