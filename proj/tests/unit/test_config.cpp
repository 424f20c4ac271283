#include <cmath>

#include <gtest/gtest.h>

#include <usc_dimer/cli/config.hpp>

using namespace usc_dimer;
using namespace usc_dimer::cli;

TEST(RunConfig, ParsesText) {
    RunConfig cfg;
    apply_config_text(cfg, R"(
# classical run
mode = classical
theta = 1
j_over_omega = 0.5   # omega = 2
j = 1
gamma = -7
rho0 = 0.8
phi0 = 3.14159
analyses = spectrum, lyapunov
out = run1
)");
    EXPECT_EQ(cfg.coupling, Coupling::usc);
    EXPECT_DOUBLE_EQ(cfg.effective_omega(), 2.0);
    EXPECT_EQ(cfg.analyses.size(), 2u);
    EXPECT_TRUE(cfg.wants("lyapunov"));
    EXPECT_FALSE(cfg.wants("poincare"));
    EXPECT_EQ(cfg.out, "run1");
    const auto p = cfg.model();
    EXPECT_DOUBLE_EQ(p.gamma(), -7.0);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(RunConfig, ErrorsCarryLineNumbers) {
    RunConfig cfg;
    try {
        apply_config_text(cfg, "mode = classical\n\ngamma = abc\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
        EXPECT_EQ(e.exit_code(), 1);
    }
    EXPECT_THROW(apply_config_text(cfg, "nonsense\n"), ConfigError);
    EXPECT_THROW(cfg.set("unknown", "1"), ConfigError);
    EXPECT_THROW(cfg.set("theta", "0.5"), ConfigError);
    EXPECT_THROW(cfg.set("gamma", "inf"), ConfigError);
    EXPECT_THROW(cfg.apply_override("gamma"), ConfigError);
}

TEST(RunConfig, ValidationRules) {
    RunConfig cfg;
    cfg.mode = Mode::quantum;
    cfg.n0 = 2.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.n0 = 17;
    cfg.coupling = Coupling::usc;
    EXPECT_EQ(cfg.cutoff(), 34);
    EXPECT_NO_THROW(cfg.validate());
    cfg.n_max = 10;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.n_max = 61;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.n_max = 0;
    cfg.analyses = {"lyapunov"};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.mode = Mode::classical;
    EXPECT_NO_THROW(cfg.validate());
    cfg.analyses = {"eigenvalues"};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.analyses = {"fourier"};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.analyses.clear();
    cfg.rho0 = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(RunConfig, SampleStepDefaultsByMode) {
    RunConfig cfg;
    EXPECT_DOUBLE_EQ(cfg.sample_step(), 0.01);
    cfg.mode = Mode::quantum;
    EXPECT_DOUBLE_EQ(cfg.sample_step(), 0.05);
    cfg.apply_override("dt_sample=0.2");
    EXPECT_DOUBLE_EQ(cfg.sample_step(), 0.2);
    EXPECT_EQ(cfg.time_grid().count, 501u);
}

TEST(Range, ParseAndEndpoints) {
    const auto r = Range::parse("-10:10:41");
    EXPECT_EQ(r.count, 41u);
    EXPECT_EQ(r.at(0), -10.0);
    EXPECT_EQ(r.at(40), 10.0);
    EXPECT_DOUBLE_EQ(r.at(20), 0.0);
    EXPECT_EQ(Range::parse("3:5:1").at(0), 3.0);
    EXPECT_THROW(Range::parse("1:2"), ConfigError);
    EXPECT_THROW(Range::parse("1:2:0"), ConfigError);
    EXPECT_THROW(Range::parse("1:2:1.5"), ConfigError);
}

TEST(Sweep, AxesAndReducers) {
    const auto a = SweepAxis::parse("gamma:-8:8:5");
    EXPECT_EQ(a.name, "gamma");
    EXPECT_THROW(SweepAxis::parse("mode:0:1:2"), ConfigError);
    EXPECT_THROW(SweepAxis::parse("gamma:0:1:1"), ConfigError);
    EXPECT_EQ(parse_reducer("tau_first"), Reducer::tau_first);
    EXPECT_EQ(reducer_name(Reducer::spectral_density), "spectral_density");
    EXPECT_THROW(parse_reducer("max"), ConfigError);

    SweepConfig sc{a, SweepAxis::parse("j_over_omega:0.01:0.5:3"), {}, Reducer::rho_min, 2};
    const auto c = sc.cell(1, 2);
    EXPECT_DOUBLE_EQ(c.gamma, -4.0);
    EXPECT_DOUBLE_EQ(c.effective_omega(), 2.0);
    EXPECT_NO_THROW(sc.validate());
    sc.axis2 = SweepAxis::parse("gamma:0:1:2");
    EXPECT_THROW(sc.validate(), ConfigError);
    sc.axis2 = SweepAxis::parse("rho0:0:2:2");
    EXPECT_THROW(sc.validate(), ConfigError);
    sc.axis2 = SweepAxis::parse("rho0:0:1:2");
    sc.base.mode = Mode::quantum;
    sc.base.n0 = 2;
    sc.reducer = Reducer::lyapunov;
    EXPECT_THROW(sc.validate(), ConfigError);
}
