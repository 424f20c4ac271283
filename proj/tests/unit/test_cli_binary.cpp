#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(USC_DIMER_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("usc_dimer_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string out(const std::string& name) const { return (dir_ / name).string(); }
    fs::path dir_;
};

} // namespace

TEST_F(Cli, RunSucceeds) {
    EXPECT_EQ(run("run --set t_end=2 --set analyses=spectrum --out " + out("a")), 0);
    EXPECT_TRUE(fs::exists(out("a") + "_trajectory.csv"));
    EXPECT_TRUE(fs::exists(out("a") + "_spectrum.csv"));
}

TEST_F(Cli, ConfigFile) {
    std::ofstream(out("cfg.txt")) << "mode = quantum\nn0 = 3\nt_end = 2\n";
    EXPECT_EQ(run("run --config " + out("cfg.txt") + " --out " + out("q")), 0);
    EXPECT_TRUE(fs::exists(out("q") + "_evolution.csv"));
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("run --set gamma=oops --out " + out("x")), 1);
    EXPECT_EQ(run("run --set theta=3 --out " + out("x")), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("run --config " + out("missing.txt")), 1);
    EXPECT_EQ(run("run --set mode=quantum --set theta=1 --set n0=4 --set n_max=5 --set gamma=7 --set t_end=5 --out " +
                  out("x")),
              3);
    EXPECT_EQ(run("run --set t_end=1 --out " + out("nodir") + "/sub/x"), 4);
    EXPECT_TRUE(fs::is_empty(dir_));
}

TEST_F(Cli, SweepAndModes) {
    EXPECT_EQ(run("sweep --axis1 gamma:-2:2:3 --axis2 rho0:0.5:1:2 --reduce rho_min --workers 2 --set t_end=5 --out " +
                  out("s")),
              0);
    EXPECT_TRUE(fs::exists(out("s") + "_sweep.csv"));
    EXPECT_EQ(run("modes --omega 2 --j 1 --theta 1 --gamma-range -10:10:21 --out " + out("m")), 0);
    EXPECT_TRUE(fs::exists(out("m") + "_modes.csv"));
    EXPECT_EQ(run("modes --theta 0"), 0);
    EXPECT_EQ(run("tunneling --set t_end=5 --out " + out("t")), 0);
    EXPECT_TRUE(fs::exists(out("t") + "_histogram.csv"));
}
