// usc-dimer: command-line driver for the two-site bosonic junction toolkit.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "usc_dimer/cli/commands.hpp"

namespace ud = usc_dimer;
namespace cli = usc_dimer::cli;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config, "key = value configuration file");
        app->add_option("-s,--set", overrides, "override a configuration key (key=value), repeatable");
        app->add_option("-o,--out", out, "output prefix");
    }

    cli::RunConfig load() const {
        cli::RunConfig cfg = config.empty() ? cli::RunConfig{} : cli::load_config(config);
        for (const auto& o : overrides) cfg.apply_override(o);
        if (!out.empty()) cfg.out = out;
        return cfg;
    }
};

std::optional<cli::Range> optional_range(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return cli::Range::parse(text);
}

void print_report(const cli::Report& r) {
    for (const auto& f : r.files) std::cout << f.string() << "\n";
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-site bosonic junction with optional counter-rotating coupling"};
    app.require_subcommand(1);

    Common run_opts, sweep_opts, spec_opts, poin_opts, lyap_opts, tun_opts;

    auto* run = app.add_subcommand("run", "single simulation plus the configured analyses");
    run_opts.attach(run);

    auto* sweep = app.add_subcommand("sweep", "two-parameter grid reduced to one scalar per cell");
    sweep_opts.attach(sweep);
    std::string axis1, axis2, reducer = "rho_min";
    std::size_t workers = ud::default_workers();
    sweep->add_option("--axis1", axis1, "name:min:max:count")->required();
    sweep->add_option("--axis2", axis2, "name:min:max:count")->required();
    sweep->add_option("--reduce", reducer, "rho_min | spectral_density | tau_first | lyapunov");
    sweep->add_option("-j,--workers", workers, "worker threads");

    auto* spectrum = app.add_subcommand("spectrum", "spectral map g(nu) over a gamma range");
    spec_opts.attach(spectrum);
    std::string gamma_range, rho0_range;
    spectrum->add_option("--gamma-range", gamma_range, "min:max:count");
    spectrum->add_option("-j,--workers", workers, "worker threads");

    auto* poincare = app.add_subcommand("poincare", "Poincare sections for a range of initial imbalances");
    poin_opts.attach(poincare);
    poincare->add_option("--rho0-range", rho0_range, "min:max:count");
    poincare->add_option("-j,--workers", workers, "worker threads");

    auto* lyapunov = app.add_subcommand("lyapunov", "maximal Lyapunov exponent for a range of initial imbalances");
    lyap_opts.attach(lyapunov);
    lyapunov->add_option("--rho0-range", rho0_range, "min:max:count");
    lyapunov->add_option("-j,--workers", workers, "worker threads");

    auto* tunneling = app.add_subcommand("tunneling", "tunneling times and interval histogram");
    tun_opts.attach(tunneling);

    auto* modes = app.add_subcommand("modes", "linear mode frequencies and the chaos window");
    double omega = 2.0, j = 1.0;
    int theta = 1;
    std::string modes_out;
    modes->add_option("--omega", omega, "mode frequency");
    modes->add_option("--j", j, "inter-site coupling");
    modes->add_option("--theta", theta, "0 (rotating wave) or 1 (full coupling)");
    modes->add_option("--gamma-range", gamma_range, "min:max:count");
    modes->add_option("-o,--out", modes_out, "output prefix (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ud::ErrorKind::config);
    }

    try {
        if (run->parsed()) {
            print_report(cli::run_single(run_opts.load()));
        } else if (sweep->parsed()) {
            cli::SweepConfig sc{cli::SweepAxis::parse(axis1), cli::SweepAxis::parse(axis2), sweep_opts.load(),
                                cli::parse_reducer(reducer), workers};
            print_report(cli::run_sweep(sc));
        } else if (spectrum->parsed()) {
            print_report(cli::run_spectrum(spec_opts.load(), optional_range(gamma_range), workers));
        } else if (poincare->parsed()) {
            print_report(cli::run_poincare(poin_opts.load(), optional_range(rho0_range), workers));
        } else if (lyapunov->parsed()) {
            print_report(cli::run_lyapunov(lyap_opts.load(), optional_range(rho0_range), workers));
        } else if (tunneling->parsed()) {
            print_report(cli::run_tunneling(tun_opts.load()));
        } else if (modes->parsed()) {
            const ud::ModelParams p{omega, j, 0.0, ud::coupling_from_theta(theta), 1.0};
            p.validate();
            const cli::Range g = gamma_range.empty() ? cli::Range{-10.0, 10.0, 201} : cli::Range::parse(gamma_range);
            const auto rows = cli::mode_table(p, g);
            std::optional<ud::GammaWindow> window;
            bool applicable = true;
            try {
                window = ud::chaos_window(p);
            } catch (const ud::NotApplicable&) {
                applicable = false;
            }
            if (modes_out.empty()) {
                ud::write_modes_csv(std::cout, rows);
            } else {
                const auto path = cli::output_path(modes_out, "modes");
                ud::write_modes_csv(path, rows);
                std::cout << path.string() << "\n";
            }
            if (!applicable) std::cerr << "chaos window: not applicable (theta = 0)\n";
            else if (!window) std::cerr << "chaos window: empty\n";
            else std::cerr << "chaos window: (" << ud::csv::format_double(window->low) << ", "
                           << ud::csv::format_double(window->high) << ")\n";
        }
    } catch (const ud::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ud::ErrorKind::io);
    }
    return 0;
}
