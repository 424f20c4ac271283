#ifndef USC_DIMER_CLI_COMMANDS_HPP
#define USC_DIMER_CLI_COMMANDS_HPP

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../analysis.hpp"
#include "../csv.hpp"
#include "../parallel.hpp"
#include "../quantum.hpp"
#include "../semiclassical.hpp"
#include "config.hpp"

namespace usc_dimer::cli {

/// Files written and non-fatal diagnostics of one command.
struct Report {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

inline std::filesystem::path output_path(const std::string& prefix, std::string_view suffix) {
    return std::filesystem::path(prefix + "_" + std::string(suffix) + ".csv");
}

namespace detail {

inline QuantumEvolution simulate_quantum(const RunConfig& cfg, Report* report = nullptr) {
    const auto h = build_hamiltonian(cfg.model(), FockBasis(cfg.cutoff()));
    auto ev = evolve(h, cfg.quantum_initial(), cfg.time_grid(), {cfg.leakage_tol, cfg.allow_unconverged});
    if (!ev.converged && report) {
        std::ostringstream msg;
        msg << "cutoff n_max=" << cfg.cutoff() << " unconverged (max leakage " << ev.max_leakage << ")";
        report->warnings.push_back(msg.str());
    }
    return ev;
}

inline Trajectory simulate_classical(const RunConfig& cfg, bool store_dense) {
    auto icfg = cfg.integrator();
    icfg.store_dense = store_dense;
    return integrate(cfg.classical_initial(), cfg.model(), icfg);
}

inline std::vector<double> scaled_times(const std::vector<double>& t, double j) {
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = std::abs(j) * t[i];
    return out;
}

inline SpectralDensity classical_spectrum(const RunConfig& cfg, const Trajectory& traj) {
    std::vector<complex> a, b;
    a.reserve(traj.size());
    b.reserve(traj.size());
    for (const auto& s : traj.states) {
        a.push_back(s.psi0);
        b.push_back(s.psi1);
    }
    return spectral_density(std::span<const complex>(a), std::span<const complex>(b), cfg.sample_step(),
                            {false, cfg.window}, cfg.gamma);
}

inline SpectralDensity quantum_spectrum(const RunConfig& cfg, const QuantumEvolution& ev) {
    return spectral_density(ev.n0_t, ev.n1_t, cfg.sample_step(), {true, cfg.window}, cfg.gamma);
}

inline SpectralDensity spectrum_of(const RunConfig& cfg, Report* report = nullptr) {
    if (cfg.mode == Mode::classical) return classical_spectrum(cfg, simulate_classical(cfg, false));
    return quantum_spectrum(cfg, simulate_quantum(cfg, report));
}

inline TunnelingStats tunneling_of(const RunConfig& cfg, const std::vector<double>& times,
                                   const std::vector<double>& rho) {
    return tunneling_stats(scaled_times(times, cfg.j), rho, std::abs(cfg.j) * cfg.t_end, cfg.histogram());
}

inline std::vector<double> classical_rho(const Trajectory& traj) {
    std::vector<double> r(traj.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = traj.observables[i].imbalance_rho;
    return r;
}

} // namespace detail

/// Bins with g above this count as spectral lines in the spectral_density reducer.
inline constexpr double spectral_line_threshold = 1e-3;

/// Scalar summary of one run, as used by sweeps. tau_first is +inf when
/// the imbalance never changes sign within the horizon.
inline double reduce(const RunConfig& cfg, Reducer reducer) {
    cfg.validate();
    switch (reducer) {
    case Reducer::rho_min:
        if (cfg.mode == Mode::classical) return rho_min(detail::simulate_classical(cfg, false));
        else {
            const auto ev = detail::simulate_quantum(cfg);
            double lo = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ev.times.size(); ++i) {
                const double n = ev.n0_t[i] + ev.n1_t[i];
                if (n < 1e-12) throw DegenerateNorm("mean photon number below 1e-12");
                lo = std::min(lo, (ev.n0_t[i] - ev.n1_t[i]) / n);
            }
            return lo;
        }
    case Reducer::tau_first: {
        TunnelingStats st;
        if (cfg.mode == Mode::classical) {
            const auto traj = detail::simulate_classical(cfg, false);
            st = detail::tunneling_of(cfg, traj.times, detail::classical_rho(traj));
        } else {
            const auto ev = detail::simulate_quantum(cfg);
            st = detail::tunneling_of(cfg, ev.times, ev.rho_t());
        }
        return st.tau_first ? *st.tau_first : std::numeric_limits<double>::infinity();
    }
    case Reducer::lyapunov: {
        if (cfg.mode != Mode::classical) throw ConfigError("lyapunov reducer requires classical mode");
        LyapunovConfig lc;
        lc.integrator = cfg.integrator();
        lc.integrator.store_dense = false;
        lc.renorm_interval = cfg.renorm_interval;
        return lyapunov_max(cfg.classical_initial(), cfg.model(), lc);
    }
    case Reducer::spectral_density:
        return static_cast<double>(detail::spectrum_of(cfg).count_above(spectral_line_threshold));
    }
    return std::nan("");
}

/// `run`: trajectory or evolution CSV plus the analyses listed in cfg.analyses.
inline Report run_single(const RunConfig& cfg) {
    cfg.validate();
    Report report;
    const auto& prefix = cfg.out;
    if (cfg.mode == Mode::classical) {
        const bool dense = cfg.wants("poincare");
        const auto traj = detail::simulate_classical(cfg, dense);
        std::optional<SpectralDensity> spectrum;
        std::optional<TunnelingStats> tunneling;
        std::optional<PoincareSection> section;
        std::optional<double> lambda;
        if (cfg.wants("spectrum")) spectrum = detail::classical_spectrum(cfg, traj);
        if (cfg.wants("tunneling")) tunneling = detail::tunneling_of(cfg, traj.times, detail::classical_rho(traj));
        if (cfg.wants("poincare")) section = poincare_section(traj);
        if (cfg.wants("lyapunov")) lambda = reduce(cfg, Reducer::lyapunov);

        // All computation is done; only now touch the filesystem.
        write_trajectory_csv(output_path(prefix, "trajectory"), traj);
        report.files.push_back(output_path(prefix, "trajectory"));
        if (spectrum) {
            write_spectral_map_csv(output_path(prefix, "spectrum"), std::span(&*spectrum, 1), cfg.positive_only);
            report.files.push_back(output_path(prefix, "spectrum"));
        }
        if (tunneling) {
            write_tunneling_csv(output_path(prefix, "tunneling"), *tunneling);
            write_histogram_csv(output_path(prefix, "histogram"), *tunneling);
            report.files.push_back(output_path(prefix, "tunneling"));
            report.files.push_back(output_path(prefix, "histogram"));
        }
        if (section) {
            write_poincare_csv(output_path(prefix, "poincare"), std::span(&*section, 1));
            report.files.push_back(output_path(prefix, "poincare"));
        }
        if (lambda) {
            csv::Writer w(output_path(prefix, "lyapunov"), "rho0,lambda_max");
            w.row({cfg.rho0, *lambda});
            w.commit();
            report.files.push_back(output_path(prefix, "lyapunov"));
        }
    } else {
        const auto ev = detail::simulate_quantum(cfg, &report);
        std::optional<SpectralDensity> spectrum;
        std::optional<TunnelingStats> tunneling;
        std::optional<Eigen::VectorXd> spectrum_h;
        if (cfg.wants("spectrum")) spectrum = detail::quantum_spectrum(cfg, ev);
        if (cfg.wants("tunneling")) tunneling = detail::tunneling_of(cfg, ev.times, ev.rho_t());
        if (cfg.wants("eigenvalues"))
            spectrum_h = eigenvalues(build_hamiltonian(cfg.model(), FockBasis(cfg.cutoff())));

        write_evolution_csv(output_path(prefix, "evolution"), ev);
        report.files.push_back(output_path(prefix, "evolution"));
        if (spectrum) {
            write_spectral_map_csv(output_path(prefix, "spectrum"), std::span(&*spectrum, 1), cfg.positive_only);
            report.files.push_back(output_path(prefix, "spectrum"));
        }
        if (tunneling) {
            write_tunneling_csv(output_path(prefix, "tunneling"), *tunneling);
            write_histogram_csv(output_path(prefix, "histogram"), *tunneling);
            report.files.push_back(output_path(prefix, "tunneling"));
            report.files.push_back(output_path(prefix, "histogram"));
        }
        if (spectrum_h) {
            write_eigenvalues_csv(output_path(prefix, "eigenvalues"), *spectrum_h);
            report.files.push_back(output_path(prefix, "eigenvalues"));
        }
    }
    return report;
}

struct SweepResult {
    std::vector<double> values;  // row-major over (axis1, axis2)
    std::vector<std::string> warnings;
};

/// Evaluates the reducer on every grid cell. Failed cells become NaN with a
/// warning; the sweep itself never aborts on a cell failure.
inline SweepResult compute_sweep(const SweepConfig& sweep) {
    sweep.validate();
    const std::size_t n1 = sweep.axis1.range.count;
    const std::size_t n2 = sweep.axis2.range.count;
    SweepResult res;
    res.values.assign(n1 * n2, std::nan(""));
    std::vector<std::string> cell_warning(n1 * n2);
    parallel_for(n1 * n2, sweep.workers, [&](std::size_t k) {
        const std::size_t i = k / n2, j = k % n2;
        try {
            res.values[k] = reduce(sweep.cell(i, j), sweep.reducer);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "cell " << i << "," << j << " (" << sweep.axis1.name << "="
                << csv::format_double(sweep.axis1.range.at(i)) << ", " << sweep.axis2.name << "="
                << csv::format_double(sweep.axis2.range.at(j)) << "): " << e.what();
            cell_warning[k] = msg.str();
        }
    });
    for (auto& w : cell_warning)
        if (!w.empty()) res.warnings.push_back(std::move(w));
    return res;
}

/// `sweep`: long-format grid CSV `axis1,axis2,value` (+ warnings sidecar).
inline Report run_sweep(const SweepConfig& sweep) {
    const auto res = compute_sweep(sweep);
    Report report;
    const auto path = output_path(sweep.base.out, "sweep");
    csv::Writer w(path, "axis1,axis2,value");
    std::size_t k = 0;
    for (std::size_t i = 0; i < sweep.axis1.range.count; ++i)
        for (std::size_t j = 0; j < sweep.axis2.range.count; ++j)
            w.row({sweep.axis1.range.at(i), sweep.axis2.range.at(j), res.values[k++]});
    w.commit();
    report.files.push_back(path);
    if (!res.warnings.empty()) {
        std::string text;
        for (const auto& line : res.warnings) text += line + "\n";
        const std::filesystem::path side(sweep.base.out + "_warnings.txt");
        csv::write_text_atomically(side, text);
        report.files.push_back(side);
        report.warnings = res.warnings;
    }
    return report;
}

/// `spectrum`: spectral map over a gamma range (or the configured gamma).
inline Report run_spectrum(const RunConfig& cfg, std::optional<Range> gammas, std::size_t workers) {
    cfg.validate();
    const Range r = gammas ? *gammas : Range{cfg.gamma, cfg.gamma, 1};
    std::vector<RunConfig> cells(r.count, cfg);
    for (std::size_t i = 0; i < r.count; ++i) {
        cells[i].gamma = r.at(i);
        cells[i].validate();
    }
    std::vector<SpectralDensity> rows(r.count);
    std::vector<Report> partial(r.count);
    parallel_for(r.count, workers, [&](std::size_t i) { rows[i] = detail::spectrum_of(cells[i], &partial[i]); });
    Report report;
    for (auto& p : partial)
        for (auto& w : p.warnings) report.warnings.push_back(std::move(w));
    write_spectral_map_csv(output_path(cfg.out, "spectrum"), rows, cfg.positive_only);
    report.files.push_back(output_path(cfg.out, "spectrum"));
    return report;
}

inline Report run_tunneling(const RunConfig& cfg) {
    cfg.validate();
    Report report;
    TunnelingStats st;
    if (cfg.mode == Mode::classical) {
        const auto traj = detail::simulate_classical(cfg, false);
        st = detail::tunneling_of(cfg, traj.times, detail::classical_rho(traj));
    } else {
        const auto ev = detail::simulate_quantum(cfg, &report);
        st = detail::tunneling_of(cfg, ev.times, ev.rho_t());
    }
    write_tunneling_csv(output_path(cfg.out, "tunneling"), st);
    write_histogram_csv(output_path(cfg.out, "histogram"), st);
    report.files.push_back(output_path(cfg.out, "tunneling"));
    report.files.push_back(output_path(cfg.out, "histogram"));
    return report;
}

/// `poincare`: one section per initial imbalance, concatenated.
inline Report run_poincare(const RunConfig& cfg, std::optional<Range> rho0s, std::size_t workers) {
    cfg.validate();
    if (cfg.mode != Mode::classical) throw ConfigError("poincare requires classical mode");
    const Range r = rho0s ? *rho0s : Range{cfg.rho0, cfg.rho0, 1};
    std::vector<RunConfig> cells(r.count, cfg);
    for (std::size_t i = 0; i < r.count; ++i) {
        cells[i].rho0 = r.at(i);
        cells[i].validate();
    }
    std::vector<PoincareSection> sections(r.count);
    parallel_for(r.count, workers,
                 [&](std::size_t i) { sections[i] = poincare_section(detail::simulate_classical(cells[i], true)); });
    write_poincare_csv(output_path(cfg.out, "poincare"), sections);
    return {{output_path(cfg.out, "poincare")}, {}};
}

inline Report run_lyapunov(const RunConfig& cfg, std::optional<Range> rho0s, std::size_t workers) {
    cfg.validate();
    if (cfg.mode != Mode::classical) throw ConfigError("lyapunov requires classical mode");
    const Range r = rho0s ? *rho0s : Range{cfg.rho0, cfg.rho0, 1};
    std::vector<RunConfig> cells(r.count, cfg);
    for (std::size_t i = 0; i < r.count; ++i) {
        cells[i].rho0 = r.at(i);
        cells[i].validate();
    }
    std::vector<double> lambda(r.count);
    parallel_for(r.count, workers, [&](std::size_t i) { lambda[i] = reduce(cells[i], Reducer::lyapunov); });
    csv::Writer w(output_path(cfg.out, "lyapunov"), "rho0,lambda_max");
    for (std::size_t i = 0; i < r.count; ++i) w.row({r.at(i), lambda[i]});
    w.commit();
    return {{output_path(cfg.out, "lyapunov")}, {}};
}

inline std::vector<ModeFrequencies> mode_table(const ModelParams& params, const Range& gammas) {
    std::vector<ModeFrequencies> rows;
    rows.reserve(gammas.count);
    for (std::size_t i = 0; i < gammas.count; ++i) rows.push_back(mode_frequencies(params, gammas.at(i)));
    return rows;
}

} // namespace usc_dimer::cli

#endif
