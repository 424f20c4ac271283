#ifndef USC_DIMER_SEMICLASSICAL_HPP
#define USC_DIMER_SEMICLASSICAL_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "model.hpp"

namespace usc_dimer {

struct IntegratorConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double dt_sample = 0.01;
    double t_end = 100.0;
    bool store_dense = true;  // keep the continuous extension (needed by Poincare sections and root refinement)

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("tolerances must be positive");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive and finite");
        if (!(dt_sample > 0.0) || !std::isfinite(dt_sample)) throw ConfigError("dt_sample must be positive");
        if (dt_sample > t_end) throw ConfigError("dt_sample must not exceed t_end");
    }

    /// Index of the last sample on the uniform grid.
    std::size_t last_sample() const noexcept {
        return static_cast<std::size_t>(std::floor(t_end / dt_sample * (1.0 + 1e-12)));
    }
};

/// Uniformly sampled solution of the classical equations plus the
/// integrator's continuous extension over the whole interval.
struct Trajectory {
    ModelParams params;
    double dt_sample = 0.0;
    std::vector<double> times;
    std::vector<ClassicalState> states;
    std::vector<ClassicalObservables> observables;
    std::shared_ptr<const DenseSolution<4>> dense;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }

    /// State at arbitrary t inside the integrated interval (dense output).
    ClassicalState state_at(double t) const {
        if (!dense || dense->empty()) throw Error(ErrorKind::integration, "trajectory has no dense output");
        return unpack(dense->eval(t), t);
    }
};

namespace detail {

inline void check_finite(const ClassicalState& s) {
    if (!std::isfinite(s.psi0.real()) || !std::isfinite(s.psi0.imag()) || !std::isfinite(s.psi1.real()) ||
        !std::isfinite(s.psi1.imag()))
        throw ConfigError("initial state must be finite");
}

/// Records samples t0 + i dt as accepted steps sweep past them.
class Sampler {
public:
    Sampler(Trajectory& traj, double t0, std::size_t last) : traj_(traj), t0_(t0), last_(last) {
        traj_.times.reserve(last + 1);
        traj_.states.reserve(last + 1);
        traj_.observables.reserve(last + 1);
    }

    void record(const PhasePoint& y, double t) {
        const ClassicalState s = unpack(y, t);
        traj_.times.push_back(t);
        traj_.states.push_back(s);
        traj_.observables.push_back(observables(s, traj_.params));
    }

    template <std::size_t N>
    void on_segment(const DenseSegment<N>& seg) {
        while (next_ <= last_) {
            const double t = t0_ + static_cast<double>(next_) * traj_.dt_sample;
            if (t > seg.t1()) break;
            const auto y = seg.eval(t);
            record({y[0], y[1], y[2], y[3]}, t);
            ++next_;
        }
    }

private:
    Trajectory& traj_;
    double t0_;
    std::size_t last_;
    std::size_t next_ = 1;
};

template <std::size_t N>
DenseSegment<4> project(const DenseSegment<N>& seg) {
    DenseSegment<4> out;
    out.t0 = seg.t0;
    out.h = seg.h;
    for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t i = 0; i < 4; ++i) out.coeff[c][i] = seg.coeff[c][i];
    return out;
}

} // namespace detail

/// Integrates the classical equations of motion from `initial` over
/// [t0, t0 + t_end], t0 = initial.time, sampled every dt_sample.
inline Trajectory integrate(const ClassicalState& initial, const ModelParams& params,
                            const IntegratorConfig& cfg) {
    params.validate();
    cfg.validate();
    detail::check_finite(initial);

    Trajectory traj;
    traj.params = params;
    traj.dt_sample = cfg.dt_sample;
    const std::size_t last = cfg.last_sample();
    const double t0 = initial.time;
    const double t_final = std::max(t0 + cfg.t_end, t0 + static_cast<double>(last) * cfg.dt_sample);

    auto rhs = [&params](double, const PhasePoint& y, PhasePoint& dy) {
        const auto [d0, d1] = eom_rhs(unpack(y, 0.0), params);
        dy = {d0.real(), d0.imag(), d1.real(), d1.imag()};
    };
    Dopri5<4, decltype(rhs)> solver(rhs, t0, pack(initial),
                                    StepControl{cfg.rel_tol, cfg.abs_tol, 1e-14 * cfg.t_end});

    auto dense = std::make_shared<DenseSolution<4>>();
    detail::Sampler sampler(traj, t0, last);
    sampler.record(pack(initial), t0);
    solver.advance_to(t_final, [&](const DenseSegment<4>& seg) {
        if (cfg.store_dense) dense->push(seg);
        sampler.on_segment(seg);
    });
    traj.dense = std::move(dense);
    return traj;
}

/// Tangent vector in phase space, (d psi0, d psi1).
struct TangentVector {
    complex d0{};
    complex d1{};

    double norm() const noexcept { return std::sqrt(std::norm(d0) + std::norm(d1)); }
};

struct TangentResult {
    Trajectory trajectory;
    TangentVector final_tangent;
    double log_growth_sum = 0.0;
    double elapsed = 0.0;
    std::vector<double> log_growth;  // one entry per renormalization interval

    double lyapunov() const noexcept { return log_growth_sum / elapsed; }
};

/// Co-integrates the linearized flow along a trajectory (Benettin scheme):
/// the tangent vector is renormalized to unit length every `renorm_interval`
/// and the logarithms of its growth factors are accumulated.
inline TangentResult integrate_with_tangent(const ClassicalState& initial, const TangentVector& tangent0,
                                            const ModelParams& params, const IntegratorConfig& cfg,
                                            double renorm_interval = 1.0) {
    params.validate();
    cfg.validate();
    detail::check_finite(initial);
    if (!(tangent0.norm() > 0.0) || !std::isfinite(tangent0.norm()))
        throw ConfigError("tangent vector must be nonzero and finite");
    if (!(renorm_interval > 0.0)) throw ConfigError("renormalization interval must be positive");

    using Vec8 = RealVec<8>;
    TangentResult result;
    Trajectory& traj = result.trajectory;
    traj.params = params;
    traj.dt_sample = cfg.dt_sample;
    const std::size_t last = cfg.last_sample();
    const double t0 = initial.time;
    const double t_final = std::max(t0 + cfg.t_end, t0 + static_cast<double>(last) * cfg.dt_sample);

    auto rhs = [&params](double, const Vec8& y, Vec8& dy) {
        const ClassicalState s{complex(y[0], y[1]), complex(y[2], y[3]), 0.0};
        const auto [f0, f1] = eom_rhs(s, params);
        const auto [g0, g1] = eom_tangent(s, complex(y[4], y[5]), complex(y[6], y[7]), params);
        dy = {f0.real(), f0.imag(), f1.real(), f1.imag(), g0.real(), g0.imag(), g1.real(), g1.imag()};
    };

    const double n_init = tangent0.norm();
    Vec8 y0{initial.psi0.real(),     initial.psi0.imag(),     initial.psi1.real(),
            initial.psi1.imag(),     tangent0.d0.real() / n_init, tangent0.d0.imag() / n_init,
            tangent0.d1.real() / n_init, tangent0.d1.imag() / n_init};
    Dopri5<8, decltype(rhs)> solver(rhs, t0, y0, StepControl{cfg.rel_tol, cfg.abs_tol, 1e-14 * cfg.t_end});

    auto dense = std::make_shared<DenseSolution<4>>();
    detail::Sampler sampler(traj, t0, last);
    sampler.record(pack(initial), t0);
    const auto on_step = [&](const DenseSegment<8>& seg) {
        if (cfg.store_dense) dense->push(detail::project(seg));
        sampler.on_segment(seg);
    };

    for (std::size_t k = 1;; ++k) {
        const double t_next = std::min(t0 + static_cast<double>(k) * renorm_interval, t_final);
        solver.advance_to(t_next, on_step);
        Vec8 y = solver.state();
        const double growth = std::sqrt(y[4] * y[4] + y[5] * y[5] + y[6] * y[6] + y[7] * y[7]);
        if (!(growth > 0.0) || !std::isfinite(growth))
            throw Error(ErrorKind::integration, "tangent vector degenerated during co-integration");
        const double lg = std::log(growth);
        result.log_growth.push_back(lg);
        result.log_growth_sum += lg;
        for (std::size_t i = 4; i < 8; ++i) y[i] /= growth;
        solver.reset_state(y);
        if (t_next >= t_final) break;
    }
    const Vec8& yf = solver.state();
    result.final_tangent = {complex(yf[4], yf[5]), complex(yf[6], yf[7])};
    result.elapsed = t_final - t0;
    traj.dense = std::move(dense);
    return result;
}

/// Normalized minimal imbalance min_t rho(t)/N(t) over the sample grid.
inline double rho_min(const Trajectory& traj) {
    if (traj.empty()) throw DegenerateNorm("rho_min of an empty trajectory");
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& o : traj.observables) {
        if (o.norm_n < 1e-12) throw DegenerateNorm("norm N(t) below 1e-12; rho/N undefined");
        lo = std::min(lo, o.imbalance_rho / o.norm_n);
    }
    return lo;
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    csv::Writer w(path, "t,re_psi0,im_psi0,re_psi1,im_psi1,N,rho,phi,H");
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& s = traj.states[i];
        const auto& o = traj.observables[i];
        w.row({traj.times[i], s.psi0.real(), s.psi0.imag(), s.psi1.real(), s.psi1.imag(), o.norm_n,
               o.imbalance_rho, o.phase_phi, o.energy_h});
    }
    w.commit();
}

} // namespace usc_dimer

#endif
