#ifndef USC_DIMER_POINCARE_HPP
#define USC_DIMER_POINCARE_HPP

#include <cmath>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "model.hpp"
#include "semiclassical.hpp"

namespace usc_dimer {

struct SectionPoint {
    double rho_over_n = 0.0;
    double phi = 0.0;
    double time = 0.0;
};

struct PoincareSection {
    std::vector<SectionPoint> points;
    double section_level = 0.0;  // time-averaged norm <N>
    bool degenerate = false;     // theta = 0: N is conserved, every sample returned
};

inline double mean_norm(const Trajectory& traj) {
    double s = 0.0;
    for (const auto& o : traj.observables) s += o.norm_n;
    return traj.empty() ? 0.0 : s / static_cast<double>(traj.size());
}

/// Section of a trajectory by the surface N(t) = <N>, crossed with N increasing.
/// Crossings are bracketed on the sample grid and refined by bisection on
/// the dense output.
inline PoincareSection poincare_section(const Trajectory& traj) {
    PoincareSection sec;
    sec.section_level = mean_norm(traj);
    const auto point_of = [&](const ClassicalState& s) {
        const auto o = observables(s, traj.params);
        return SectionPoint{o.norm_n > 0.0 ? o.imbalance_rho / o.norm_n : 0.0, o.phase_phi, s.time};
    };

    if (traj.params.coupling == Coupling::rwa) {
        sec.degenerate = true;
        sec.points.reserve(traj.size());
        for (const auto& s : traj.states) sec.points.push_back(point_of(s));
        return sec;
    }

    const double level = sec.section_level;
    const auto f = [&](double t) { return observables(traj.state_at(t), traj.params).norm_n - level; };
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double fa = traj.observables[i].norm_n - level;
        const double fb = traj.observables[i + 1].norm_n - level;
        if (!(fa < 0.0 && fb >= 0.0)) continue;
        double a = traj.times[i], b = traj.times[i + 1];
        double fa_ = fa;
        for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
            const double m = 0.5 * (a + b);
            const double fm = f(m);
            if (std::abs(fm) < 1e-12 * level) {
                a = b = m;
                break;
            }
            if ((fm < 0.0) == (fa_ < 0.0)) {
                a = m;
                fa_ = fm;
            } else {
                b = m;
            }
        }
        sec.points.push_back(point_of(traj.state_at(0.5 * (a + b))));
    }
    return sec;
}

inline void write_poincare_csv(const std::filesystem::path& path, std::span<const PoincareSection> sections) {
    csv::Writer w(path, "rho_over_N,phi");
    for (const auto& sec : sections)
        for (const auto& p : sec.points) w.row({p.rho_over_n, p.phi});
    w.commit();
}

} // namespace usc_dimer

#endif
