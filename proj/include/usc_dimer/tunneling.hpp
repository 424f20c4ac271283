#ifndef USC_DIMER_TUNNELING_HPP
#define USC_DIMER_TUNNELING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"
#include "semiclassical.hpp"

namespace usc_dimer {

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    double p = 0.0;
};

struct HistogramSpec {
    std::size_t bins = 60;                 // equal bins over [0, max interval]
    std::optional<double> bin_width;       // overrides `bins` when set
};

struct TunnelingStats {
    std::optional<double> tau_first;  // empty: not reached within the horizon
    std::vector<double> crossings;
    std::vector<double> intervals;
    std::vector<HistogramBin> histogram;

    double interval_mean() const {
        double s = 0.0;
        for (double d : intervals) s += d;
        return intervals.empty() ? 0.0 : s / static_cast<double>(intervals.size());
    }

    double interval_variance() const {
        if (intervals.size() < 2) return 0.0;
        const double m = interval_mean();
        double s = 0.0;
        for (double d : intervals) s += (d - m) * (d - m);
        return s / static_cast<double>(intervals.size() - 1);
    }

    /// Interior bins strictly above both neighbours (plateaus count once).
    std::size_t histogram_local_maxima() const {
        std::size_t peaks = 0;
        const std::size_t n = histogram.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double p = histogram[i].p;
            if (p <= 0.0) continue;
            const double left = i > 0 ? histogram[i - 1].p : 0.0;
            std::size_t j = i;
            while (j + 1 < n && histogram[j + 1].p == p) ++j;
            const double right = j + 1 < n ? histogram[j + 1].p : 0.0;
            if (p > left && p > right) ++peaks;
            i = j;
        }
        return peaks;
    }
};

inline std::vector<HistogramBin> interval_histogram(std::span<const double> intervals, const HistogramSpec& spec) {
    std::vector<HistogramBin> hist;
    if (intervals.empty()) return hist;
    const double top = *std::max_element(intervals.begin(), intervals.end());
    std::size_t nbins = spec.bins;
    double width = 0.0;
    if (spec.bin_width) {
        if (!(*spec.bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
        width = *spec.bin_width;
        nbins = static_cast<std::size_t>(std::floor(top / width)) + 1;
    } else {
        if (nbins == 0) throw ConfigError("histogram needs at least one bin");
        width = top > 0.0 ? top / static_cast<double>(nbins) : 1.0;
    }
    hist.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b) hist[b] = {width * static_cast<double>(b), width * static_cast<double>(b + 1), 0.0};
    for (double d : intervals) {
        auto b = static_cast<std::size_t>(std::floor(d / width));
        hist[std::min(b, nbins - 1)].p += 1.0;
    }
    for (auto& h : hist) h.p /= static_cast<double>(intervals.size());
    return hist;
}

/// Zero crossings of a uniformly sampled imbalance, located by sign change
/// and linear interpolation. Samples that touch zero without a sign change
/// are not roots. `times` are dimensionless (J t).
inline std::vector<double> sign_change_roots(std::span<const double> times, std::span<const double> rho) {
    if (times.size() != rho.size()) throw ConfigError("times and rho series differ in length");
    std::vector<double> roots;
    std::size_t last = times.size();  // index of last nonzero sample
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (rho[i] == 0.0) continue;
        if (last < times.size() && (rho[i] > 0.0) != (rho[last] > 0.0)) {
            const double t = times[last] + (times[i] - times[last]) * rho[last] / (rho[last] - rho[i]);
            if (roots.empty() || t > roots.back()) roots.push_back(t);
        }
        last = i;
    }
    return roots;
}

inline TunnelingStats tunneling_stats(std::span<const double> times, std::span<const double> rho, double horizon,
                                      const HistogramSpec& spec = {}) {
    TunnelingStats st;
    for (double t : sign_change_roots(times, rho))
        if (t <= horizon) st.crossings.push_back(t);
    if (!st.crossings.empty()) st.tau_first = st.crossings.front();
    for (std::size_t i = 0; i + 1 < st.crossings.size(); ++i)
        st.intervals.push_back(st.crossings[i + 1] - st.crossings[i]);
    st.histogram = interval_histogram(st.intervals, spec);
    return st;
}

/// Roots of rho(t) on a classical trajectory, refined by bisection on the
/// dense output to `tol` in time.
inline std::vector<double> imbalance_roots(const Trajectory& traj, double tol = 1e-12) {
    std::vector<double> roots;
    const auto rho = [&](double t) {
        const auto s = traj.state_at(t);
        return std::norm(s.psi0) - std::norm(s.psi1);
    };
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double ra = traj.observables[i].imbalance_rho;
        const double rb = traj.observables[i + 1].imbalance_rho;
        if (ra == 0.0 && i == 0) continue;
        if (rb == 0.0) {
            roots.push_back(traj.times[i + 1]);
            continue;
        }
        if ((ra > 0.0) == (rb > 0.0) || ra == 0.0) continue;
        double a = traj.times[i], b = traj.times[i + 1];
        double fa = ra;
        while (b - a > tol) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            const double fm = rho(m);
            if ((fm > 0.0) == (fa > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push_back(0.5 * (a + b));
    }
    return roots;
}

inline void write_tunneling_csv(const std::filesystem::path& path, const TunnelingStats& st) {
    csv::Writer w(path, "i,tau_i,delta_tau_i");
    const double nan = std::nan("");
    for (std::size_t i = 0; i < st.crossings.size(); ++i) {
        w.field(i).field(st.crossings[i]).field(i < st.intervals.size() ? st.intervals[i] : nan);
        w.end_row();
    }
    w.commit();
}

inline void write_histogram_csv(const std::filesystem::path& path, const TunnelingStats& st) {
    csv::Writer w(path, "bin_left,bin_right,p");
    for (const auto& b : st.histogram) w.row({b.left, b.right, b.p});
    w.commit();
}

} // namespace usc_dimer

#endif
