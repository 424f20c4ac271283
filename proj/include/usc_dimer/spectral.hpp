#ifndef USC_DIMER_SPECTRAL_HPP
#define USC_DIMER_SPECTRAL_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "csv.hpp"
#include "errors.hpp"

namespace usc_dimer {

enum class Window { rectangular, hann };

struct SpectralOptions {
    bool subtract_mean = false;
    Window window = Window::rectangular;
};

/// Normalized spectral density on an ascending angular-frequency grid.
struct SpectralDensity {
    std::vector<double> frequencies;
    std::vector<double> density;
    double gamma = std::numeric_limits<double>::quiet_NaN();

    std::size_t size() const noexcept { return density.size(); }

    /// Number of bins whose mass exceeds `threshold`.
    std::size_t count_above(double threshold) const noexcept {
        std::size_t n = 0;
        for (double g : density) n += g > threshold ? 1 : 0;
        return n;
    }
};

namespace detail {

// FFTW planning is not thread-safe; execution on a private plan is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// |DFT|^2 with the e^{-i nu t} kernel, returned in FFTW order.
inline std::vector<double> power(std::span<const std::complex<double>> series, const SpectralOptions& opt) {
    const std::size_t n = series.size();
    std::complex<double> mean = 0.0;
    if (opt.subtract_mean) {
        for (auto v : series) mean += v;
        mean /= static_cast<double>(n);
    }
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (opt.window == Window::hann)
            w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
        const auto v = (series[i] - mean) * w;
        buf[i][0] = v.real();
        buf[i][1] = v.imag();
    }
    fftw_execute(plan);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return p;
}

} // namespace detail

/// g(nu) = (|f0(nu)|^2 + |f1(nu)|^2) / sum_nu (|f0|^2 + |f1|^2), f_k the DFT of series k.
/// A pure tone e^{-i nu0 t} lands at nu = -nu0.
inline SpectralDensity spectral_density(std::span<const std::complex<double>> series0,
                                        std::span<const std::complex<double>> series1, double dt_sample,
                                        const SpectralOptions& options = {},
                                        double gamma = std::numeric_limits<double>::quiet_NaN()) {
    if (series0.empty() || series1.empty()) throw EmptySeries("spectral density of an empty series");
    if (series0.size() != series1.size()) throw ConfigError("spectral density needs equal-length series");
    if (series0.size() < 2) throw EmptySeries("spectral density needs at least two samples");
    if (!(dt_sample > 0.0)) throw ConfigError("dt_sample must be positive");

    const std::size_t n = series0.size();
    const auto p0 = detail::power(series0, options);
    const auto p1 = detail::power(series1, options);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += p0[i] + p1[i];

    SpectralDensity out;
    out.gamma = gamma;
    out.frequencies.resize(n);
    out.density.resize(n);
    const double dnu = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt_sample);
    const std::size_t neg = n / 2;  // bins with negative frequency
    for (std::size_t j = 0; j < n; ++j) {
        // ascending: k = -neg .. n - neg - 1
        const long long k = static_cast<long long>(j) - static_cast<long long>(neg);
        const std::size_t src = k < 0 ? static_cast<std::size_t>(k + static_cast<long long>(n))
                                      : static_cast<std::size_t>(k);
        out.frequencies[j] = dnu * static_cast<double>(k);
        // An identically-constant series with its mean removed has no spectrum;
        // report it as uniform rather than 0/0.
        out.density[j] = total > 0.0 ? (p0[src] + p1[src]) / total : 1.0 / static_cast<double>(n);
    }
    return out;
}

inline SpectralDensity spectral_density(std::span<const double> series0, std::span<const double> series1,
                                        double dt_sample, const SpectralOptions& options = {},
                                        double gamma = std::numeric_limits<double>::quiet_NaN()) {
    std::vector<std::complex<double>> a(series0.begin(), series0.end());
    std::vector<std::complex<double>> b(series1.begin(), series1.end());
    return spectral_density(std::span<const std::complex<double>>(a), std::span<const std::complex<double>>(b),
                            dt_sample, options, gamma);
}

/// L1 distance between two densities on the same grid.
inline double l1_distance(const SpectralDensity& a, const SpectralDensity& b) {
    if (a.size() != b.size()) throw ConfigError("spectral densities live on different grids");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a.density[i] - b.density[i]);
    return d;
}

/// Long-format map export, one row per (gamma, nu) cell.
inline void write_spectral_map_csv(const std::filesystem::path& path, std::span<const SpectralDensity> rows,
                                   bool positive_only = false) {
    csv::Writer w(path, "gamma,nu,g");
    for (const auto& s : rows)
        for (std::size_t i = 0; i < s.size(); ++i)
            if (!positive_only || s.frequencies[i] > 0.0) w.row({s.gamma, s.frequencies[i], s.density[i]});
    w.commit();
}

} // namespace usc_dimer

#endif
