#ifndef USC_DIMER_MODES_HPP
#define USC_DIMER_MODES_HPP

#include <cmath>
#include <complex>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>

#include "csv.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace usc_dimer {

/// Nonlinear continuations of the symmetric and antisymmetric normal modes.
/// The +/- branches are +nu and -nu; nu is imaginary when the radicand is negative.
struct ModeFrequencies {
    double gamma = 0.0;
    double sym_radicand = 0.0;
    double anti_radicand = 0.0;
    std::complex<double> nu_sym{};
    std::complex<double> nu_anti{};
    bool sym_exists = false;
    bool anti_exists = false;
};

inline ModeFrequencies mode_frequencies(const ModelParams& params, double gamma) {
    const double j = params.j_coupling;
    const double theta = params.theta();
    const double shift = params.omega + gamma * j / 2.0;
    ModeFrequencies m;
    m.gamma = gamma;
    m.sym_radicand = (shift - j * (1.0 - theta)) * (shift - j * (1.0 + theta));
    m.anti_radicand = (shift + j * (1.0 - theta)) * (shift + j * (1.0 + theta));
    m.nu_sym = std::sqrt(std::complex<double>(m.sym_radicand, 0.0));
    m.nu_anti = std::sqrt(std::complex<double>(m.anti_radicand, 0.0));
    m.sym_exists = m.sym_radicand >= 0.0;
    m.anti_exists = m.anti_radicand >= 0.0;
    return m;
}

struct GammaWindow {
    double low;
    double high;
};

/// Open gamma interval -(2 omega/J + 4) < gamma < 4 - 2 omega/J in which one
/// of the two mode families fails to exist. Only defined for theta = 1;
/// empty when the bounds are not finite ordered numbers.
inline std::optional<GammaWindow> chaos_window(const ModelParams& params) {
    if (params.coupling != Coupling::usc) throw NotApplicable("chaos window is only defined for theta = 1");
    if (params.j_coupling == 0.0) throw ConfigError("j_coupling must be nonzero");
    const double ratio = 2.0 * params.omega / params.j_coupling;
    const GammaWindow w{-(ratio + 4.0), 4.0 - ratio};
    if (!std::isfinite(w.low) || !std::isfinite(w.high) || !(w.low < w.high)) return std::nullopt;
    return w;
}

inline void write_modes_csv(std::ostream& out, std::span<const ModeFrequencies> rows) {
    out << "gamma,nu_sym_plus,nu_sym_minus,nu_anti_plus,nu_anti_minus,sym_exists,anti_exists\n";
    const double nan = std::nan("");
    for (const auto& m : rows) {
        // nonexistent branches have no real frequency
        const double s = m.sym_exists ? m.nu_sym.real() : nan;
        const double a = m.anti_exists ? m.nu_anti.real() : nan;
        out << csv::format_double(m.gamma) << ',' << csv::format_double(s) << ',' << csv::format_double(0.0 - s)
            << ',' << csv::format_double(a) << ',' << csv::format_double(0.0 - a) << ',' << (m.sym_exists ? 1 : 0) << ','
            << (m.anti_exists ? 1 : 0) << '\n';
    }
}

inline void write_modes_csv(const std::filesystem::path& path, std::span<const ModeFrequencies> rows) {
    std::ostringstream text;
    write_modes_csv(text, rows);
    csv::write_text_atomically(path, text.str());
}

} // namespace usc_dimer

#endif
