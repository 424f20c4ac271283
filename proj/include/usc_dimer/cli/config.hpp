#ifndef USC_DIMER_CLI_CONFIG_HPP
#define USC_DIMER_CLI_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../errors.hpp"
#include "../model.hpp"
#include "../quantum.hpp"
#include "../semiclassical.hpp"
#include "../spectral.hpp"
#include "../tunneling.hpp"

namespace usc_dimer::cli {

enum class Mode { classical, quantum };

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("invalid number for '" + std::string(key) + "': '" + t + "'");
    if (!std::isfinite(v)) throw ConfigError("'" + std::string(key) + "' must be finite");
    return v;
}

inline long long parse_int(std::string_view key, std::string_view text) {
    const double v = parse_double(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e15)
        throw ConfigError("'" + std::string(key) + "' must be an integer");
    return static_cast<long long>(v);
}

inline bool parse_bool(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    if (t == "1" || t == "true" || t == "yes") return true;
    if (t == "0" || t == "false" || t == "no") return false;
    throw ConfigError("invalid boolean for '" + std::string(key) + "': '" + t + "'");
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace detail

/// One simulation: which model, its parameters, and what to write.
/// Populated from flat `key = value` text; see set() for the keys.
struct RunConfig {
    Mode mode = Mode::classical;
    Coupling coupling = Coupling::rwa;
    double omega = 2.0;
    std::optional<double> j_over_omega;  // when set, omega = j / j_over_omega
    double j = 1.0;
    double gamma = 0.0;  // dimensionless; gamma_tilde = gamma j / n0
    double n0 = 1.0;
    double rho0 = 1.0;  // classical initial imbalance rho(0)/N0
    double phi0 = 0.0;  // classical initial phase difference
    double t_end = 100.0;
    std::optional<double> dt_sample;  // default 0.01 classical, 0.05 quantum
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    int n_max = 0;  // 0: automatic cutoff
    double leakage_tol = 1e-6;
    bool allow_unconverged = false;
    Window window = Window::rectangular;
    bool positive_only = false;
    std::size_t bins = 60;
    std::optional<double> bin_width;
    double renorm_interval = 1.0;
    std::vector<std::string> analyses;
    std::string out = "usc_dimer";

    double effective_omega() const { return j_over_omega ? j / *j_over_omega : omega; }
    double sample_step() const { return dt_sample ? *dt_sample : (mode == Mode::quantum ? 0.05 : 0.01); }

    bool wants(std::string_view analysis) const {
        for (const auto& a : analyses)
            if (a == analysis) return true;
        return false;
    }

    void set(std::string_view key_in, std::string_view value) {
        const std::string key = detail::trim(key_in);
        using namespace detail;
        if (key == "mode") {
            const auto v = trim(value);
            if (v == "classical") mode = Mode::classical;
            else if (v == "quantum") mode = Mode::quantum;
            else throw ConfigError("mode must be 'classical' or 'quantum', got '" + v + "'");
        } else if (key == "theta") {
            coupling = coupling_from_theta(static_cast<int>(parse_int(key, value)));
        } else if (key == "omega") {
            omega = parse_double(key, value);
            j_over_omega.reset();
        } else if (key == "j_over_omega") {
            j_over_omega = parse_double(key, value);
        } else if (key == "j" || key == "j_coupling") {
            j = parse_double(key, value);
        } else if (key == "gamma") {
            gamma = parse_double(key, value);
        } else if (key == "n0" || key == "n0_initial") {
            n0 = parse_double(key, value);
        } else if (key == "rho0") {
            rho0 = parse_double(key, value);
        } else if (key == "phi0") {
            phi0 = parse_double(key, value);
        } else if (key == "t_end") {
            t_end = parse_double(key, value);
        } else if (key == "dt_sample") {
            dt_sample = parse_double(key, value);
        } else if (key == "rel_tol") {
            rel_tol = parse_double(key, value);
        } else if (key == "abs_tol") {
            abs_tol = parse_double(key, value);
        } else if (key == "n_max") {
            n_max = static_cast<int>(parse_int(key, value));
        } else if (key == "leakage_tol") {
            leakage_tol = parse_double(key, value);
        } else if (key == "allow_unconverged") {
            allow_unconverged = parse_bool(key, value);
        } else if (key == "window") {
            const auto v = trim(value);
            if (v == "rectangular" || v == "none") window = Window::rectangular;
            else if (v == "hann") window = Window::hann;
            else throw ConfigError("window must be 'rectangular' or 'hann'");
        } else if (key == "positive_only") {
            positive_only = parse_bool(key, value);
        } else if (key == "bins") {
            const auto b = parse_int(key, value);
            if (b < 1) throw ConfigError("bins must be at least 1");
            bins = static_cast<std::size_t>(b);
        } else if (key == "bin_width") {
            bin_width = parse_double(key, value);
        } else if (key == "renorm_interval") {
            renorm_interval = parse_double(key, value);
        } else if (key == "analyses") {
            analyses.clear();
            for (auto& a : split(value, ','))
                if (!a.empty()) analyses.push_back(a);
        } else if (key == "out") {
            out = trim(value);
        } else {
            throw ConfigError("unknown configuration key '" + key + "'");
        }
    }

    /// Applies a `key=value` override.
    void apply_override(std::string_view assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos) throw ConfigError("override must look like key=value: '" + std::string(assignment) + "'");
        set(assignment.substr(0, eq), assignment.substr(eq + 1));
    }

    ModelParams model() const { return ModelParams::from_gamma(effective_omega(), j, gamma, coupling, n0); }

    ClassicalState classical_initial() const { return initial_state(n0, rho0, phi0); }

    FockOccupation quantum_initial() const { return {static_cast<int>(n0), 0}; }

    int cutoff() const { return n_max > 0 ? n_max : default_cutoff(coupling, quantum_initial()); }

    IntegratorConfig integrator() const { return {rel_tol, abs_tol, sample_step(), t_end, true}; }

    TimeGrid time_grid() const { return TimeGrid::from_span(t_end, sample_step()); }

    HistogramSpec histogram() const { return {bins, bin_width}; }

    void validate() const {
        if (j_over_omega && !(*j_over_omega > 0.0)) throw ConfigError("j_over_omega must be positive");
        if (!(n0 > 0.0)) throw ConfigError("n0 must be positive");
        if (!(rho0 >= -1.0 && rho0 <= 1.0)) throw ConfigError("rho0 must lie in [-1, 1]");
        if (!(renorm_interval > 0.0)) throw ConfigError("renorm_interval must be positive");
        if (bin_width && !(*bin_width > 0.0)) throw ConfigError("bin_width must be positive");
        if (!(leakage_tol > 0.0)) throw ConfigError("leakage_tol must be positive");
        if (out.empty()) throw ConfigError("output prefix must not be empty");
        model().validate();
        integrator().validate();
        if (mode == Mode::quantum) {
            if (n0 != std::floor(n0)) throw ConfigError("quantum mode needs an integer n0");
            if (n_max < 0) throw ConfigError("n_max must be non-negative");
            if (cutoff() < static_cast<int>(n0)) throw ConfigError("n_max must be at least n0");
            if (cutoff() > 60) throw ConfigError("n_max above 60 exceeds the dense-diagonalization budget");
        }
        for (const auto& a : analyses) {
            const bool known = a == "spectrum" || a == "tunneling" || a == "eigenvalues" || a == "poincare" ||
                               a == "lyapunov";
            if (!known) throw ConfigError("unknown analysis '" + a + "'");
            if (mode == Mode::quantum && (a == "poincare" || a == "lyapunov"))
                throw ConfigError("analysis '" + a + "' requires classical mode");
            if (mode == Mode::classical && a == "eigenvalues")
                throw ConfigError("analysis 'eigenvalues' requires quantum mode");
        }
    }
};

/// Parses `key = value` lines; `#` starts a comment.
inline void apply_config_text(RunConfig& cfg, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (detail::trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            cfg.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg;
    apply_config_text(cfg, ss.str());
    return cfg;
}

/// `min:max:count` with count >= 1; count = 1 yields {min}.
struct Range {
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 1;

    double at(std::size_t i) const noexcept {
        if (count == 1) return min;
        if (i + 1 == count) return max;
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }

    static Range parse(std::string_view text, std::size_t min_count = 1) {
        const auto parts = detail::split(text, ':');
        if (parts.size() != 3) throw ConfigError("range must look like min:max:count, got '" + std::string(text) + "'");
        Range r{detail::parse_double("range min", parts[0]), detail::parse_double("range max", parts[1]), 0};
        const auto c = detail::parse_int("range count", parts[2]);
        if (c < static_cast<long long>(min_count))
            throw ConfigError("range count must be at least " + std::to_string(min_count));
        r.count = static_cast<std::size_t>(c);
        return r;
    }
};

enum class Reducer { rho_min, spectral_density, tau_first, lyapunov };

inline Reducer parse_reducer(std::string_view name) {
    if (name == "rho_min") return Reducer::rho_min;
    if (name == "spectral_density") return Reducer::spectral_density;
    if (name == "tau_first") return Reducer::tau_first;
    if (name == "lyapunov") return Reducer::lyapunov;
    throw ConfigError("unknown reducer '" + std::string(name) + "'");
}

inline std::string_view reducer_name(Reducer r) {
    switch (r) {
    case Reducer::rho_min: return "rho_min";
    case Reducer::spectral_density: return "spectral_density";
    case Reducer::tau_first: return "tau_first";
    case Reducer::lyapunov: return "lyapunov";
    }
    return "?";
}

struct SweepAxis {
    std::string name;
    Range range;

    /// `name:min:max:count`
    static SweepAxis parse(std::string_view text) {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos) throw ConfigError("axis must look like name:min:max:count");
        SweepAxis a{detail::trim(text.substr(0, colon)), Range::parse(text.substr(colon + 1), 2)};
        static constexpr std::string_view numeric[] = {"gamma", "j_over_omega", "omega", "j", "n0", "rho0",
                                                       "phi0", "t_end", "dt_sample"};
        bool ok = false;
        for (auto n : numeric) ok = ok || a.name == n;
        if (!ok) throw ConfigError("axis '" + a.name + "' is not a numeric run parameter");
        return a;
    }
};

struct SweepConfig {
    SweepAxis axis1;
    SweepAxis axis2;
    RunConfig base;
    Reducer reducer = Reducer::rho_min;
    std::size_t workers = 1;

    /// Run configuration at grid cell (i, j).
    RunConfig cell(std::size_t i, std::size_t j) const {
        RunConfig c = base;
        c.set(axis1.name, csv::format_double(axis1.range.at(i)));
        c.set(axis2.name, csv::format_double(axis2.range.at(j)));
        return c;
    }

    void validate() const {
        if (axis1.name == axis2.name) throw ConfigError("sweep axes must differ");
        if (axis1.range.count < 2 || axis2.range.count < 2) throw ConfigError("sweep axes need count >= 2");
        if (reducer == Reducer::lyapunov && base.mode != Mode::classical)
            throw ConfigError("lyapunov reducer requires classical mode");
        // Validate corner cells up front so a malformed sweep fails before any work.
        for (std::size_t i : {std::size_t{0}, axis1.range.count - 1})
            for (std::size_t j : {std::size_t{0}, axis2.range.count - 1}) cell(i, j).validate();
    }
};

} // namespace usc_dimer::cli

#endif
