#ifndef USC_DIMER_MODEL_HPP
#define USC_DIMER_MODEL_HPP

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include "errors.hpp"

namespace usc_dimer {

using complex = std::complex<double>;

/// Which coupling model: rotating-wave (DNLS / Bose-Hubbard) or the full
/// ultra-strong coupling with counter-rotating terms.
enum class Coupling : int { rwa = 0, usc = 1 };

inline double theta_of(Coupling c) noexcept { return c == Coupling::usc ? 1.0 : 0.0; }

inline Coupling coupling_from_theta(int theta) {
    if (theta == 0) return Coupling::rwa;
    if (theta == 1) return Coupling::usc;
    throw ConfigError("theta must be 0 or 1, got " + std::to_string(theta));
}

/// Physical parameters of the two-site junction. The dimensionless
/// interaction gamma = gamma_tilde * n0_initial / j_coupling is derived, never stored.
struct ModelParams {
    double omega = 2.0;
    double j_coupling = 1.0;
    double gamma_tilde = 0.0;
    Coupling coupling = Coupling::rwa;
    double n0_initial = 1.0;

    double theta() const noexcept { return theta_of(coupling); }
    double gamma() const noexcept { return gamma_tilde * n0_initial / j_coupling; }

    /// Builds parameters from the dimensionless gamma; requires n0 > 0.
    static ModelParams from_gamma(double omega, double j, double gamma, Coupling coupling, double n0) {
        if (!(n0 > 0.0)) throw ConfigError("n0 must be positive to convert gamma to gamma_tilde");
        if (j == 0.0) throw ConfigError("j_coupling must be nonzero");
        ModelParams p{omega, j, gamma * j / n0, coupling, n0};
        p.validate();
        return p;
    }

    void validate() const {
        if (!std::isfinite(omega) || !std::isfinite(j_coupling) || !std::isfinite(gamma_tilde) ||
            !std::isfinite(n0_initial))
            throw ConfigError("model parameters must be finite");
        if (j_coupling == 0.0) throw ConfigError("j_coupling must be nonzero");
        if (n0_initial < 0.0) throw ConfigError("n0_initial must be non-negative");
        if (coupling != Coupling::rwa && coupling != Coupling::usc)
            throw ConfigError("coupling must be rwa (theta=0) or usc (theta=1)");
    }
};

struct ClassicalState {
    complex psi0{};
    complex psi1{};
    double time = 0.0;
};

struct ClassicalObservables {
    double norm_n = 0.0;
    double imbalance_rho = 0.0;
    double phase_phi = 0.0;  // in (-pi, pi]
    double energy_h = 0.0;
};

/// Real phase-space coordinates (Re psi0, Im psi0, Re psi1, Im psi1).
using PhasePoint = std::array<double, 4>;

inline PhasePoint pack(const ClassicalState& s) noexcept {
    return {s.psi0.real(), s.psi0.imag(), s.psi1.real(), s.psi1.imag()};
}

inline ClassicalState unpack(const PhasePoint& y, double t) noexcept {
    return {complex(y[0], y[1]), complex(y[2], y[3]), t};
}

/// Maps an angle into (-pi, pi].
inline double wrap_phase(double a) noexcept {
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

/// arg with arg(0) := 0 (also for signed zeros).
inline double safe_arg(complex z) noexcept {
    if (z.real() == 0.0 && z.imag() == 0.0) return 0.0;
    return std::arg(z);
}

/// Right-hand side of the equations of motion,
///   d psi_k/dt = -i omega psi_k + i J (psi_{1-k} + theta psi_{1-k}^*) - i gamma_tilde |psi_k|^2 psi_k.
inline std::pair<complex, complex> eom_rhs(const ClassicalState& s, const ModelParams& p) noexcept {
    const complex i(0.0, 1.0);
    const double theta = p.theta();
    const auto site = [&](complex self, complex other) {
        return -i * p.omega * self + i * p.j_coupling * (other + theta * std::conj(other)) -
               i * p.gamma_tilde * std::norm(self) * self;
    };
    return {site(s.psi0, s.psi1), site(s.psi1, s.psi0)};
}

/// Mean-field Hamiltonian; eom_rhs is -i times its gradient with respect to psi_k^*.
inline double classical_energy(const ClassicalState& s, const ModelParams& p) noexcept {
    const double n0 = std::norm(s.psi0);
    const double n1 = std::norm(s.psi1);
    const double onsite = p.omega * (n0 + n1) + 0.5 * p.gamma_tilde * (n0 * n0 + n1 * n1);
    // psi0^* psi1 + c.c. and psi0^* psi1^* + c.c.
    const double hop = 2.0 * (std::conj(s.psi0) * s.psi1).real();
    const double pair = 2.0 * (std::conj(s.psi0) * std::conj(s.psi1)).real();
    return onsite - p.j_coupling * (hop + p.theta() * pair);
}

inline ClassicalObservables observables(const ClassicalState& s, const ModelParams& p) noexcept {
    const double n0 = std::norm(s.psi0);
    const double n1 = std::norm(s.psi1);
    return {n0 + n1, n0 - n1, wrap_phase(safe_arg(s.psi0) - safe_arg(s.psi1)), classical_energy(s, p)};
}

/// Linearized flow: time derivative of a tangent vector (d psi0, d psi1)
/// along the state s.
inline std::pair<complex, complex> eom_tangent(const ClassicalState& s, complex d0, complex d1,
                                               const ModelParams& p) noexcept {
    const complex i(0.0, 1.0);
    const double theta = p.theta();
    const auto site = [&](complex self, complex dself, complex dother) {
        return -i * p.omega * dself + i * p.j_coupling * (dother + theta * std::conj(dother)) -
               i * p.gamma_tilde * (2.0 * std::norm(self) * dself + self * self * std::conj(dself));
    };
    return {site(s.psi0, d0, d1), site(s.psi1, d1, d0)};
}

/// Initial condition with n0 = N0 (1 + rho0) / 2, n1 = N0 (1 - rho0) / 2 and
/// arg psi0 - arg psi1 = phi0. rho0 = 1 gives (sqrt(N0), 0).
inline ClassicalState initial_state(double n0_total, double rho0, double phi0) {
    if (!(n0_total >= 0.0) || !(rho0 >= -1.0 && rho0 <= 1.0) || !std::isfinite(phi0))
        throw ConfigError("initial state requires N0 >= 0, rho0 in [-1, 1] and finite phi0");
    const double a0 = std::sqrt(0.5 * n0_total * (1.0 + rho0));
    const double a1 = std::sqrt(0.5 * n0_total * (1.0 - rho0));
    return {complex(a0, 0.0), std::polar(a1, -phi0), 0.0};
}

} // namespace usc_dimer

#endif
