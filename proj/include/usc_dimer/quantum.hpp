#ifndef USC_DIMER_QUANTUM_HPP
#define USC_DIMER_QUANTUM_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "csv.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace usc_dimer {

struct FockOccupation {
    int n0 = 0;
    int n1 = 0;

    int total() const noexcept { return n0 + n1; }
    friend bool operator==(const FockOccupation&, const FockOccupation&) = default;
};

/// Truncated product basis {|n0, n1> : 0 <= n_k <= n_max}, flat index n0 (n_max + 1) + n1.
class FockBasis {
public:
    explicit FockBasis(int n_max) : n_max_(n_max) {
        if (n_max < 0) throw ConfigError("n_max must be non-negative");
    }

    int n_max() const noexcept { return n_max_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(n_max_ + 1) * (n_max_ + 1); }

    bool contains(FockOccupation s) const noexcept {
        return s.n0 >= 0 && s.n1 >= 0 && s.n0 <= n_max_ && s.n1 <= n_max_;
    }

    std::size_t index(FockOccupation s) const {
        if (!contains(s)) throw ConfigError("Fock state outside the truncated basis");
        return static_cast<std::size_t>(s.n0) * (n_max_ + 1) + static_cast<std::size_t>(s.n1);
    }

    FockOccupation occupation(std::size_t i) const noexcept {
        const auto w = static_cast<std::size_t>(n_max_ + 1);
        return {static_cast<int>(i / w), static_cast<int>(i % w)};
    }

private:
    int n_max_;
};

struct HamiltonianMatrix {
    FockBasis basis{0};
    ModelParams params;
    Eigen::MatrixXcd entries;
};

/// Dense two-mode Hamiltonian
///   H = sum_k [omega n_k + (gamma_tilde/2) n_k (n_k - 1)] - J (a0^+ a1 + theta a0^+ a1^+ + h.c.)
/// assembled on the lower triangle and mirrored.
inline HamiltonianMatrix build_hamiltonian(const ModelParams& params, const FockBasis& basis) {
    params.validate();
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    HamiltonianMatrix h{basis, params, Eigen::MatrixXcd::Zero(dim, dim)};
    const double j = params.j_coupling;
    const double theta = params.theta();
    const int n_max = basis.n_max();

    auto set_lower = [&](std::size_t row, std::size_t col, double value) {
        const auto r = static_cast<Eigen::Index>(std::max(row, col));
        const auto c = static_cast<Eigen::Index>(std::min(row, col));
        h.entries(r, c) = value;
    };

    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const auto [n0, n1] = basis.occupation(i);
        double diag = 0.0;
        for (int n : {n0, n1}) diag += params.omega * n + 0.5 * params.gamma_tilde * n * (n - 1.0);
        h.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag;
        // <n0+1, n1-1| a0^+ a1 |n0, n1>
        if (n0 < n_max && n1 > 0)
            set_lower(basis.index({n0 + 1, n1 - 1}), i, -j * std::sqrt((n0 + 1.0) * n1));
        // <n0+1, n1+1| a0^+ a1^+ |n0, n1>
        if (theta != 0.0 && n0 < n_max && n1 < n_max)
            set_lower(basis.index({n0 + 1, n1 + 1}), i, -j * theta * std::sqrt((n0 + 1.0) * (n1 + 1.0)));
    }
    h.entries.template triangularView<Eigen::StrictlyUpper>() = h.entries.adjoint();
    return h;
}

/// n_max rule of thumb: N0 for number-conserving RWA, max(2 N0, N0 + 10) otherwise.
inline int default_cutoff(Coupling coupling, FockOccupation initial) {
    const int n = initial.total();
    return coupling == Coupling::rwa ? std::max({n, initial.n0, initial.n1}) : std::max(2 * n, n + 10);
}

/// Uniform time grid t_i = i dt, i = 0 .. count-1.
struct TimeGrid {
    double dt = 0.05;
    std::size_t count = 20001;

    static TimeGrid from_span(double t_end, double dt) {
        if (!(dt > 0.0) || !(t_end > 0.0) || !std::isfinite(t_end))
            throw ConfigError("time grid requires positive t_end and dt");
        return {dt, static_cast<std::size_t>(std::floor(t_end / dt * (1.0 + 1e-12))) + 1};
    }

    double at(std::size_t i) const noexcept { return static_cast<double>(i) * dt; }
};

struct EvolveOptions {
    double leakage_tol = 1e-6;
    bool allow_unconverged = false;  // return a flagged result instead of throwing
};

struct QuantumEvolution {
    std::vector<double> times;
    std::vector<double> n0_t;
    std::vector<double> n1_t;
    std::vector<double> norm_t;
    std::vector<double> leakage_t;
    double max_leakage = 0.0;
    bool converged = true;
    std::size_t sector_dim = 0;

    std::vector<double> rho_t() const {
        std::vector<double> r(times.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = n0_t[i] - n1_t[i];
        return r;
    }

    std::vector<double> total_t() const {
        std::vector<double> r(times.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = n0_t[i] + n1_t[i];
        return r;
    }
};

namespace detail {

/// States reachable from `start` through nonzero matrix elements, ascending.
inline std::vector<std::size_t> connected_sector(const Eigen::MatrixXcd& h, std::size_t start) {
    const auto dim = static_cast<std::size_t>(h.rows());
    std::vector<char> seen(dim, 0);
    std::vector<std::size_t> sector;
    std::queue<std::size_t> todo;
    todo.push(start);
    seen[start] = 1;
    while (!todo.empty()) {
        const std::size_t i = todo.front();
        todo.pop();
        sector.push_back(i);
        for (std::size_t k = 0; k < dim; ++k) {
            if (!seen[k] && h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) != complex(0.0)) {
                seen[k] = 1;
                todo.push(k);
            }
        }
    }
    std::sort(sector.begin(), sector.end());
    return sector;
}

/// True when |n0, n1> has a nonzero matrix element of the untruncated
/// Hamiltonian to a state outside the cutoff.
inline bool touches_cutoff(FockOccupation s, int n_max, double theta) {
    if (s.n0 == n_max && s.n1 > 0) return true;   // a0^+ a1
    if (s.n1 == n_max && s.n0 > 0) return true;   // a1^+ a0
    if (theta != 0.0 && (s.n0 == n_max || s.n1 == n_max)) return true;  // a0^+ a1^+
    return false;
}

template <class Matrix>
void propagate_sector(const Matrix& hs, std::size_t initial_local, const std::vector<double>& occ0,
                      const std::vector<double>& occ1, const std::vector<double>& boundary,
                      const TimeGrid& grid, QuantumEvolution& out) {
    using Scalar = typename Matrix::Scalar;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::cutoff, "Hamiltonian diagonalization failed");
    const auto dim = hs.rows();
    const Eigen::VectorXd& energies = es.eigenvalues();
    // c_a = <a|psi(0)> for the basis vector psi(0) = e_initial.
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> overlap =
        es.eigenvectors().row(static_cast<Eigen::Index>(initial_local)).adjoint();

    double cmax = overlap.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> active;
    for (Eigen::Index a = 0; a < dim; ++a)
        if (std::abs(overlap(a)) > 1e-16 * cmax) active.push_back(a);
    const auto k = static_cast<Eigen::Index>(active.size());
    Matrix v(dim, k);
    Eigen::VectorXcd c(k);
    Eigen::VectorXd e(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        v.col(a) = es.eigenvectors().col(active[a]);
        c(a) = overlap(active[a]);
        e(a) = energies(active[a]);
    }

    Eigen::Map<const Eigen::VectorXd> w0(occ0.data(), dim), w1(occ1.data(), dim), wb(boundary.data(), dim);
    constexpr Eigen::Index block = 256;
    const auto n_times = static_cast<Eigen::Index>(grid.count);
    Eigen::MatrixXd phase_re(k, block), phase_im(k, block), prob(dim, block);
    for (Eigen::Index start = 0; start < n_times; start += block) {
        const Eigen::Index nb = std::min(block, n_times - start);
        for (Eigen::Index b = 0; b < nb; ++b) {
            const double t = grid.at(static_cast<std::size_t>(start + b));
            for (Eigen::Index a = 0; a < k; ++a) {
                const complex z = c(a) * std::polar(1.0, -e(a) * t);
                phase_re(a, b) = z.real();
                phase_im(a, b) = z.imag();
            }
        }
        if constexpr (std::is_same_v<Scalar, double>) {
            const Eigen::MatrixXd re = v * phase_re.leftCols(nb);
            const Eigen::MatrixXd im = v * phase_im.leftCols(nb);
            prob.leftCols(nb) = re.cwiseAbs2() + im.cwiseAbs2();
        } else {
            const Eigen::MatrixXcd z =
                v * (phase_re.leftCols(nb).template cast<complex>() +
                     complex(0.0, 1.0) * phase_im.leftCols(nb).template cast<complex>());
            prob.leftCols(nb) = z.cwiseAbs2();
        }
        for (Eigen::Index b = 0; b < nb; ++b) {
            const auto col = prob.col(b);
            out.n0_t.push_back(w0.dot(col));
            out.n1_t.push_back(w1.dot(col));
            out.norm_t.push_back(col.sum());
            out.leakage_t.push_back(wb.dot(col));
        }
    }
}

} // namespace detail

/// Unitary evolution of the product Fock state `initial` via the full
/// eigendecomposition of H restricted to the invariant sector containing it
/// (a fixed total N for theta = 0, a fixed N parity for theta = 1).
inline QuantumEvolution evolve(const HamiltonianMatrix& h, FockOccupation initial, const TimeGrid& grid,
                               const EvolveOptions& options = {}) {
    const FockBasis& basis = h.basis;
    if (!basis.contains(initial)) throw ConfigError("initial Fock state lies outside the truncated basis");
    if (grid.count == 0 || !(grid.dt > 0.0)) throw ConfigError("empty time grid");

    const auto sector = detail::connected_sector(h.entries, basis.index(initial));
    const auto dim = static_cast<Eigen::Index>(sector.size());
    std::vector<double> occ0(sector.size()), occ1(sector.size()), boundary(sector.size());
    std::size_t initial_local = 0;
    bool real = true;
    for (std::size_t a = 0; a < sector.size(); ++a) {
        const auto s = basis.occupation(sector[a]);
        occ0[a] = s.n0;
        occ1[a] = s.n1;
        boundary[a] = detail::touches_cutoff(s, basis.n_max(), h.params.theta()) ? 1.0 : 0.0;
        if (s == initial) initial_local = a;
        for (std::size_t b = 0; b < sector.size(); ++b)
            real = real && h.entries(static_cast<Eigen::Index>(sector[a]), static_cast<Eigen::Index>(sector[b]))
                                   .imag() == 0.0;
    }

    QuantumEvolution out;
    out.sector_dim = sector.size();
    out.times.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) out.times[i] = grid.at(i);
    for (auto* v : {&out.n0_t, &out.n1_t, &out.norm_t, &out.leakage_t}) v->reserve(grid.count);

    if (real) {
        Eigen::MatrixXd hs(dim, dim);
        for (Eigen::Index a = 0; a < dim; ++a)
            for (Eigen::Index b = 0; b < dim; ++b)
                hs(a, b) = h.entries(static_cast<Eigen::Index>(sector[a]), static_cast<Eigen::Index>(sector[b])).real();
        detail::propagate_sector(hs, initial_local, occ0, occ1, boundary, grid, out);
    } else {
        Eigen::MatrixXcd hs(dim, dim);
        for (Eigen::Index a = 0; a < dim; ++a)
            for (Eigen::Index b = 0; b < dim; ++b)
                hs(a, b) = h.entries(static_cast<Eigen::Index>(sector[a]), static_cast<Eigen::Index>(sector[b]));
        detail::propagate_sector(hs, initial_local, occ0, occ1, boundary, grid, out);
    }

    out.max_leakage = *std::max_element(out.leakage_t.begin(), out.leakage_t.end());
    out.converged = out.max_leakage < options.leakage_tol;
    if (!out.converged && !options.allow_unconverged) {
        std::ostringstream msg;
        msg << "Fock cutoff n_max=" << basis.n_max() << " unconverged: boundary leakage " << out.max_leakage
            << " exceeds " << options.leakage_tol << "; raise n_max";
        throw UnconvergedCutoff(msg.str(), out.max_leakage);
    }
    return out;
}

/// Full spectrum of the truncated Hamiltonian, ascending.
inline Eigen::VectorXd eigenvalues(const HamiltonianMatrix& h) {
    if (h.entries.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.entries.real(), Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

struct CutoffReport {
    int n_max = 0;
    double max_leakage = 0.0;
    double drift_to_next = std::numeric_limits<double>::quiet_NaN();  // max_t |<n0>(n_max) - <n0>(next)|
    bool converged = false;
};

struct ConvergenceScan {
    std::vector<CutoffReport> reports;
    std::optional<int> converged_n_max;
};

/// Evolves at each cutoff and compares successive cutoffs. A cutoff is
/// converged when its leakage and its drift to the next cutoff are both
/// below `threshold`.
inline ConvergenceScan convergence_scan(const ModelParams& params, FockOccupation initial, const TimeGrid& grid,
                                        const std::vector<int>& n_max_list, double threshold = 1e-6) {
    if (n_max_list.empty()) throw ConfigError("convergence scan needs at least one cutoff");
    if (!std::is_sorted(n_max_list.begin(), n_max_list.end()) ||
        std::adjacent_find(n_max_list.begin(), n_max_list.end()) != n_max_list.end())
        throw ConfigError("cutoff list must be strictly increasing");

    ConvergenceScan scan;
    std::vector<QuantumEvolution> runs;
    for (int n_max : n_max_list) {
        const auto h = build_hamiltonian(params, FockBasis(n_max));
        runs.push_back(evolve(h, initial, grid, {threshold, true}));
        scan.reports.push_back({n_max, runs.back().max_leakage});
    }
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        double drift = 0.0;
        for (std::size_t t = 0; t < grid.count; ++t)
            drift = std::max(drift, std::abs(runs[i].n0_t[t] - runs[i + 1].n0_t[t]));
        scan.reports[i].drift_to_next = drift;
        scan.reports[i].converged = scan.reports[i].max_leakage < threshold && drift < threshold;
        if (scan.reports[i].converged && !scan.converged_n_max) scan.converged_n_max = scan.reports[i].n_max;
    }
    return scan;
}

inline void write_evolution_csv(const std::filesystem::path& path, const QuantumEvolution& ev) {
    csv::Writer w(path, "t,n0,n1,rho,N,leakage");
    for (std::size_t i = 0; i < ev.times.size(); ++i)
        w.row({ev.times[i], ev.n0_t[i], ev.n1_t[i], ev.n0_t[i] - ev.n1_t[i], ev.n0_t[i] + ev.n1_t[i],
               ev.leakage_t[i]});
    w.commit();
}

inline void write_eigenvalues_csv(const std::filesystem::path& path, const Eigen::VectorXd& values) {
    csv::Writer w(path, "index,eigenvalue");
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        w.field(static_cast<std::size_t>(i)).field(values(i));
        w.end_row();
    }
    w.commit();
}

} // namespace usc_dimer

#endif
