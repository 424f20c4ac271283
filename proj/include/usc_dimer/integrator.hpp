#ifndef USC_DIMER_INTEGRATOR_HPP
#define USC_DIMER_INTEGRATOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace usc_dimer {

template <std::size_t N>
using RealVec = std::array<double, N>;

/// Continuous extension of one accepted Dormand-Prince step (4th order).
template <std::size_t N>
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<RealVec<N>, 5> coeff{};

    double t1() const noexcept { return t0 + h; }

    RealVec<N> eval(double t) const noexcept {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        RealVec<N> y;
        for (std::size_t i = 0; i < N; ++i) {
            y[i] = coeff[0][i] +
                   s * (coeff[1][i] + s1 * (coeff[2][i] + s * (coeff[3][i] + s1 * coeff[4][i])));
        }
        return y;
    }
};

struct StepControl {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double min_step = 0.0;  // StepSizeUnderflow below this
    double max_step = std::numeric_limits<double>::infinity();
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

} // namespace dopri

/// Embedded Runge-Kutta 5(4) pair (Dormand-Prince) with FSAL and dense output.
///
/// Rhs is callable as rhs(t, y, dydt) with RealVec<N> arguments. Steps may run
/// in either time direction; advance_to lands exactly on the requested time.
template <std::size_t N, class Rhs>
class Dopri5 {
public:
    using Vec = RealVec<N>;

    Dopri5(Rhs rhs, double t0, const Vec& y0, StepControl control)
        : rhs_(std::move(rhs)), control_(control), t_(t0), y_(y0) {
        rhs_(t_, y_, k1_);
    }

    double time() const noexcept { return t_; }
    const Vec& state() const noexcept { return y_; }
    std::size_t accepted_steps() const noexcept { return accepted_; }
    std::size_t rejected_steps() const noexcept { return rejected_; }

    /// Replaces the current state (e.g. after renormalizing a tangent vector).
    void reset_state(const Vec& y) {
        y_ = y;
        rhs_(t_, y_, k1_);
    }

    /// Integrates to t_target, invoking on_step(const DenseSegment<N>&) after each accepted step.
    template <class OnStep>
    void advance_to(double t_target, OnStep&& on_step) {
        const double dir = t_target >= t_ ? 1.0 : -1.0;
        if (h_ == 0.0) h_ = initial_step(dir, std::abs(t_target - t_));
        h_ = dir * std::abs(h_);

        std::array<Vec, 7> k;
        Vec y_new, y_stage, err_vec;
        while (dir * (t_target - t_) > 0.0) {
            double h = dir * std::min({std::abs(h_), control_.max_step, std::abs(t_target - t_)});
            const bool last = std::abs(h) >= std::abs(t_target - t_);

            using namespace dopri;
            k[0] = k1_;
            stage(h, k, y_stage, k[1], c2, {a21});
            stage(h, k, y_stage, k[2], c3, {a31, a32});
            stage(h, k, y_stage, k[3], c4, {a41, a42, a43});
            stage(h, k, y_stage, k[4], c5, {a51, a52, a53, a54});
            stage(h, k, y_stage, k[5], 1.0, {a61, a62, a63, a64, a65});
            for (std::size_t i = 0; i < N; ++i) {
                y_new[i] = y_[i] + h * (dopri::a71 * k[0][i] + dopri::a73 * k[2][i] +
                                        dopri::a74 * k[3][i] + dopri::a75 * k[4][i] +
                                        dopri::a76 * k[5][i]);
            }
            const double t_new = last ? t_target : t_ + h;
            rhs_(t_new, y_new, k[6]);

            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                err_vec[i] = h * (dopri::e1 * k[0][i] + dopri::e3 * k[2][i] + dopri::e4 * k[3][i] +
                                  dopri::e5 * k[4][i] + dopri::e6 * k[5][i] + dopri::e7 * k[6][i]);
                const double sc = control_.abs_tol +
                                  control_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
                err += (err_vec[i] / sc) * (err_vec[i] / sc);
            }
            err = std::sqrt(err / static_cast<double>(N));
            if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();

            if (err <= 1.0) {
                DenseSegment<N> seg;
                seg.t0 = t_;
                seg.h = t_new - t_;
                for (std::size_t i = 0; i < N; ++i) {
                    const double ydiff = y_new[i] - y_[i];
                    const double bspl = h * k[0][i] - ydiff;
                    seg.coeff[0][i] = y_[i];
                    seg.coeff[1][i] = ydiff;
                    seg.coeff[2][i] = bspl;
                    seg.coeff[3][i] = ydiff - h * k[6][i] - bspl;
                    seg.coeff[4][i] = h * (dopri::d1 * k[0][i] + dopri::d3 * k[2][i] +
                                           dopri::d4 * k[3][i] + dopri::d5 * k[4][i] +
                                           dopri::d6 * k[5][i] + dopri::d7 * k[6][i]);
                }
                t_ = t_new;
                y_ = y_new;
                k1_ = k[6];
                ++accepted_;
                on_step(std::as_const(seg));

                double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                if (just_rejected_) fac = std::min(fac, 1.0);
                // A step clamped to land on t_target keeps the controller's proposal.
                if (std::abs(h) >= std::abs(h_)) h_ = h * fac;
                just_rejected_ = false;
            } else {
                ++rejected_;
                just_rejected_ = true;
                const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
                h_ = h * fac;
                if (std::abs(h_) < control_.min_step) {
                    std::ostringstream msg;
                    msg << "step size underflow at t=" << t_ << " (h=" << std::abs(h_)
                        << " < " << control_.min_step << ")";
                    throw StepSizeUnderflow(msg.str(), t_);
                }
            }
        }
    }

    /// One unconditional step of size h from (t, y), no error control. Used
    /// for convergence-order checks.
    static Vec fixed_step(Rhs& rhs, double t, const Vec& y, double h) {
        std::array<Vec, 7> k;
        Vec ys;
        rhs(t, y, k[0]);
        const auto st = [&](double c, std::initializer_list<double> a, Vec& out) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                std::size_t j = 0;
                for (double aj : a) acc += aj * k[j++][i];
                ys[i] = y[i] + h * acc;
            }
            rhs(t + c * h, ys, out);
        };
        st(dopri::c2, {dopri::a21}, k[1]);
        st(dopri::c3, {dopri::a31, dopri::a32}, k[2]);
        st(dopri::c4, {dopri::a41, dopri::a42, dopri::a43}, k[3]);
        st(dopri::c5, {dopri::a51, dopri::a52, dopri::a53, dopri::a54}, k[4]);
        st(1.0, {dopri::a61, dopri::a62, dopri::a63, dopri::a64, dopri::a65}, k[5]);
        Vec out;
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = y[i] + h * (dopri::a71 * k[0][i] + dopri::a73 * k[2][i] + dopri::a74 * k[3][i] +
                                 dopri::a75 * k[4][i] + dopri::a76 * k[5][i]);
        }
        return out;
    }

private:
    void stage(double h, const std::array<Vec, 7>& k, Vec& ys, Vec& out, double c,
               std::initializer_list<double> a) {
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            std::size_t j = 0;
            for (double aj : a) acc += aj * k[j++][i];
            ys[i] = y_[i] + h * acc;
        }
        rhs_(t_ + c * h, ys, out);
    }

    // Hairer-Wanner starting step heuristic.
    double initial_step(double dir, double span) {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = control_.abs_tol + control_.rel_tol * std::abs(y_[i]);
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1 += (k1_[i] / sc) * (k1_[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        Vec y1, f1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + dir * h0 * k1_[i];
        rhs_(t_ + dir * h0, y1, f1);
        double d2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = control_.abs_tol + control_.rel_tol * std::abs(y_[i]);
            d2 += ((f1[i] - k1_[i]) / sc) * ((f1[i] - k1_[i]) / sc);
        }
        d2 = std::sqrt(d2 / N) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, span});
    }

    Rhs rhs_;
    StepControl control_;
    double t_;
    Vec y_;
    Vec k1_{};
    double h_ = 0.0;
    bool just_rejected_ = false;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

/// Piecewise dense solution assembled from accepted steps (forward time only).
template <std::size_t N>
class DenseSolution {
public:
    void push(const DenseSegment<N>& seg) { segments_.push_back(seg); }
    bool empty() const noexcept { return segments_.empty(); }
    double t_begin() const noexcept { return segments_.front().t0; }
    double t_end() const noexcept { return segments_.back().t1(); }
    std::size_t size() const noexcept { return segments_.size(); }

    RealVec<N> eval(double t) const {
        auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double v, const DenseSegment<N>& s) { return v < s.t0; });
        if (it != segments_.begin()) --it;
        return it->eval(t);
    }

private:
    std::vector<DenseSegment<N>> segments_;
};

} // namespace usc_dimer

#endif
