#ifndef USC_DIMER_LYAPUNOV_HPP
#define USC_DIMER_LYAPUNOV_HPP

#include "model.hpp"
#include "semiclassical.hpp"

namespace usc_dimer {

struct LyapunovConfig {
    IntegratorConfig integrator{1e-10, 1e-12, 0.1, 1000.0, false};
    double renorm_interval = 1.0;
    TangentVector tangent0{complex(0.5, 0.5), complex(0.5, 0.5)};
};

/// Largest Lyapunov exponent (units of the time axis, i.e. J when J = 1)
/// from Benettin renormalization of a single tangent vector.
inline double lyapunov_max(const ClassicalState& initial, const ModelParams& params, const LyapunovConfig& cfg = {}) {
    return integrate_with_tangent(initial, cfg.tangent0, params, cfg.integrator, cfg.renorm_interval).lyapunov();
}

} // namespace usc_dimer

#endif
