#ifndef USC_DIMER_ANALYSIS_HPP
#define USC_DIMER_ANALYSIS_HPP

#include "lyapunov.hpp"
#include "modes.hpp"
#include "poincare.hpp"
#include "spectral.hpp"
#include "tunneling.hpp"

#endif
