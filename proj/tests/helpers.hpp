#pragma once

#include "sorterlab/pulse.hpp"
#include "sorterlab/scatter.hpp"
#include "sorterlab/units.hpp"

namespace sorterlab::testing {

// 700 ps intensity FWHM in 1/(Gamma/2) units with the 324 ps lifetime.
inline constexpr double kLabFwhm = 700.0 / 648.0;

inline Pulse lab_pulse(int n = 256, double span = 20.0, double detuning = 0.0) {
    return gaussian_pulse(make_frequency_grid(n, span), detuning, kLabFwhm, 0.0);
}

inline EmitterParams lab_emitter() {
    EmitterParams e;
    e.beta = 0.75;
    e.dephasing = 0.035;
    e.spectral_diffusion = 0.67;
    return e;
}

inline NormalizedUnits lab_units() { return NormalizedUnits::from_lifetime_ps(324.0); }

} // namespace sorterlab::testing
