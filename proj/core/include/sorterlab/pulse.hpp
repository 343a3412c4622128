#pragma once

#include "sorterlab/grid.hpp"

#include <vector>

namespace sorterlab {

// Gaussian input wavepacket on a frequency grid. amplitude is unit-norm under
// the grid quadrature: sum |phi|^2 * spacing = 1. duration_fwhm is the
// intensity full width at half maximum of the time-domain pulse, in 1/(Gamma/2)
// units (the experimental 700 ps preset is 700/648 = 1.0802 units).
struct Pulse {
    FrequencyGrid grid;
    double center_detuning = 0.0;
    double duration_fwhm = 0.0;
    double mean_photon_number = 0.0;
    ArrayXcd amplitude;

    double norm2() const { return (amplitude.abs2().sum()) * grid.spacing; }
};

// Unit-norm Gaussian centered at `center_detuning`. Throws TruncationError if
// more than 1e-6 of the spectral mass falls outside the grid, ConfigError for
// non-positive duration.
Pulse gaussian_pulse(const FrequencyGrid& grid, double center_detuning,
                     double duration_fwhm, double mean_photon_number);

// Poisson number weights e^{-nbar} nbar^m / m! for m = 0..cutoff, plus the
// truncated tail mass 1 - sum(weights). cutoff must be 1 or 2.
struct PoissonWeights {
    std::vector<double> weights; // index = photon number
    double tail_mass = 0.0;
};
PoissonWeights poisson_weights(double mean_photon_number, int cutoff = 2);

} // namespace sorterlab
