#include "sorterlab/pulse.hpp"

#include "sorterlab/errors.hpp"

#include <cmath>

namespace sorterlab {

Pulse gaussian_pulse(const FrequencyGrid& grid, double center_detuning,
                     double duration_fwhm, double mean_photon_number) {
    if (!(duration_fwhm > 0.0))
        throw ConfigError("pulse duration_fwhm must be positive");
    if (grid.n_points == 0)
        throw ConfigError("pulse requires a constructed frequency grid");

    // Time-domain field e^{-t^2/(4 sigma_t^2)} gives intensity FWHM
    // 2*sqrt(2 ln 2)*sigma_t; spectral amplitude is exp(-sigma_t^2 omega^2)
    // with analytic norm (2 sigma_t^2/pi)^{1/4}.
    const double sigma_t = duration_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double sigma_w = 1.0 / (2.0 * sigma_t); // spectral standard deviation of |phi|^2

    if (grid.span < 6.0 * sigma_w + std::abs(center_detuning))
        throw TruncationError("grid span " + std::to_string(grid.span) +
                                  " does not cover 6 spectral standard deviations of the pulse",
                              std::erfc((grid.span - std::abs(center_detuning)) / (std::sqrt(2.0) * sigma_w)));

    Pulse p;
    p.grid = grid;
    p.center_detuning = center_detuning;
    p.duration_fwhm = duration_fwhm;
    p.mean_photon_number = mean_photon_number;

    const double amp_norm = std::pow(2.0 * sigma_t * sigma_t / M_PI, 0.25);
    p.amplitude = amp_norm *
                  (-(sigma_t * sigma_t) * (grid.omega - center_detuning).square()).exp();

    // Spectral mass outside the grid, evaluated analytically (the discrete
    // quadrature sum also carries sampling error, which is not tail mass).
    const double tail =
        0.5 * std::erfc((grid.span - center_detuning) / (std::sqrt(2.0) * sigma_w)) +
        0.5 * std::erfc((grid.span + center_detuning) / (std::sqrt(2.0) * sigma_w));
    if (tail > 1e-6)
        throw TruncationError("pulse tail mass outside grid exceeds 1e-6", tail);

    // Renormalize to exact unit norm under the grid quadrature.
    const double grid_mass = p.amplitude.abs2().sum() * grid.spacing;
    p.amplitude /= std::sqrt(grid_mass);
    return p;
}

PoissonWeights poisson_weights(double mean_photon_number, int cutoff) {
    if (!(mean_photon_number > 0.0))
        throw ConfigError("mean photon number must be positive");
    if (cutoff != 1 && cutoff != 2)
        throw ConfigError("poisson_weights cutoff must be 1 or 2");
    PoissonWeights w;
    double term = std::exp(-mean_photon_number);
    double total = 0.0;
    for (int m = 0; m <= cutoff; ++m) {
        w.weights.push_back(term);
        total += term;
        term *= mean_photon_number / (m + 1);
    }
    w.tail_mass = 1.0 - total;
    return w;
}

} // namespace sorterlab
