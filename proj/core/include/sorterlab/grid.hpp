#pragma once

#include <Eigen/Dense>
#include <complex>

namespace sorterlab {

using Complex = std::complex<double>;
using ArrayXd = Eigen::ArrayXd;
using ArrayXcd = Eigen::ArrayXcd;
using MatrixXcd = Eigen::MatrixXcd;

// Uniform symmetric frequency grid in Gamma/2 units. Midpoint scheme: bin
// centers sit at (i + 1/2 - n/2) * spacing, so the grid is symmetric about
// zero with no bin exactly at zero. This makes the two-photon convolution
// index-exact: omega_i + omega_j lands on the midpoint sum grid.
struct FrequencyGrid {
    int n_points = 0;
    double span = 0.0;    // half width
    double spacing = 0.0; // 2*span/n_points
    ArrayXd omega;        // bin centers, ascending

    bool same_as(const FrequencyGrid& other) const {
        return n_points == other.n_points && span == other.span;
    }
};

// Throws ConfigError for n_points < 64 or span <= 0.
FrequencyGrid make_frequency_grid(int n_points, double span);

// Conjugate time grid for the unitary DFT below: t_j = (j + 1/2 - n/2) * dt
// with dt = 2*pi / (n * spacing).
ArrayXd time_grid(const FrequencyGrid& grid);
double time_spacing(const FrequencyGrid& grid);

// Continuum-convention Fourier transform, forward kernel e^{-i omega t}:
//   f(t_j) = sum_k e^{-i omega_k t_j} phi(omega_k) * domega / sqrt(2*pi),
// so f is a density amplitude over time and Parseval holds to 1e-12:
// sum |f|^2 dt = sum |phi|^2 domega. Throws ShapeError on length mismatch.
ArrayXcd to_time_domain(const ArrayXcd& amplitude, const FrequencyGrid& grid);
// Inverse transform (kernel e^{+i omega t}); round-trips to 1e-10 relative.
ArrayXcd to_frequency_domain(const ArrayXcd& time_amplitude, const FrequencyGrid& grid);

// Dense unitary DFT matrix F with F(j,k) = e^{-i omega_k t_j} sqrt(domega*dt/(2*pi)).
// Used for 2D joint-temporal-intensity transforms: A_time = F * A * F^T.
MatrixXcd dft_matrix(const FrequencyGrid& grid);

} // namespace sorterlab
