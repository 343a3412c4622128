#include "sorterlab/grid.hpp"

#include "sorterlab/errors.hpp"

#include <cmath>

namespace sorterlab {

FrequencyGrid make_frequency_grid(int n_points, double span) {
    if (n_points < 64)
        throw ConfigError("frequency grid needs at least 64 points, got " + std::to_string(n_points));
    if (!(span > 0.0))
        throw ConfigError("frequency grid span must be positive");
    FrequencyGrid g;
    g.n_points = n_points;
    g.span = span;
    g.spacing = 2.0 * span / n_points;
    g.omega = (ArrayXd::LinSpaced(n_points, 0, n_points - 1) + 0.5 - n_points / 2.0) * g.spacing;
    return g;
}

double time_spacing(const FrequencyGrid& grid) {
    return 2.0 * M_PI / (grid.n_points * grid.spacing);
}

ArrayXd time_grid(const FrequencyGrid& grid) {
    const double dt = time_spacing(grid);
    const int n = grid.n_points;
    return (ArrayXd::LinSpaced(n, 0, n - 1) + 0.5 - n / 2.0) * dt;
}

namespace {

ArrayXcd dft_apply(const ArrayXcd& in, const FrequencyGrid& grid, double sign) {
    if (in.size() != grid.n_points)
        throw ShapeError("amplitude length " + std::to_string(in.size()) +
                         " does not match grid n_points " + std::to_string(grid.n_points));
    const ArrayXd t = time_grid(grid);
    const double dt = time_spacing(grid);
    // Continuum convention: the output is a density amplitude over the
    // conjugate measure, so Parseval reads sum |out|^2 dt = sum |in|^2 domega.
    const double scale =
        (sign < 0 ? grid.spacing : dt) / std::sqrt(2.0 * M_PI);
    ArrayXcd out(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
        Complex acc{0.0, 0.0};
        const double tj = (sign < 0) ? t[j] : grid.omega[j];
        // forward: sum over omega; inverse: sum over time
        if (sign < 0) {
            for (int k = 0; k < grid.n_points; ++k)
                acc += std::polar(1.0, -grid.omega[k] * tj) * in[k];
        } else {
            for (int k = 0; k < grid.n_points; ++k)
                acc += std::polar(1.0, tj * t[k]) * in[k];
        }
        out[j] = acc * scale;
    }
    return out;
}

} // namespace

ArrayXcd to_time_domain(const ArrayXcd& amplitude, const FrequencyGrid& grid) {
    return dft_apply(amplitude, grid, -1.0);
}

ArrayXcd to_frequency_domain(const ArrayXcd& time_amplitude, const FrequencyGrid& grid) {
    return dft_apply(time_amplitude, grid, +1.0);
}

MatrixXcd dft_matrix(const FrequencyGrid& grid) {
    const int n = grid.n_points;
    const ArrayXd t = time_grid(grid);
    const double dt = time_spacing(grid);
    const double scale = std::sqrt(grid.spacing * dt / (2.0 * M_PI));
    MatrixXcd f(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            f(j, k) = std::polar(scale, -grid.omega[k] * t[j]);
    return f;
}

} // namespace sorterlab
