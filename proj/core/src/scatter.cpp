#include "sorterlab/scatter.hpp"

#include "sorterlab/errors.hpp"

#include <cmath>

namespace sorterlab {

void EmitterParams::validate() const {
    if (!(beta > 0.0) || beta > 1.0)
        throw ConfigError("beta must lie in (0, 1]");
    if (total_rate <= 0.0)
        throw ConfigError("total_rate must be positive");
    if (dephasing < 0.0)
        throw ConfigError("dephasing must be >= 0");
    if (spectral_diffusion < 0.0)
        throw ConfigError("spectral_diffusion must be >= 0");
}

namespace {

inline Complex lorentzian_pole(const EmitterParams& e, double detuning) {
    return Complex(1.0 + e.dephasing, -(detuning - e.emitter_detuning));
}

// Edge-bin spectral mass; used to detect pulses whose tails fall off the grid
// before building two-photon tensors.
double edge_mass(const Pulse& p) {
    const int n = p.grid.n_points;
    return (std::norm(p.amplitude[0]) + std::norm(p.amplitude[n - 1])) * p.grid.spacing;
}

} // namespace

Complex transmission_coeff(const EmitterParams& e, double detuning) {
    return 1.0 - 2.0 * e.beta / lorentzian_pole(e, detuning);
}

Complex excitation_amp(const EmitterParams& e, double detuning) {
    return Complex(0.0, -1.0) * std::sqrt(2.0 * e.beta) / lorentzian_pole(e, detuning);
}

SinglePhotonAmplitude scatter_one(const Pulse& p, const EmitterParams& e) {
    e.validate();
    SinglePhotonAmplitude out;
    out.grid = p.grid;
    out.amplitude.resize(p.grid.n_points);
    for (int k = 0; k < p.grid.n_points; ++k)
        out.amplitude[k] = transmission_coeff(e, p.grid.omega[k]) * p.amplitude[k];
    return out;
}

TwoPhotonAmplitude scatter_two(const Pulse& p, const EmitterParams& e) {
    e.validate();
    const int n = p.grid.n_points;
    const double d = p.grid.spacing;
    if (edge_mass(p) > 1e-8)
        throw TruncationError(
            "pulse mass at the grid edge too large for the two-photon convolution",
            edge_mass(p));

    ArrayXcd t(n), s(n);
    for (int k = 0; k < n; ++k) {
        t[k] = transmission_coeff(e, p.grid.omega[k]);
        s[k] = excitation_amp(e, p.grid.omega[k]);
    }
    const ArrayXcd xi = t * p.amplitude;
    const ArrayXcd sphi = s * p.amplitude;

    // I[m] = sum_k s_k phi_k phi_{m-k} * d on the sum grid m = i + j; the
    // midpoint bins make omega_i + omega_j = (m + 1 - n) * d exact.
    ArrayXcd conv = ArrayXcd::Zero(2 * n - 1);
    for (int i = 0; i < n; ++i) {
        const Complex a = sphi[i] * d;
        for (int j = 0; j < n; ++j)
            conv[i + j] += a * p.amplitude[j];
    }

    TwoPhotonAmplitude out;
    out.grid = p.grid;
    out.elastic_part.resize(n, n);
    out.inelastic_part.resize(n, n);
    // Fold the prefactor into the convolution so each entry is the product of
    // an (i, j)-symmetric pair term and an i+j term; exchange symmetry is then
    // exact in floating point, not just up to roundoff.
    const Complex pref = Complex(0.0, 1.0 / M_PI) * std::sqrt(e.gamma());
    const ArrayXcd kernel = pref * conv;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out.elastic_part(i, j) = xi[i] * xi[j];
            out.inelastic_part(i, j) = (s[i] * s[j]) * kernel[i + j];
        }
    }
    return out;
}

double TwoPhotonAmplitude::elastic_norm2() const {
    const double d = grid.spacing;
    return elastic_part.squaredNorm() * d * d;
}

double TwoPhotonAmplitude::inelastic_norm2() const {
    const double d = grid.spacing;
    return inelastic_part.squaredNorm() * d * d;
}

double TwoPhotonAmplitude::total_norm2() const {
    const double d = grid.spacing;
    return (elastic_part + inelastic_part).squaredNorm() * d * d;
}

ChiralEffective effective_chiral(const MirrorGeometry& g) {
    if (g.right_rate < 0.0 || g.left_rate < 0.0)
        throw ConfigError("mirror geometry rates must be >= 0");
    if (g.mirror_reflectivity < 0.0 || g.mirror_reflectivity > 1.0)
        throw ConfigError("mirror reflectivity must lie in [0, 1]");
    const double a = std::sqrt(g.right_rate);
    const double b = g.mirror_reflectivity * std::sqrt(g.left_rate);
    const Complex amp = a + b * std::polar(1.0, g.round_trip_phase);
    ChiralEffective out;
    out.gamma_eff = std::norm(amp);
    const double hi = (a + b) * (a + b);
    const double lo = (a - b) * (a - b);
    out.interference_visibility = (hi + lo > 0.0) ? (hi - lo) / (hi + lo) : 0.0;
    return out;
}

TwoSidedCoeffs two_sided_coeffs(const EmitterParams& e, double detuning) {
    const Complex t_even = transmission_coeff(e, detuning);
    return {(t_even + 1.0) / 2.0, (t_even - 1.0) / 2.0};
}

TwoSidedScatter scatter_two_two_sided(const Pulse& p, const EmitterParams& e) {
    const int n = p.grid.n_points;
    const double d = p.grid.spacing;
    // The even mode carries the full guided rate and is exactly the chiral
    // scattering problem; its inelastic part splits evenly over the four
    // ordered port pairs (amplitude factor 1/4 via the two 1/sqrt(2) mode
    // projections per photon).
    const TwoPhotonAmplitude chiral = scatter_two(p, e);

    ArrayXcd tphi(n), rphi(n);
    for (int k = 0; k < n; ++k) {
        const TwoSidedCoeffs c = two_sided_coeffs(e, p.grid.omega[k]);
        tphi[k] = c.t * p.amplitude[k];
        rphi[k] = c.r * p.amplitude[k];
    }

    TwoSidedScatter out;
    out.p_t = tphi.abs2().sum() * d;
    out.p_r = rphi.abs2().sum() * d;

    const MatrixXcd inel4 = chiral.inelastic_part / 4.0;
    out.tt = tphi.matrix() * tphi.matrix().transpose() + inel4;
    out.rr = rphi.matrix() * rphi.matrix().transpose() + inel4;
    out.tr = tphi.matrix() * rphi.matrix().transpose() + inel4;
    out.rt = rphi.matrix() * tphi.matrix().transpose() + inel4;

    const double d2 = d * d;
    out.p_tt = out.tt.squaredNorm() * d2;
    out.p_rr = out.rr.squaredNorm() * d2;
    out.p_tr = (out.tr.squaredNorm() + out.rt.squaredNorm()) * d2;
    return out;
}

} // namespace sorterlab
