#pragma once

#include "sorterlab/pulse.hpp"

namespace sorterlab {

// Emitter in Gamma/2 = 1 units: total_rate is Gamma (= 2 by convention), the
// guided rate gamma = beta*Gamma and the loss rate (1-beta)*Gamma are derived.
// dephasing and spectral_diffusion are the normalized gamma_d/(Gamma/2) and
// sigma_sd/(Gamma/2). emitter_detuning offsets the resonance from the laser
// frame (the pulse carries its own center detuning separately).
struct EmitterParams {
    double beta = 1.0;
    double total_rate = 2.0;
    double dephasing = 0.0;
    double spectral_diffusion = 0.0;
    double emitter_detuning = 0.0;

    double gamma() const { return beta * total_rate; }
    double gamma_loss() const { return (1.0 - beta) * total_rate; }
    void validate() const; // throws ConfigError outside beta in (0,1], rates >= 0
};

// Mirror-terminated single-sided waveguide, Appendix-style parameters.
struct MirrorGeometry {
    double right_rate = 1.0;         // gamma_r
    double left_rate = 1.0;          // gamma_l
    double mirror_reflectivity = 1.0; // eta_m in [0,1]
    double round_trip_phase = 0.0;    // 2kx, wrapped to [0, 2pi)
};

// Single-photon transmission t(k) = 1 - 2 beta / (1 + dephasing - i(k - delta_e)).
Complex transmission_coeff(const EmitterParams& e, double detuning);
// Emitter excitation amplitude s(k) = -i sqrt(2 beta) / (1 + dephasing - i(k - delta_e)),
// satisfying t = 1 - i sqrt(gamma) s.
Complex excitation_amp(const EmitterParams& e, double detuning);

// Scattered single-photon wavepacket xi(k) = t(k) phi(k). The tag marks which
// distinguishability branch the amplitude belongs to: kCoherentTag for the
// no-jump branch, or a jump index >= 0 for a dephasing jump photon.
inline constexpr int kCoherentTag = -1;
struct SinglePhotonAmplitude {
    FrequencyGrid grid;
    ArrayXcd amplitude;
    int distinguishability_tag = kCoherentTag;

    double norm2() const { return amplitude.abs2().sum() * grid.spacing; }
};
SinglePhotonAmplitude scatter_one(const Pulse& p, const EmitterParams& e);

// Two-photon scattering output for a product input phi(k1)phi(k2):
//   elastic(p1,p2)   = t(p1) t(p2) phi(p1) phi(p2)
//   inelastic(p1,p2) = (i/pi) sqrt(gamma) s(p1) s(p2) I(p1+p2),
//   I(E) = integral dk s(k) phi(k) phi(E-k)  (grid quadrature; the midpoint
//   grid makes E - omega_k land exactly on a bin of the sum grid).
// The overall inelastic normalization is fixed by beta = 1 unitarity.
struct TwoPhotonAmplitude {
    FrequencyGrid grid;
    MatrixXcd elastic_part;
    MatrixXcd inelastic_part;

    MatrixXcd amplitude() const { return elastic_part + inelastic_part; }
    double elastic_norm2() const;
    double inelastic_norm2() const;
    double total_norm2() const;
};
TwoPhotonAmplitude scatter_two(const Pulse& p, const EmitterParams& e);

// Effective decay rate of the mirror-mapped chiral waveguide,
// gamma_eff = |sqrt(gamma_r) + eta_m sqrt(gamma_l) e^{i 2kx}|^2, plus the
// interference visibility (gamma_max - gamma_min)/(gamma_max + gamma_min).
struct ChiralEffective {
    double gamma_eff = 0.0;
    double interference_visibility = 0.0;
};
ChiralEffective effective_chiral(const MirrorGeometry& g);

// Two-sided waveguide coefficients via even/odd mode decomposition: the even
// mode scatters with the full rate (chiral kernel), the odd mode passes, so
// t = (t_even + 1)/2 and r = (t_even - 1)/2.
struct TwoSidedCoeffs {
    Complex t;
    Complex r;
};
TwoSidedCoeffs two_sided_coeffs(const EmitterParams& e, double detuning);

// Mode-resolved two-photon scattering in the two-sided geometry. Amplitude
// blocks are ordered photon-1 x photon-2 over ports {t, r}; probabilities are
// the unordered port-pair contents (p_tr sums the tr and rt blocks).
struct TwoSidedScatter {
    double p_t = 0.0, p_r = 0.0;            // one-photon port probabilities
    double p_tt = 0.0, p_rr = 0.0, p_tr = 0.0; // two-photon pair probabilities
    MatrixXcd tt, rr, tr, rt;
};
TwoSidedScatter scatter_two_two_sided(const Pulse& p, const EmitterParams& e);

} // namespace sorterlab
