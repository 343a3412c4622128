#pragma once

#include "sorterlab/sorter.hpp"

#include <vector>

namespace sorterlab {

// Sorter statistics plus the static interferometer imbalance P_V: the part of
// the single-photon wrong-port probability that leaves photons
// indistinguishable. Must satisfy P_V <= P01.
struct BsmInput {
    SorterStats stats;
    double static_imbalance = 0.0;
};

// Bell-state-measurement outcome probabilities averaged over the four Bell
// states. In normalized mode success+error+failure = 1 and loss = 0; in raw
// mode the three sum to 1 - loss.
struct BsmOutcome {
    double success = 0.0;
    double error = 0.0;
    double failure = 0.0;
    double loss = 0.0;
};

BsmOutcome bsm_probabilities(const BsmInput& in);

// Forward sorter evaluation over a (beta, dephasing) grid at fixed spectral
// diffusion, followed by the BSM combinatorics per cell. Cells are listed
// beta-major in input order.
struct BsmMapCell {
    double beta = 0.0;
    double dephasing = 0.0;
    BsmOutcome outcome;
};
std::vector<BsmMapCell> bsm_map(const std::vector<double>& betas,
                                const std::vector<double>& dephasings,
                                double spectral_diffusion, bool normalized,
                                const Pulse& pulse_template,
                                const SorterConfig& cfg = {});

// Two-sided-sorter BSM curves over a pulse-width grid (sigma in Gamma/2
// units; the Gaussian pulse has fwhm = sqrt(2 ln 2)/sigma). Statistics are
// loss-inclusive: correct single-photon port is reflection, correct pair
// outcome is double transmission.
struct TwoSidedBsmRow {
    double sigma = 0.0;
    double fwhm = 0.0;
    double p_t = 0.0, p_r = 0.0;
    double p_tt = 0.0, p_rr = 0.0, p_tr = 0.0;
    BsmOutcome outcome;
};
std::vector<TwoSidedBsmRow> two_sided_bsm(const std::vector<double>& widths,
                                          double beta,
                                          const SorterConfig& cfg = {});

} // namespace sorterlab
