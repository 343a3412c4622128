#pragma once

#include "sorterlab/noise.hpp"
#include "sorterlab/units.hpp"

#include <optional>
#include <vector>

namespace sorterlab {

// Numerical resolution of the sorter evaluation. The two-photon tensors use
// their own (coarser) grid; diffusion_nodes is the Gauss-Hermite order.
struct SorterConfig {
    int n_points = 256;
    double span = 20.0;
    int diffusion_nodes = 21;
};

// Port-probability vector of the nonlinear Mach-Zehnder sorter.
// One-photon sector: P10 (upper, correct) / P01 (lower, wrong).
// Two-photon sector: P20 (upper bunch) / P02 (lower bunch, correct) / P11 (split).
// p02_coherent_fraction is the all-coherent weight fraction among correctly
// sorted pairs (Appendix-G's P02,gd). loss1/loss2 are the waveguide losses of
// the two sectors; in normalized mode each sector sums to 1 and the losses
// record what was divided out.
struct SorterStats {
    double p10 = 0.0, p01 = 0.0;
    double p20 = 0.0, p02 = 0.0, p11 = 0.0;
    double p02_coherent_fraction = 1.0;
    double loss1 = 0.0, loss2 = 0.0;
    bool normalized = true;

    double survival1() const { return 1.0 - loss1; }
    double survival2() const { return 1.0 - loss2; }
};

// Multiplies each sector by its survival probability and clears `normalized`,
// giving the loss-inclusive (un-normalized) statistics.
SorterStats to_raw(const SorterStats& s);

// One-photon sorter statistics: 50:50 split into two time bins, scattering in
// each bin (independent jump labels, shared diffusion offset), 50:50
// recombination. Only the one-photon fields and loss1 are filled.
SorterStats sort_one_photon(const Pulse& p, const EmitterParams& e,
                            const SorterConfig& cfg = {});

// Two-photon sorter statistics: two-in-one-bin components scatter as pairs,
// split components scatter independently per bin; jump branches are routed
// (1/4, 1/4, 1/2) by label orthogonality. Only the two-photon fields,
// p02_coherent_fraction, and loss2 are filled.
SorterStats sort_two_photon(const Pulse& p, const EmitterParams& e,
                            const SorterConfig& cfg = {});

// Both sectors on a shared diffusion quadrature (the slow-noise contract: one
// offset wraps the full sorter evaluation).
SorterStats sort_pulse(const Pulse& p, const EmitterParams& e,
                       const SorterConfig& cfg = {});

// Eq. (1): P = (P10 + P02)/2. Requires normalized combined stats.
double sorter_success(const SorterStats& s);

// Linear-optics beam splitter with single-photon upper-port probability p10:
// P20 = p10^2, P02 = (1-p10)^2, P11 = 2 p10 (1-p10).
struct LinearBaseline {
    double p20 = 0.0, p02 = 0.0, p11 = 0.0;
};
LinearBaseline linear_baseline(double p10);

// Forward model over a detuning list; pulse_template fixes duration and mean
// photon number, the center detuning is swept. Rows in input order.
struct DetuningSweepRow {
    double detuning = 0.0;
    SorterStats stats;
};
std::vector<DetuningSweepRow> detuning_sweep(const EmitterParams& e,
                                             const Pulse& pulse_template,
                                             const std::vector<double>& detunings,
                                             const SorterConfig& cfg = {});

// Interferometer state between / after the beam splitters: a mixture of a
// coherent composite amplitude per diffusion node plus distinguishability-
// labeled jump branches in product form. Composite index = mode x frequency
// bin (mode-major), modes {0, 1} = {arm-A, arm-B} before the closing splitter
// or {upper, lower} after it.
struct TwoPhotonState {
    FrequencyGrid grid;
    int n_modes = 2;

    struct CoherentBranch {
        double weight = 1.0; // diffusion node weight
        MatrixXcd amp;       // (n_modes*N)^2 symmetric composite; norm carries survival
    };
    struct ProductBranch {
        double weight = 0.0; // branch probability (includes node weight)
        std::array<int, 2> labels{0, 1};
        Eigen::VectorXcd photon_a, photon_b; // unit-norm composite vectors
    };
    std::vector<CoherentBranch> coherent;
    std::vector<ProductBranch> jumps;

    // Total weighted norm (= two-photon survival probability).
    double total_weight() const;
};

// State just after the per-bin scattering, modes {arm-A, arm-B}.
TwoPhotonState scattered_pair_state(const Pulse& p, const EmitterParams& e,
                                    const SorterConfig& cfg = {});

// 50:50 closing splitter of the stated convention: arm-A -> (u+l)/sqrt(2),
// arm-B -> (u-l)/sqrt(2).
Eigen::Matrix2cd splitter_50_50();

// Applies U to the mode index of each photon in every branch. Throws
// ConfigError if U is not unitary to 1e-12.
TwoPhotonState apply_mode_unitary(const TwoPhotonState& s, const Eigen::Matrix2cd& u);

// scattered_pair_state followed by the closing splitter; modes {upper, lower}.
TwoPhotonState sorter_output_state(const Pulse& p, const EmitterParams& e,
                                   const SorterConfig& cfg = {});

// Two-photon port statistics read directly off a sorter output state; agrees
// with sort_two_photon to numerical roundoff (cross-check path).
SorterStats stats_from_state(const TwoPhotonState& s);

// Joint temporal intensity of a port pair.
enum class PortPair { upper_upper, lower_lower, upper_lower };

struct JtiGrid {
    ArrayXd times;    // internal 1/(Gamma/2) units
    ArrayXd times_ns; // physical axis; empty when no physical units are set
    Eigen::MatrixXd intensity; // I(t1, t2) >= 0, density over internal time
    double integral() const;
};
JtiGrid jti(const TwoPhotonState& s, PortPair pair,
            const NormalizedUnits& units = NormalizedUnits{});

// Square detection window applied to the joint temporal intensities of a
// sorter output state. The window is anchored to the pulse arrival: it opens
// at the arrival time (t = 0, the input-pulse intensity peak) and closes
// window_ns later, unless an explicit center is given. Returns renormalized
// two-photon stats over the accepted events plus the absolute acceptance
// probability per input pair (loss included).
struct FilterResult {
    SorterStats stats;
    double acceptance = 0.0;
};
FilterResult temporal_filter(const TwoPhotonState& s, double window_ns,
                             const NormalizedUnits& units,
                             std::optional<double> window_center_ns = std::nullopt);

} // namespace sorterlab
