#pragma once

#include "sorterlab/sorter.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace sorterlab {

// Arm and detector efficiencies of the time-bin interferometer readout.
// E/L label the early/late arm, 1/2 the first/second pass, D1/D2 the two
// output-mode detector pairs with their a/b splits.
struct EfficiencySet {
    double eta_E1 = 1.0, eta_L1 = 1.0;
    double eta_E2 = 1.0, eta_L2 = 1.0;
    double eta_D1a = 1.0, eta_D1b = 1.0;
    double eta_D2a = 1.0, eta_D2b = 1.0;

    void validate() const; // throws ConfigError unless all in (0, 1]
};

// Histogram of one run: one-photon side/central peaks per output mode, and
// two-photon coincidence patterns {20, 02, 11} with their side peaks.
struct CountRecord {
    // one-photon counts, output mode 1 then mode 2
    std::int64_t c_ee_1 = 0, c_ll_1 = 0, c_c_1 = 0;
    std::int64_t c_ee_2 = 0, c_ll_2 = 0, c_c_2 = 0;
    // two-photon coincidences per pattern
    std::int64_t c_eeee_20 = 0, c_llll_20 = 0, c_cc_20 = 0;
    std::int64_t c_eeee_02 = 0, c_llll_02 = 0, c_cc_02 = 0;
    std::int64_t c_eeee_11 = 0, c_llll_11 = 0, c_cc_11 = 0;
    std::int64_t shots = 0;
    std::uint64_t seed = 0;

    static constexpr int n_counters = 15;
    // Counter display names, in the field order above. Several contain commas
    // or slashes, so CSV emission quotes them.
    static const std::array<std::string, n_counters>& counter_names();
    std::array<std::int64_t, n_counters> counters() const;
};

// Expected (mean) counts per counter for given statistics and efficiencies,
// scaled by shots; same ordering as CountRecord::counters().
std::array<double, CountRecord::n_counters>
expected_counts(const SorterStats& stats, const EfficiencySet& eff, std::int64_t shots);

// Poisson-fluctuated histogram around the expectations, deterministic in
// (seed): per-counter RNG streams derived from the master seed.
CountRecord simulate_counts(const SorterStats& stats, const EfficiencySet& eff,
                            std::int64_t shots, std::uint64_t seed);

// Side-peak-normalized one-photon extraction; efficiency-independent under
// the early/late balance assumption. Sums to 1.
struct OnePhotonExtraction {
    double p1_mode1 = 0.0;
    double p1_mode2 = 0.0;
};
OnePhotonExtraction extract_one_photon(const CountRecord& c);

// Two-photon pattern extraction with the 1/2 (bunch) and 1/4 (split) central
// factors and squared side-peak factors inverted exactly. Sums to 1.
struct TwoPhotonExtraction {
    double p20 = 0.0;
    double p02 = 0.0;
    double p11 = 0.0;
};
TwoPhotonExtraction extract_two_photon(const CountRecord& c);

} // namespace sorterlab
