#include "sorterlab/counts.hpp"

#include "sorterlab/errors.hpp"
#include "sorterlab/rng.hpp"

#include <cmath>

namespace sorterlab {

void EfficiencySet::validate() const {
    const double all[] = {eta_E1, eta_L1, eta_E2, eta_L2,
                          eta_D1a, eta_D1b, eta_D2a, eta_D2b};
    for (double v : all)
        if (!(v > 0.0) || v > 1.0)
            throw ConfigError("efficiencies must lie in (0, 1]");
}

const std::array<std::string, CountRecord::n_counters>& CountRecord::counter_names() {
    static const std::array<std::string, n_counters> names = {
        "C_EE,1",     "C_LL,1",     "C_C,1",
        "C_EE,2",     "C_LL,2",     "C_C,2",
        "C_EE/EE,20", "C_LL/LL,20", "C_C/C,20",
        "C_EE/EE,02", "C_LL/LL,02", "C_C/C,02",
        "C_EE/EE,11", "C_LL/LL,11", "C_C/C,11",
    };
    return names;
}

std::array<std::int64_t, CountRecord::n_counters> CountRecord::counters() const {
    return {c_ee_1, c_ll_1, c_c_1, c_ee_2, c_ll_2, c_c_2,
            c_eeee_20, c_llll_20, c_cc_20,
            c_eeee_02, c_llll_02, c_cc_02,
            c_eeee_11, c_llll_11, c_cc_11};
}

std::array<double, CountRecord::n_counters>
expected_counts(const SorterStats& stats, const EfficiencySet& eff, std::int64_t shots) {
    eff.validate();
    if (shots <= 0) throw ConfigError("shots must be positive");
    const double n = static_cast<double>(shots);
    const double dbar1 = 0.5 * (eff.eta_D1a + eff.eta_D1b);
    const double dbar2 = 0.5 * (eff.eta_D2a + eff.eta_D2b);
    const double pair_arm = eff.eta_E1 * eff.eta_E2 * eff.eta_L1 * eff.eta_L2;
    const double cross = eff.eta_L1 * eff.eta_E2 + eff.eta_E1 * eff.eta_L2;
    // Two-photon side peaks see both photons through the same arm; the 11
    // pattern sums the four detector combinations.
    const double ee2 = eff.eta_E1 * eff.eta_E1 * eff.eta_E2 * eff.eta_E2;
    const double ll2 = eff.eta_L1 * eff.eta_L1 * eff.eta_L2 * eff.eta_L2;
    const double det20 = eff.eta_D1a * eff.eta_D1b;
    const double det02 = eff.eta_D2a * eff.eta_D2b;
    const double det11 = (eff.eta_D1a + eff.eta_D1b) * (eff.eta_D2a + eff.eta_D2b);

    std::array<double, CountRecord::n_counters> mean{};
    // one photon: EE / LL side peaks carry 1/8, the central peak interferes
    mean[0] = n / 8.0 * eff.eta_E1 * eff.eta_E2 * dbar1;
    mean[1] = n / 8.0 * eff.eta_L1 * eff.eta_L2 * dbar1;
    mean[2] = n / 2.0 * stats.p10 * cross * dbar1;
    mean[3] = n / 8.0 * eff.eta_E1 * eff.eta_E2 * dbar2;
    mean[4] = n / 8.0 * eff.eta_L1 * eff.eta_L2 * dbar2;
    mean[5] = n / 2.0 * stats.p01 * cross * dbar2;
    // two photons: side peaks carry 1/128 with the pattern detector factor
    mean[6] = n / 128.0 * ee2 * det20;
    mean[7] = n / 128.0 * ll2 * det20;
    mean[8] = n / 2.0 * stats.p20 * pair_arm * det20;
    mean[9] = n / 128.0 * ee2 * det02;
    mean[10] = n / 128.0 * ll2 * det02;
    mean[11] = n / 2.0 * stats.p02 * pair_arm * det02;
    mean[12] = n / 128.0 * ee2 * det11;
    mean[13] = n / 128.0 * ll2 * det11;
    mean[14] = n / 4.0 * stats.p11 * pair_arm * det11;
    return mean;
}

CountRecord simulate_counts(const SorterStats& stats, const EfficiencySet& eff,
                            std::int64_t shots, std::uint64_t seed) {
    const auto mean = expected_counts(stats, eff, shots);
    std::array<std::int64_t, CountRecord::n_counters> drawn{};
    for (int i = 0; i < CountRecord::n_counters; ++i) {
        // independent stream per counter so draw order never matters
        const CounterRng rng(seed, static_cast<std::uint64_t>(i));
        drawn[i] = static_cast<std::int64_t>(rng.poisson(mean[i], 0));
    }
    CountRecord rec;
    rec.c_ee_1 = drawn[0];
    rec.c_ll_1 = drawn[1];
    rec.c_c_1 = drawn[2];
    rec.c_ee_2 = drawn[3];
    rec.c_ll_2 = drawn[4];
    rec.c_c_2 = drawn[5];
    rec.c_eeee_20 = drawn[6];
    rec.c_llll_20 = drawn[7];
    rec.c_cc_20 = drawn[8];
    rec.c_eeee_02 = drawn[9];
    rec.c_llll_02 = drawn[10];
    rec.c_cc_02 = drawn[11];
    rec.c_eeee_11 = drawn[12];
    rec.c_llll_11 = drawn[13];
    rec.c_cc_11 = drawn[14];
    rec.shots = shots;
    rec.seed = seed;
    return rec;
}

OnePhotonExtraction extract_one_photon(const CountRecord& c) {
    if (c.c_ee_1 <= 0 || c.c_ll_1 <= 0 || c.c_ee_2 <= 0 || c.c_ll_2 <= 0)
        throw InsufficientStatistics("one-photon side peaks are empty");
    const auto central = [](std::int64_t cc, std::int64_t ee, std::int64_t ll) {
        return static_cast<double>(cc) /
               (8.0 * std::sqrt(static_cast<double>(ee) * static_cast<double>(ll)));
    };
    const double p1 = central(c.c_c_1, c.c_ee_1, c.c_ll_1);
    const double p2 = central(c.c_c_2, c.c_ee_2, c.c_ll_2);
    if (p1 + p2 <= 0.0)
        throw InsufficientStatistics("no central-peak one-photon counts");
    return {p1 / (p1 + p2), p2 / (p1 + p2)};
}

TwoPhotonExtraction extract_two_photon(const CountRecord& c) {
    if (c.c_eeee_20 <= 0 || c.c_llll_20 <= 0 || c.c_eeee_02 <= 0 ||
        c.c_llll_02 <= 0 || c.c_eeee_11 <= 0 || c.c_llll_11 <= 0)
        throw InsufficientStatistics("two-photon side peaks are empty");
    const auto side = [](std::int64_t ee, std::int64_t ll) {
        return std::sqrt(static_cast<double>(ee) * static_cast<double>(ll));
    };
    // Central/side ratios: 1/2 * P / (1/128) = 64 P for the bunch patterns,
    // 1/4 * P / (1/128) = 32 P for the split pattern.
    const double p20 = static_cast<double>(c.c_cc_20) / (64.0 * side(c.c_eeee_20, c.c_llll_20));
    const double p02 = static_cast<double>(c.c_cc_02) / (64.0 * side(c.c_eeee_02, c.c_llll_02));
    const double p11 = static_cast<double>(c.c_cc_11) / (32.0 * side(c.c_eeee_11, c.c_llll_11));
    const double sum = p20 + p02 + p11;
    if (sum <= 0.0)
        throw InsufficientStatistics("no central-peak two-photon coincidences");
    return {p20 / sum, p02 / sum, p11 / sum};
}

} // namespace sorterlab
