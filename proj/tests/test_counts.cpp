#include "doctest.h"
#include "helpers.hpp"
#include "sorterlab/counts.hpp"
#include "sorterlab/errors.hpp"
#include "sorterlab/sorter.hpp"

#include <cmath>

using namespace sorterlab;

namespace {

SorterStats synthetic_raw() {
    SorterStats s;
    s.p10 = 0.6;
    s.p01 = 0.3;
    s.p20 = 0.35;
    s.p02 = 0.25;
    s.p11 = 0.2;
    s.loss1 = 1.0 - (s.p10 + s.p01);
    s.loss2 = 1.0 - (s.p20 + s.p02 + s.p11);
    s.normalized = false;
    return s;
}

EfficiencySet skewed_efficiencies() {
    EfficiencySet eff;
    eff.eta_E1 = 0.9;
    eff.eta_L1 = 0.8;
    eff.eta_E2 = 0.85;
    eff.eta_L2 = 0.75;
    eff.eta_D1a = 0.6;
    eff.eta_D1b = 0.65;
    eff.eta_D2a = 0.55;
    eff.eta_D2b = 0.5;
    return eff;
}

CountRecord record_from_means(const std::array<double, CountRecord::n_counters>& mean,
                              std::int64_t shots) {
    CountRecord rec;
    auto to_int = [](double v) { return static_cast<std::int64_t>(std::llround(v)); };
    rec.c_ee_1 = to_int(mean[0]);
    rec.c_ll_1 = to_int(mean[1]);
    rec.c_c_1 = to_int(mean[2]);
    rec.c_ee_2 = to_int(mean[3]);
    rec.c_ll_2 = to_int(mean[4]);
    rec.c_c_2 = to_int(mean[5]);
    rec.c_eeee_20 = to_int(mean[6]);
    rec.c_llll_20 = to_int(mean[7]);
    rec.c_cc_20 = to_int(mean[8]);
    rec.c_eeee_02 = to_int(mean[9]);
    rec.c_llll_02 = to_int(mean[10]);
    rec.c_cc_02 = to_int(mean[11]);
    rec.c_eeee_11 = to_int(mean[12]);
    rec.c_llll_11 = to_int(mean[13]);
    rec.c_cc_11 = to_int(mean[14]);
    rec.shots = shots;
    return rec;
}

} // namespace

TEST_CASE("expected counts: hand-computed interferometer formulas") {
    const auto s = synthetic_raw();
    const auto eff = skewed_efficiencies();
    const double n = 1e6;
    const auto mean = expected_counts(s, eff, static_cast<std::int64_t>(n));

    const double dbar1 = 0.5 * (eff.eta_D1a + eff.eta_D1b);
    const double dbar2 = 0.5 * (eff.eta_D2a + eff.eta_D2b);
    const double cross = eff.eta_L1 * eff.eta_E2 + eff.eta_E1 * eff.eta_L2;
    const double pair = eff.eta_E1 * eff.eta_E2 * eff.eta_L1 * eff.eta_L2;
    const double ee2 = std::pow(eff.eta_E1 * eff.eta_E2, 2);
    const double ll2 = std::pow(eff.eta_L1 * eff.eta_L2, 2);

    CHECK(mean[0] == doctest::Approx(n / 8 * eff.eta_E1 * eff.eta_E2 * dbar1).epsilon(1e-12));
    CHECK(mean[1] == doctest::Approx(n / 8 * eff.eta_L1 * eff.eta_L2 * dbar1).epsilon(1e-12));
    CHECK(mean[2] == doctest::Approx(n / 2 * s.p10 * cross * dbar1).epsilon(1e-12));
    CHECK(mean[5] == doctest::Approx(n / 2 * s.p01 * cross * dbar2).epsilon(1e-12));
    CHECK(mean[6] ==
          doctest::Approx(n / 128 * ee2 * eff.eta_D1a * eff.eta_D1b).epsilon(1e-12));
    CHECK(mean[7] ==
          doctest::Approx(n / 128 * ll2 * eff.eta_D1a * eff.eta_D1b).epsilon(1e-12));
    CHECK(mean[8] ==
          doctest::Approx(n / 2 * s.p20 * pair * eff.eta_D1a * eff.eta_D1b).epsilon(1e-12));
    CHECK(mean[11] ==
          doctest::Approx(n / 2 * s.p02 * pair * eff.eta_D2a * eff.eta_D2b).epsilon(1e-12));
    const double det11 = (eff.eta_D1a + eff.eta_D1b) * (eff.eta_D2a + eff.eta_D2b);
    CHECK(mean[12] == doctest::Approx(n / 128 * ee2 * det11).epsilon(1e-12));
    CHECK(mean[14] == doctest::Approx(n / 4 * s.p11 * pair * det11).epsilon(1e-12));
}

TEST_CASE("expected counts: central-to-side ratio is 8p at unit efficiency") {
    auto s = synthetic_raw();
    const EfficiencySet unit;
    const double n = 1e9;
    const auto mean = expected_counts(s, unit, static_cast<std::int64_t>(n));
    CHECK(mean[2] / std::sqrt(mean[0] * mean[1]) ==
          doctest::Approx(8.0 * s.p10).epsilon(1e-12));
    CHECK(mean[8] / std::sqrt(mean[6] * mean[7]) ==
          doctest::Approx(64.0 * s.p20).epsilon(1e-12));
    CHECK(mean[14] / std::sqrt(mean[12] * mean[13]) ==
          doctest::Approx(32.0 * s.p11).epsilon(1e-12));
}

TEST_CASE("extraction cancels arbitrary efficiency imbalance") {
    const auto s = synthetic_raw();
    const auto mean = expected_counts(s, skewed_efficiencies(), 100000000);
    const auto rec = record_from_means(mean, 100000000);

    const auto one = extract_one_photon(rec);
    const auto two = extract_two_photon(rec);

    const double p10n = s.p10 / (s.p10 + s.p01);
    const double surv2 = s.p20 + s.p02 + s.p11;
    CHECK(one.p1_mode1 == doctest::Approx(p10n).epsilon(1e-3));
    CHECK(one.p1_mode2 == doctest::Approx(1.0 - p10n).epsilon(1e-3));
    CHECK(one.p1_mode1 + one.p1_mode2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(two.p20 == doctest::Approx(s.p20 / surv2).epsilon(1e-3));
    CHECK(two.p02 == doctest::Approx(s.p02 / surv2).epsilon(1e-3));
    CHECK(two.p11 == doctest::Approx(s.p11 / surv2).epsilon(1e-3));
    CHECK(two.p20 + two.p02 + two.p11 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("raw central ratio is biased upward by arm imbalance") {
    // AM >= GM: the unnormalized one-photon central ratio overshoots the true
    // probability whenever the early/late arm products differ.
    const auto s = synthetic_raw();
    const auto eff = skewed_efficiencies();
    const auto mean = expected_counts(s, eff, 100000000);
    const double ratio = mean[2] / (8.0 * std::sqrt(mean[0] * mean[1]));
    CHECK(ratio > s.p10 * (1.0 + 1e-9));
    const double am_gm = (eff.eta_L1 * eff.eta_E2 + eff.eta_E1 * eff.eta_L2) /
                         (2.0 * std::sqrt(eff.eta_E1 * eff.eta_E2 * eff.eta_L1 * eff.eta_L2));
    CHECK(ratio == doctest::Approx(s.p10 * am_gm).epsilon(1e-6));
}

TEST_CASE("simulated counts: deterministic per seed") {
    const auto s = synthetic_raw();
    const EfficiencySet unit;
    const auto a = simulate_counts(s, unit, 1000000, 4242);
    const auto b = simulate_counts(s, unit, 1000000, 4242);
    CHECK(a.counters() == b.counters());
    CHECK(a.seed == 4242);
    CHECK(a.shots == 1000000);
    const auto c = simulate_counts(s, unit, 1000000, 4243);
    CHECK(a.counters() != c.counters());
}

TEST_CASE("count round trip: single large sample") {
    const SorterConfig cfg{128, 20.0, 13};
    const auto truth = sort_pulse(sorterlab::testing::lab_pulse(128),
                                  sorterlab::testing::lab_emitter(), cfg);
    const auto raw = to_raw(truth);
    const auto rec = simulate_counts(raw, EfficiencySet{}, 20000000, 42);
    const auto one = extract_one_photon(rec);
    const auto two = extract_two_photon(rec);
    CHECK(std::abs(one.p1_mode1 - truth.p10) < 2e-3);
    CHECK(std::abs(two.p02 - truth.p02) < 4e-3);
    CHECK(std::abs(two.p20 - truth.p20) < 4e-3);
    CHECK(std::abs(two.p11 - truth.p11) < 4e-3);
}

TEST_CASE("count round trip: ensemble mean is unbiased within 3 sigma") {
    const auto s = synthetic_raw();
    const auto eff = skewed_efficiencies();
    const int n_seeds = 100;
    const std::int64_t shots = 1000000;

    const double p10n = s.p10 / (s.p10 + s.p01);
    const double surv2 = s.p20 + s.p02 + s.p11;
    const std::array<double, 4> truth = {p10n, s.p20 / surv2, s.p02 / surv2,
                                         s.p11 / surv2};
    std::array<double, 4> sum{}, sum2{};
    for (int seed = 0; seed < n_seeds; ++seed) {
        const auto rec = simulate_counts(s, eff, shots, static_cast<std::uint64_t>(seed));
        const auto one = extract_one_photon(rec);
        const auto two = extract_two_photon(rec);
        const std::array<double, 4> v = {one.p1_mode1, two.p20, two.p02, two.p11};
        for (int q = 0; q < 4; ++q) {
            sum[q] += v[q];
            sum2[q] += v[q] * v[q];
        }
    }
    for (int q = 0; q < 4; ++q) {
        const double mean = sum[q] / n_seeds;
        const double var = sum2[q] / n_seeds - mean * mean;
        const double sem = std::sqrt(var / n_seeds);
        CHECK(std::abs(mean - truth[q]) < 3.0 * sem + 1e-6);
    }
}

TEST_CASE("extraction failure modes") {
    CHECK_THROWS_AS(extract_one_photon(CountRecord{}), InsufficientStatistics);
    CHECK_THROWS_AS(extract_two_photon(CountRecord{}), InsufficientStatistics);

    const auto mean = expected_counts(synthetic_raw(), EfficiencySet{}, 1000000);
    auto rec = record_from_means(mean, 1000000);
    rec.c_c_1 = 0;
    rec.c_c_2 = 0;
    CHECK_THROWS_AS(extract_one_photon(rec), InsufficientStatistics);
    rec = record_from_means(mean, 1000000);
    rec.c_ee_1 = 0;
    CHECK_THROWS_AS(extract_one_photon(rec), InsufficientStatistics);
    rec = record_from_means(mean, 1000000);
    rec.c_llll_02 = 0;
    CHECK_THROWS_AS(extract_two_photon(rec), InsufficientStatistics);
}

TEST_CASE("efficiency and shot validation") {
    EfficiencySet eff;
    eff.eta_D2b = 0.0;
    CHECK_THROWS_AS(eff.validate(), ConfigError);
    eff.eta_D2b = 1.2;
    CHECK_THROWS_AS(eff.validate(), ConfigError);
    eff.eta_D2b = -0.3;
    CHECK_THROWS_AS(eff.validate(), ConfigError);
    CHECK_NOTHROW(EfficiencySet{}.validate());
    CHECK_THROWS_AS(expected_counts(synthetic_raw(), EfficiencySet{}, 0), ConfigError);
    CHECK_THROWS_AS(simulate_counts(synthetic_raw(), EfficiencySet{}, -5, 1), ConfigError);
}
