#include "doctest.h"
#include "helpers.hpp"
#include "sorterlab/errors.hpp"
#include "sorterlab/sorter.hpp"

#include <cmath>

using namespace sorterlab;
using sorterlab::testing::lab_emitter;
using sorterlab::testing::lab_pulse;
using sorterlab::testing::lab_units;

namespace {

TwoPhotonState elastic_only_state(const Pulse& p, int block) {
    TwoPhotonState state;
    state.grid = p.grid;
    const int n = p.grid.n_points;
    TwoPhotonState::CoherentBranch br;
    br.weight = 1.0;
    br.amp = MatrixXcd::Zero(2 * n, 2 * n);
    br.amp.block(block * n, block * n, n, n) =
        p.amplitude.matrix() * p.amplitude.matrix().transpose();
    state.coherent.push_back(br);
    return state;
}

} // namespace

TEST_CASE("jti: product amplitude gives a separable intensity") {
    const auto p = lab_pulse(128);
    const auto state = elastic_only_state(p, 0);
    const auto map = jti(state, PortPair::upper_upper, lab_units());

    const auto f = to_time_domain(p.amplitude, p.grid);
    const ArrayXd marginal = f.abs2();
    const int n = p.grid.n_points;
    REQUIRE(map.intensity.rows() == n);
    REQUIRE(map.intensity.cols() == n);
    const double scale = map.intensity.maxCoeff();
    for (int i = 0; i < n; i += 5)
        for (int j = 0; j < n; j += 7)
            CHECK(std::abs(map.intensity(i, j) - marginal[i] * marginal[j]) <=
                  1e-9 * scale);

    CHECK(map.integral() == doctest::Approx(1.0).epsilon(1e-9));
    // Same state carries nothing in the other ports.
    CHECK(jti(state, PortPair::lower_lower, lab_units()).integral() <= 1e-15);
    CHECK(jti(state, PortPair::upper_lower, lab_units()).integral() <= 1e-15);
}

TEST_CASE("jti: physical axis only with physical units") {
    const auto p = lab_pulse(128);
    const auto state = elastic_only_state(p, 1);
    const auto bare = jti(state, PortPair::lower_lower);
    CHECK(bare.times_ns.size() == 0);
    CHECK(bare.times.size() == p.grid.n_points);

    const auto physical = jti(state, PortPair::lower_lower, lab_units());
    REQUIRE(physical.times_ns.size() == p.grid.n_points);
    for (int i = 0; i < p.grid.n_points; i += 13)
        CHECK(physical.times_ns[i] ==
              doctest::Approx(physical.times[i] * 0.648).epsilon(1e-12));
}

TEST_CASE("jti: port integrals reproduce raw port statistics") {
    const SorterConfig cfg{128, 20.0, 5};
    const auto p = lab_pulse(128);
    const auto e = lab_emitter();
    const auto state = sorter_output_state(p, e, cfg);
    const auto raw = to_raw(sort_two_photon(p, e, cfg));

    const double uu = jti(state, PortPair::upper_upper).integral();
    const double ll = jti(state, PortPair::lower_lower).integral();
    const double ul = jti(state, PortPair::upper_lower).integral();
    CHECK(uu == doctest::Approx(raw.p20).epsilon(1e-3));
    CHECK(ll == doctest::Approx(raw.p02).epsilon(1e-3));
    CHECK(ul == doctest::Approx(raw.p11).epsilon(1e-3));
    CHECK(uu + ll + ul == doctest::Approx(state.total_weight()).epsilon(1e-3));
}

TEST_CASE("jti: maps are exchange symmetric and nonnegative") {
    EmitterParams e;
    e.beta = 1.0;
    const auto state = sorter_output_state(lab_pulse(128), e, {128, 20.0, 1});
    for (const auto port :
         {PortPair::upper_upper, PortPair::lower_lower, PortPair::upper_lower}) {
        const auto map = jti(state, port);
        CHECK(map.intensity.minCoeff() >= -1e-12);
        CHECK((map.intensity - map.intensity.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * map.intensity.maxCoeff());
    }
}

TEST_CASE("jti: correct-port pairs bunch along the diagonal") {
    EmitterParams e;
    e.beta = 1.0;
    const auto p = gaussian_pulse(make_frequency_grid(128, 20.0), 0.0, 1.65, 0.0);
    const auto map = jti(sorter_output_state(p, e, {128, 20.0, 1}),
                         PortPair::lower_lower);
    double w = 0.0, su = 0.0, sv = 0.0, suu = 0.0, svv = 0.0;
    for (int i = 0; i < map.times.size(); ++i) {
        for (int j = 0; j < map.times.size(); ++j) {
            const double m = map.intensity(i, j);
            const double u = (map.times[i] + map.times[j]) / std::sqrt(2.0);
            const double v = (map.times[i] - map.times[j]) / std::sqrt(2.0);
            w += m;
            su += m * u;
            sv += m * v;
            suu += m * u * u;
            svv += m * v * v;
        }
    }
    const double var_diag = suu / w - (su / w) * (su / w);
    const double var_anti = svv / w - (sv / w) * (sv / w);
    CHECK(var_diag > 1.5 * var_anti);
}

TEST_CASE("temporal filter: wide centered window is a no-op") {
    const SorterConfig cfg{128, 20.0, 5};
    const auto p = lab_pulse(128);
    const auto e = lab_emitter();
    const auto state = sorter_output_state(p, e, cfg);
    const auto unfiltered = sort_two_photon(p, e, cfg);

    const auto wide = temporal_filter(state, 30.0, lab_units(), 0.0);
    CHECK(wide.acceptance == doctest::Approx(unfiltered.survival2()).epsilon(1e-6));
    CHECK(wide.stats.p20 == doctest::Approx(unfiltered.p20).epsilon(1e-6));
    CHECK(wide.stats.p02 == doctest::Approx(unfiltered.p02).epsilon(1e-6));
    CHECK(wide.stats.p11 == doctest::Approx(unfiltered.p11).epsilon(1e-6));

    // The default window opens at the arrival time instead and rejects the
    // early half of the wavepacket, so it stays below the full survival.
    const auto leading = temporal_filter(state, 30.0, lab_units());
    CHECK(leading.acceptance < unfiltered.survival2() - 0.05);
}

TEST_CASE("temporal filter: frozen experimental detection window") {
    const SorterConfig cfg{256, 20.0, 21};
    const auto state = sorter_output_state(lab_pulse(256), lab_emitter(), cfg);

    const auto f = temporal_filter(state, 2.5, lab_units());
    CHECK(f.acceptance == doctest::Approx(0.41237407151996691).epsilon(1e-9));
    CHECK(f.stats.p02 == doctest::Approx(0.44948461132717488).epsilon(1e-9));
    CHECK(f.stats.p20 == doctest::Approx(0.3841416358323792).epsilon(1e-9));
    CHECK(f.stats.p11 == doctest::Approx(0.16637375284044595).epsilon(1e-9));
    CHECK(f.stats.p02_coherent_fraction ==
          doctest::Approx(0.81492831050522407).epsilon(1e-9));
    CHECK(f.stats.p20 + f.stats.p02 + f.stats.p11 ==
          doctest::Approx(1.0).epsilon(1e-12));

    // Centered 4 ns window regression.
    const auto centered = temporal_filter(state, 4.0, lab_units(), 0.0);
    CHECK(centered.stats.p02 == doctest::Approx(0.3422).epsilon(2e-3));
    CHECK(centered.acceptance == doctest::Approx(0.6263).epsilon(2e-3));

    // Tight windows post-select the bunched inelastic component.
    const auto tight = temporal_filter(state, 0.4, lab_units());
    CHECK(tight.acceptance < 0.15);
    const auto full = stats_from_state(state);
    CHECK(tight.stats.p02 > full.p02);
}

TEST_CASE("temporal filter: validation") {
    const auto state =
        sorter_output_state(lab_pulse(128), lab_emitter(), {128, 20.0, 1});
    CHECK_THROWS_AS(temporal_filter(state, 0.0, lab_units()), ConfigError);
    CHECK_THROWS_AS(temporal_filter(state, -1.0, lab_units()), ConfigError);
    // Below one time bin (dt ~ 0.102 ns on this grid).
    CHECK_THROWS_AS(temporal_filter(state, 0.05, lab_units()), ConfigError);
    // Physical units are required to place a ns window.
    CHECK_THROWS_AS(temporal_filter(state, 2.5, NormalizedUnits{}), ConfigError);
}
