#include "doctest.h"
#include "helpers.hpp"
#include "sorterlab/errors.hpp"
#include "sorterlab/fit.hpp"

#include <algorithm>
#include <cmath>

using namespace sorterlab;
using sorterlab::testing::lab_pulse;

namespace {

std::vector<double> nine_detunings() {
    return {-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0};
}

// Synthetic observations generated by the forward model itself, so the
// noiseless optimum sits exactly at `truth`.
FitProblem synthetic_problem(const std::array<double, 3>& truth,
                             const SorterConfig& resolution) {
    FitProblem prob;
    prob.pulse_template = lab_pulse(128);
    prob.resolution = resolution;
    const auto rows =
        forward_model(truth, nine_detunings(), prob.pulse_template, resolution);
    for (const auto& row : rows) {
        FitObservation obs;
        obs.detuning = row.detuning;
        obs.p10 = row.stats.p10;
        obs.p20 = row.stats.p20;
        obs.p02 = row.stats.p02;
        obs.p11 = row.stats.p11;
        obs.p10_err = 0.01;
        obs.p20_err = 0.005;
        obs.p02_err = 0.005;
        obs.p11_err = 0.005;
        prob.observed.push_back(obs);
    }
    return prob;
}

double objective(const FitProblem& prob, const std::array<double, 3>& params) {
    std::vector<double> detunings;
    for (const auto& o : prob.observed) detunings.push_back(o.detuning);
    const auto rows =
        forward_model(params, detunings, prob.pulse_template, prob.resolution);
    double ssr = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& o = prob.observed[i];
        const auto& m = rows[i].stats;
        auto term = [](double obs, double model, double err) {
            const double r = (obs - model) / err;
            return r * r;
        };
        ssr += term(o.p10, m.p10, o.p10_err);
        ssr += term(o.p02, m.p02, o.p02_err);
        ssr += term(o.p11, m.p11, o.p11_err);
    }
    return ssr;
}

} // namespace

TEST_CASE("forward model: decoupled emitter is the identity sorter") {
    const auto tpl = lab_pulse(128);
    const auto rows = forward_model({0.0, 0.0, 0.0}, {-2.0, 0.0, 2.0}, tpl);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.stats.p10 == 1.0);
        CHECK(row.stats.p01 == 0.0);
        CHECK(row.stats.p20 == 1.0);
        CHECK(row.stats.p02 == 0.0);
        CHECK(row.stats.p11 == 0.0);
        CHECK(row.stats.loss1 == 0.0);
        CHECK(row.stats.loss2 == 0.0);
    }
}

TEST_CASE("forward model: continuous toward the decoupled limit") {
    const auto tpl = lab_pulse(128);
    const SorterConfig cfg{128, 20.0, 1};
    const auto rows = forward_model({1e-3, 0.0, 0.0}, {0.0}, tpl, cfg);
    CHECK(rows[0].stats.p10 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rows[0].stats.p20 > 0.99);
    CHECK(rows[0].stats.p02 < 0.01);
}

TEST_CASE("forward model: smooth in beta") {
    const auto tpl = lab_pulse(128);
    const SorterConfig cfg{128, 20.0, 1};
    const auto a = forward_model({0.75, 0.0, 0.0}, {0.0}, tpl, cfg);
    const auto b = forward_model({0.7501, 0.0, 0.0}, {0.0}, tpl, cfg);
    CHECK(std::abs(a[0].stats.p10 - b[0].stats.p10) < 5e-4);
    CHECK(std::abs(a[0].stats.p02 - b[0].stats.p02) < 5e-4);
    CHECK(std::abs(a[0].stats.p02 - b[0].stats.p02) > 0.0);
}

TEST_CASE("forward model: parameter box is enforced") {
    const auto tpl = lab_pulse(128);
    CHECK_THROWS_AS(forward_model({1.2, 0.0, 0.0}, {0.0}, tpl), ConfigError);
    CHECK_THROWS_AS(forward_model({-0.1, 0.0, 0.0}, {0.0}, tpl), ConfigError);
    CHECK_THROWS_AS(forward_model({0.8, -0.01, 0.0}, {0.0}, tpl), ConfigError);
    CHECK_THROWS_AS(forward_model({0.8, 0.0, -0.5}, {0.0}, tpl), ConfigError);
}

TEST_CASE("fit problem validation") {
    FitProblem prob;
    prob.pulse_template = lab_pulse(128);
    FitObservation obs;
    obs.p10 = 0.9;
    for (int i = 0; i < 7; ++i) {
        obs.detuning = i - 3.0;
        prob.observed.push_back(obs);
    }
    CHECK_THROWS_AS(prob.validate(), ConfigError); // only 7 points

    obs.detuning = 4.0;
    prob.observed.push_back(obs);
    CHECK_NOTHROW(prob.validate());

    auto bad_err = prob;
    bad_err.observed[3].p02_err = 0.0;
    CHECK_THROWS_AS(bad_err.validate(), ConfigError);

    auto bad_guess = prob;
    bad_guess.initial_guess = {0.8, 0.6, 0.5}; // dephasing above its bound
    CHECK_THROWS_AS(bad_guess.validate(), ConfigError);
}

TEST_CASE("fit: noiseless synthetic data is recovered to 1e-4") {
    const std::array<double, 3> truth = {0.75, 0.035, 0.3};
    const SorterConfig res{128, 20.0, 5};
    auto prob = synthetic_problem(truth, res);
    prob.initial_guess = {0.85, 0.01, 0.6};
    const auto fitres = fit(prob);

    CHECK(fitres.converged);
    CHECK(!fitres.at_bound);
    CHECK(std::abs(fitres.beta - truth[0]) < 1e-4);
    CHECK(std::abs(fitres.dephasing - truth[1]) < 1e-4);
    CHECK(std::abs(fitres.diffusion - truth[2]) < 1e-3);
    CHECK(fitres.residual < 1e-8);
    CHECK(fitres.evaluations > 0);
    CHECK(fitres.beta_err > 0.0);
    CHECK(fitres.dephasing_err > 0.0);
    CHECK(fitres.diffusion_err > 0.0);

    // The optimizer can only improve on the initial guess.
    CHECK(fitres.residual <= objective(prob, prob.initial_guess) + 1e-12);
}

TEST_CASE("fit: invariant under point order and joint error rescale") {
    const std::array<double, 3> truth = {0.8, 0.02, 0.2};
    const SorterConfig res{128, 20.0, 3};
    auto prob = synthetic_problem(truth, res);
    // Perturb one observation so the optimum is not exactly at a model point.
    prob.observed[4].p10 += 0.004;
    prob.observed[4].p02 -= 0.002;

    const auto base = fit(prob);

    auto reordered = prob;
    std::reverse(reordered.observed.begin(), reordered.observed.end());
    const auto rev = fit(reordered);
    CHECK(std::abs(rev.beta - base.beta) < 1e-4);
    CHECK(std::abs(rev.dephasing - base.dephasing) < 1e-4);
    CHECK(std::abs(rev.diffusion - base.diffusion) < 1e-3);

    auto rescaled = prob;
    for (auto& o : rescaled.observed) {
        o.p10_err *= 3.7;
        o.p20_err *= 3.7;
        o.p02_err *= 3.7;
        o.p11_err *= 3.7;
    }
    const auto scaled = fit(rescaled);
    CHECK(std::abs(scaled.beta - base.beta) < 1e-5);
    CHECK(std::abs(scaled.dephasing - base.dephasing) < 1e-5);
    CHECK(std::abs(scaled.diffusion - base.diffusion) < 1e-4);
    CHECK(scaled.residual ==
          doctest::Approx(base.residual / (3.7 * 3.7)).epsilon(1e-6));
}

TEST_CASE("fit: boundary truth pins the estimate with a flag") {
    const std::array<double, 3> truth = {1.0, 0.02, 0.3};
    const SorterConfig res{128, 20.0, 5};
    auto prob = synthetic_problem(truth, res);
    prob.initial_guess = {0.9, 0.03, 0.4};
    const auto fitres = fit(prob);
    CHECK(fitres.beta > 1.0 - 1e-4);
    CHECK(fitres.beta <= 1.0);
    CHECK(fitres.at_bound);
}
