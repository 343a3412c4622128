#pragma once

#include "sorterlab/sorter.hpp"

#include <array>
#include <vector>

namespace sorterlab {

// One detuning point of the joint one-/two-photon dataset with per-quantity
// standard errors.
struct FitObservation {
    double detuning = 0.0;
    double p10 = 0.0, p20 = 0.0, p02 = 0.0, p11 = 0.0;
    double p10_err = 1.0, p20_err = 1.0, p02_err = 1.0, p11_err = 1.0;
};

// Joint fit setup: observed table, the pulse template shared by all points,
// box bounds for (beta, dephasing, diffusion), and the starting guess.
struct FitProblem {
    std::vector<FitObservation> observed;
    Pulse pulse_template;
    std::array<double, 2> beta_bounds{1e-3, 1.0};
    std::array<double, 2> dephasing_bounds{0.0, 0.5};
    std::array<double, 2> diffusion_bounds{0.0, 3.0};
    std::array<double, 3> initial_guess{0.8, 0.02, 0.5};
    // Reduced evaluation resolution keeps the simplex search fast; accuracy
    // is well inside the data noise for the tested regimes.
    SorterConfig resolution{128, 20.0, 13};

    void validate() const; // >= 8 points, positive errors, guess in bounds
};

struct FitResult {
    double beta = 0.0, dephasing = 0.0, diffusion = 0.0;
    double beta_err = 0.0, dephasing_err = 0.0, diffusion_err = 0.0;
    double residual = 0.0; // weighted sum of squares at the optimum
    bool converged = false;
    bool at_bound = false; // some estimate pinned at a box bound
    int evaluations = 0;
};

// Sorter predictions at the given parameter triple over a detuning list.
// beta = 0 is accepted as the exact decoupled limit (identity sorter:
// P10 = 1, P20 = 1); everything else must lie inside the physical box.
std::vector<DetuningSweepRow> forward_model(const std::array<double, 3>& params,
                                            const std::vector<double>& detunings,
                                            const Pulse& pulse_template,
                                            const SorterConfig& cfg = {128, 20.0, 13});

// Weighted least squares via Nelder-Mead with 5 jittered restarts (run in
// parallel); P20 is dropped as the redundant two-photon component. 1-sigma
// uncertainties come from the finite-difference curvature at the optimum.
// Never throws for non-convergence: the flag reports it.
FitResult fit(const FitProblem& prob);

} // namespace sorterlab
