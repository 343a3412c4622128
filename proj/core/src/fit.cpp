#include "sorterlab/fit.hpp"

#include "sorterlab/errors.hpp"
#include "sorterlab/parallel.hpp"
#include "sorterlab/rng.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace sorterlab {

namespace {

using Params = std::array<double, 3>;

struct Bounds {
    std::array<double, 2> lo_hi[3];
};

Params clamp_to(const FitProblem& prob, const Params& x) {
    auto clamp1 = [](double v, const std::array<double, 2>& b) {
        return std::min(std::max(v, b[0]), b[1]);
    };
    return {clamp1(x[0], prob.beta_bounds), clamp1(x[1], prob.dephasing_bounds),
            clamp1(x[2], prob.diffusion_bounds)};
}

// Weighted sum of squares over (P10, P02, P11); P20 is the redundant
// two-photon component and is dropped. Out-of-box proposals are evaluated at
// the clamped point plus a quadratic penalty, which steers the simplex back
// inside without discontinuities.
double objective(const FitProblem& prob, const std::vector<double>& detunings,
                 const Params& raw) {
    const Params x = clamp_to(prob, raw);
    double penalty = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double d = raw[i] - x[i];
        penalty += 1e4 * d * d;
    }
    const auto rows = forward_model(x, detunings, prob.pulse_template, prob.resolution);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const FitObservation& o = prob.observed[i];
        const SorterStats& s = rows[i].stats;
        const double r10 = (s.p10 - o.p10) / o.p10_err;
        const double r02 = (s.p02 - o.p02) / o.p02_err;
        const double r11 = (s.p11 - o.p11) / o.p11_err;
        chi2 += r10 * r10 + r02 * r02 + r11 * r11;
    }
    return chi2 + penalty;
}

struct SimplexResult {
    Params x{};
    double f = 0.0;
    int evals = 0;
    bool converged = false;
};

template <class F>
SimplexResult nelder_mead(const F& fn, const Params& start, const Params& steps,
                          int budget, double ftol, double xtol) {
    struct Vertex {
        Params x;
        double f;
    };
    std::array<Vertex, 4> v;
    int evals = 0;
    auto eval = [&](const Params& x) {
        ++evals;
        return fn(x);
    };
    v[0] = {start, eval(start)};
    for (int i = 0; i < 3; ++i) {
        Params x = start;
        x[i] += steps[i];
        v[i + 1] = {x, eval(x)};
    }
    auto order = [&] {
        std::sort(v.begin(), v.end(),
                  [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    order();
    bool converged = false;
    while (evals < budget) {
        double size = 0.0;
        for (int i = 1; i < 4; ++i)
            for (int d = 0; d < 3; ++d)
                size = std::max(size, std::abs(v[i].x[d] - v[0].x[d]));
        if (std::abs(v[3].f - v[0].f) <= ftol * (1.0 + std::abs(v[0].f)) &&
            size <= xtol) {
            converged = true;
            break;
        }
        Params centroid{};
        for (int i = 0; i < 3; ++i)
            for (int d = 0; d < 3; ++d) centroid[d] += v[i].x[d] / 3.0;
        auto blend = [&](double coeff) {
            Params x;
            for (int d = 0; d < 3; ++d)
                x[d] = centroid[d] + coeff * (centroid[d] - v[3].x[d]);
            return x;
        };
        const Params refl = blend(1.0);
        const double f_refl = eval(refl);
        if (f_refl < v[0].f) {
            const Params expa = blend(2.0);
            const double f_expa = eval(expa);
            v[3] = f_expa < f_refl ? Vertex{expa, f_expa} : Vertex{refl, f_refl};
        } else if (f_refl < v[2].f) {
            v[3] = {refl, f_refl};
        } else {
            const Params contr = blend(f_refl < v[3].f ? 0.5 : -0.5);
            const double f_contr = eval(contr);
            if (f_contr < std::min(f_refl, v[3].f)) {
                v[3] = {contr, f_contr};
            } else {
                for (int i = 1; i < 4; ++i) {
                    for (int d = 0; d < 3; ++d)
                        v[i].x[d] = v[0].x[d] + 0.5 * (v[i].x[d] - v[0].x[d]);
                    v[i].f = eval(v[i].x);
                }
            }
        }
        order();
    }
    return {v[0].x, v[0].f, evals, converged};
}

} // namespace

void FitProblem::validate() const {
    if (observed.size() < 8)
        throw ConfigError("joint fit needs at least 8 detuning points");
    for (const auto& o : observed)
        if (!(o.p10_err > 0.0) || !(o.p20_err > 0.0) || !(o.p02_err > 0.0) ||
            !(o.p11_err > 0.0))
            throw ConfigError("observation standard errors must be positive");
    const Params g = initial_guess;
    if (g[0] < beta_bounds[0] || g[0] > beta_bounds[1] ||
        g[1] < dephasing_bounds[0] || g[1] > dephasing_bounds[1] ||
        g[2] < diffusion_bounds[0] || g[2] > diffusion_bounds[1])
        throw ConfigError("initial guess must lie inside the bounds");
}

std::vector<DetuningSweepRow> forward_model(const std::array<double, 3>& params,
                                            const std::vector<double>& detunings,
                                            const Pulse& pulse_template,
                                            const SorterConfig& cfg) {
    if (params[0] == 0.0) {
        // Decoupled emitter: the sorter is the identity on every branch.
        std::vector<DetuningSweepRow> rows(detunings.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            SorterStats s;
            s.p10 = 1.0;
            s.p20 = 1.0;
            rows[i] = {detunings[i], s};
        }
        return rows;
    }
    EmitterParams e;
    e.beta = params[0];
    e.dephasing = params[1];
    e.spectral_diffusion = params[2];
    return detuning_sweep(e, pulse_template, detunings, cfg);
}

FitResult fit(const FitProblem& prob) {
    prob.validate();
    std::vector<double> detunings(prob.observed.size());
    for (std::size_t i = 0; i < detunings.size(); ++i)
        detunings[i] = prob.observed[i].detuning;
    const auto fn = [&](const Params& x) { return objective(prob, detunings, x); };

    // Restart 0 runs from the given guess, the rest from deterministic
    // jitters inside the box.
    constexpr int n_restarts = 5;
    const std::array<std::array<double, 2>, 3> bounds = {
        prob.beta_bounds, prob.dephasing_bounds, prob.diffusion_bounds};
    std::array<Params, n_restarts> starts;
    starts[0] = prob.initial_guess;
    const CounterRng rng(0x5eedf17ULL, 0);
    for (int r = 1; r < n_restarts; ++r) {
        Params s = prob.initial_guess;
        for (int d = 0; d < 3; ++d) {
            const double range = bounds[d][1] - bounds[d][0];
            const double jitter =
                (rng.uniform(static_cast<std::uint64_t>(r * 3 + d)) - 0.5) * 0.5 * range;
            s[d] = std::min(std::max(s[d] + jitter, bounds[d][0]), bounds[d][1]);
        }
        starts[r] = s;
    }

    std::array<SimplexResult, n_restarts> results;
    parallel_for(n_restarts, [&](std::size_t r) {
        const Params steps = {0.05, 0.02, 0.2};
        results[r] = nelder_mead(fn, starts[r], steps, 400, 1e-10, 1e-7);
    });
    int best = 0;
    for (int r = 1; r < n_restarts; ++r)
        if (results[r].f < results[best].f) best = r;

    const Params x = clamp_to(prob, results[best].x);
    FitResult out;
    out.beta = x[0];
    out.dephasing = x[1];
    out.diffusion = x[2];
    out.residual = results[best].f;
    out.converged = results[best].converged;
    for (const auto& r : results) out.evaluations += r.evals;
    // Pinned when within 10x the simplex xtol of a box edge: the simplex can
    // legitimately settle that far inside when the optimum sits on the bound.
    for (int d = 0; d < 3; ++d)
        if (x[d] <= bounds[d][0] + 1e-6 || x[d] >= bounds[d][1] - 1e-6)
            out.at_bound = true;

    // 1-sigma from the local quadratic model: cov = (H/2)^{-1} with H the
    // finite-difference Hessian of the weighted sum of squares. Near a bound
    // the curvature is taken just inside the box.
    const Params h = {1e-3, 1e-3, 1e-2};
    Params center = x;
    for (int d = 0; d < 3; ++d)
        center[d] = std::min(std::max(center[d], bounds[d][0] + h[d]),
                             bounds[d][1] - h[d]);
    auto shifted = [&](int d1, double s1, int d2, double s2) {
        Params p = center;
        p[d1] += s1 * h[d1];
        if (d2 >= 0) p[d2] += s2 * h[d2];
        return fn(p);
    };
    const double f0 = fn(center);
    out.evaluations += 1;
    Eigen::Matrix3d hess;
    for (int i = 0; i < 3; ++i) {
        hess(i, i) = (shifted(i, 1, -1, 0) - 2.0 * f0 + shifted(i, -1, -1, 0)) /
                     (h[i] * h[i]);
        out.evaluations += 2;
        for (int j = i + 1; j < 3; ++j) {
            hess(i, j) = hess(j, i) =
                (shifted(i, 1, j, 1) - shifted(i, 1, j, -1) - shifted(i, -1, j, 1) +
                 shifted(i, -1, j, -1)) /
                (4.0 * h[i] * h[j]);
            out.evaluations += 4;
        }
    }
    bool cov_ok = false;
    Eigen::Matrix3d half = 0.5 * hess;
    if (half.determinant() > 0.0) {
        const Eigen::Matrix3d cov = half.inverse();
        if (cov(0, 0) > 0.0 && cov(1, 1) > 0.0 && cov(2, 2) > 0.0) {
            out.beta_err = std::sqrt(cov(0, 0));
            out.dephasing_err = std::sqrt(cov(1, 1));
            out.diffusion_err = std::sqrt(cov(2, 2));
            cov_ok = true;
        }
    }
    if (!cov_ok) {
        // Fall back to uncorrelated per-axis curvature.
        auto axis_err = [&](int d) {
            return hess(d, d) > 0.0 ? std::sqrt(2.0 / hess(d, d)) : 0.0;
        };
        out.beta_err = axis_err(0);
        out.dephasing_err = axis_err(1);
        out.diffusion_err = axis_err(2);
    }
    return out;
}

} // namespace sorterlab
