#pragma once

#include "sorterlab/scatter.hpp"

#include <array>
#include <utility>
#include <vector>

namespace sorterlab {

// Pure-dephasing jump probability per photon. Calibrated at beta = 1: the
// dephased transmission removes 1 - integral |t(k;beta=1) phi(k)|^2 dk from
// the coherent branch, and that remainder keeps its ratio to the total decay
// when beta changes, so the guided-jump weight used downstream is
// jump_probability / beta.
double jump_probability(const Pulse& p, const EmitterParams& e);

// Distinguishability-labeled branch decomposition for one or two photons with
// per-photon jump probability q. Labels: kCoherentTag for a surviving coherent
// photon, 0,1,... for jump photons; distinct jump indices are mutually
// orthogonal modes.
struct DephasingBranchSet {
    struct Branch {
        double weight = 0.0;
        int n_photons = 0;
        std::array<int, 2> labels{kCoherentTag, kCoherentTag};
    };
    std::vector<Branch> branches;

    double total_weight() const;
};
DephasingBranchSet dephasing_branches(int n_photons, double p_jump);

// Gauss-Hermite quadrature against the spectral-diffusion Gaussian: nodes are
// detuning offsets sqrt(2)*sigma*x_i, weights w_i/sqrt(pi) sum to 1, and the
// rule integrates polynomials up to degree 2n-1 exactly. sigma = 0 (or
// n_nodes = 1) degenerates to the single node {0, 1}.
struct DiffusionQuadrature {
    ArrayXd nodes;
    ArrayXd weights;
    double sigma = 0.0;
};
// Throws ConfigError unless n_nodes >= 1 and odd (zero offset must be a node).
DiffusionQuadrature diffusion_quadrature(double sigma, int n_nodes = 21);

// Weighted average of f(offset) over the quadrature, for any vector-space
// value type supporting v += w * f. With sigma = 0 this is exactly f(0).
template <class F>
auto spectral_diffusion_average(const DiffusionQuadrature& q, F&& f) {
    auto acc = q.weights[0] * f(q.nodes[0]);
    for (int i = 1; i < q.nodes.size(); ++i)
        acc += q.weights[i] * f(q.nodes[i]);
    return acc;
}

} // namespace sorterlab
