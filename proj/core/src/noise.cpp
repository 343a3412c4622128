#include "sorterlab/noise.hpp"

#include "sorterlab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace sorterlab {

double jump_probability(const Pulse& p, const EmitterParams& e) {
    e.validate();
    EmitterParams unit = e;
    unit.beta = 1.0;
    const SinglePhotonAmplitude full = scatter_one(p, unit);
    double jump = 1.0 - full.norm2();
    // Clamp quadrature noise at the boundaries.
    if (jump < 0.0) jump = 0.0;
    if (jump > 1.0) jump = 1.0;
    return jump;
}

double DephasingBranchSet::total_weight() const {
    double sum = 0.0;
    for (const auto& b : branches) sum += b.weight;
    return sum;
}

DephasingBranchSet dephasing_branches(int n_photons, double p_jump) {
    if (n_photons != 1 && n_photons != 2)
        throw ConfigError("dephasing_branches supports 1 or 2 photons");
    if (p_jump < 0.0 || p_jump > 1.0)
        throw ConfigError("jump probability must lie in [0, 1]");
    const double q = p_jump;
    DephasingBranchSet set;
    if (n_photons == 1) {
        set.branches.push_back({1.0 - q, 1, {kCoherentTag, kCoherentTag}});
        set.branches.push_back({q, 1, {0, kCoherentTag}});
    } else {
        // Independent per-photon labels; the two jump indices are distinct,
        // hence mutually orthogonal modes.
        set.branches.push_back({(1.0 - q) * (1.0 - q), 2, {kCoherentTag, kCoherentTag}});
        set.branches.push_back({q * (1.0 - q), 2, {0, kCoherentTag}});
        set.branches.push_back({(1.0 - q) * q, 2, {kCoherentTag, 1}});
        set.branches.push_back({q * q, 2, {0, 1}});
    }
    return set;
}

DiffusionQuadrature diffusion_quadrature(double sigma, int n_nodes) {
    if (sigma < 0.0)
        throw ConfigError("spectral diffusion sigma must be >= 0");
    if (n_nodes < 1 || n_nodes % 2 == 0)
        throw ConfigError("diffusion quadrature needs an odd node count >= 1");
    DiffusionQuadrature q;
    q.sigma = sigma;
    if (sigma == 0.0 || n_nodes == 1) {
        q.nodes = ArrayXd::Zero(1);
        q.weights = ArrayXd::Ones(1);
        return q;
    }
    // Golub-Welsch on the physicists' Hermite Jacobi matrix: off-diagonal
    // sqrt(i/2). Eigenvalues are the Hermite nodes; squared first eigenvector
    // components are the weights normalized to 1.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
    for (int i = 1; i < n_nodes; ++i) {
        const double b = std::sqrt(i / 2.0);
        jacobi(i, i - 1) = b;
        jacobi(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    q.nodes = std::sqrt(2.0) * sigma * solver.eigenvalues().array();
    q.weights = solver.eigenvectors().row(0).array().square();
    // Exact zero at the central node of the odd rule.
    q.nodes[n_nodes / 2] = 0.0;
    return q;
}

} // namespace sorterlab
