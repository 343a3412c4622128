#include "sorterlab/sorter.hpp"

#include "sorterlab/errors.hpp"
#include "sorterlab/parallel.hpp"

#include <cmath>

namespace sorterlab {

namespace {

// Joint temporal intensities of all three port pairs of a sorter output
// state, as continuum densities: integrating a map against dt^2 gives the
// port-pair probability. ll_coherent tracks the no-jump share of the lower
// bunch separately (the filter needs it for the coherent fraction).
struct PortMaps {
    Eigen::MatrixXd uu, ll, ul, ll_coherent;
};

PortMaps port_intensity_maps(const TwoPhotonState& s) {
    const int n = s.grid.n_points;
    const double dw = s.grid.spacing;
    const double dt = time_spacing(s.grid);
    const double meas1 = dw / dt;        // |F psi|^2 -> density over time
    const double meas2 = meas1 * meas1;  // two-photon version
    const MatrixXcd f = dft_matrix(s.grid);

    PortMaps acc;
    acc.uu = Eigen::MatrixXd::Zero(n, n);
    acc.ll = Eigen::MatrixXd::Zero(n, n);
    acc.ul = Eigen::MatrixXd::Zero(n, n);
    acc.ll_coherent = Eigen::MatrixXd::Zero(n, n);

    // Coherent branches carry the dense transforms; run them in parallel into
    // per-branch slots and reduce in order (deterministic sums).
    struct BranchMaps {
        Eigen::MatrixXd uu, ll, ul;
    };
    std::vector<BranchMaps> parts(s.coherent.size());
    parallel_for(s.coherent.size(), [&](std::size_t i) {
        const auto& c = s.coherent[i];
        BranchMaps& bm = parts[i];
        const auto block_uu = c.amp.block(0, 0, n, n);
        const auto block_ll = c.amp.block(n, n, n, n);
        const auto block_ul = c.amp.block(0, n, n, n);
        const auto block_lu = c.amp.block(n, 0, n, n);
        if (block_uu.squaredNorm() > 0.0) {
            const MatrixXcd t = f * block_uu * f.transpose();
            bm.uu = meas2 * c.weight * t.cwiseAbs2();
        }
        if (block_ll.squaredNorm() > 0.0) {
            const MatrixXcd t = f * block_ll * f.transpose();
            bm.ll = meas2 * c.weight * t.cwiseAbs2();
        }
        const bool has_ul = block_ul.squaredNorm() > 0.0;
        const bool has_lu = block_lu.squaredNorm() > 0.0;
        if (has_ul || has_lu) {
            bm.ul = Eigen::MatrixXd::Zero(n, n);
            // First axis is the upper-port time, second the lower-port time.
            if (has_ul) {
                const MatrixXcd t = f * block_ul * f.transpose();
                bm.ul += meas2 * c.weight * t.cwiseAbs2();
            }
            if (has_lu) {
                const MatrixXcd t = f * block_lu * f.transpose();
                bm.ul += meas2 * c.weight * t.cwiseAbs2().transpose();
            }
        }
    });
    for (const auto& bm : parts) {
        if (bm.uu.size()) {
            acc.uu += bm.uu;
        }
        if (bm.ll.size()) {
            acc.ll += bm.ll;
            acc.ll_coherent += bm.ll;
        }
        if (bm.ul.size()) acc.ul += bm.ul;
    }

    // Product branches: per-photon port intensities, symmetrized products.
    for (const auto& j : s.jumps) {
        const Eigen::VectorXd ia_u = meas1 * (f * j.photon_a.segment(0, n)).cwiseAbs2();
        const Eigen::VectorXd ia_l = meas1 * (f * j.photon_a.segment(n, n)).cwiseAbs2();
        const Eigen::VectorXd ib_u = meas1 * (f * j.photon_b.segment(0, n)).cwiseAbs2();
        const Eigen::VectorXd ib_l = meas1 * (f * j.photon_b.segment(n, n)).cwiseAbs2();
        acc.uu += j.weight * 0.5 *
                  (ia_u * ib_u.transpose() + ib_u * ia_u.transpose());
        acc.ll += j.weight * 0.5 *
                  (ia_l * ib_l.transpose() + ib_l * ia_l.transpose());
        acc.ul += j.weight * (ia_u * ib_l.transpose() + ib_u * ia_l.transpose());
    }
    return acc;
}

} // namespace

double JtiGrid::integral() const {
    if (times.size() < 2) return 0.0;
    const double dt = times[1] - times[0];
    return intensity.sum() * dt * dt;
}

JtiGrid jti(const TwoPhotonState& s, PortPair pair, const NormalizedUnits& units) {
    const PortMaps maps = port_intensity_maps(s);
    JtiGrid out;
    out.times = time_grid(s.grid);
    if (units.has_physical()) out.times_ns = out.times * units.time_unit_ps() / 1000.0;
    switch (pair) {
        case PortPair::upper_upper: out.intensity = maps.uu; break;
        case PortPair::lower_lower: out.intensity = maps.ll; break;
        case PortPair::upper_lower: out.intensity = maps.ul; break;
    }
    return out;
}

FilterResult temporal_filter(const TwoPhotonState& s, double window_ns,
                             const NormalizedUnits& units,
                             std::optional<double> window_center_ns) {
    if (!units.has_physical())
        throw ConfigError("temporal filter needs a physical time scale (lifetime)");
    const double w = units.time_to_internal(window_ns * 1000.0);
    if (!(w > 0.0))
        throw ConfigError("filter window must be positive");
    const double dt = time_spacing(s.grid);
    if (w <= dt)
        throw ConfigError("filter window must exceed the temporal grid resolution");

    // The gate opens at the pulse arrival (t = 0) unless an explicit center
    // is requested.
    double lo = 0.0, hi = w;
    if (window_center_ns) {
        const double c = units.time_to_internal(*window_center_ns * 1000.0);
        lo = c - 0.5 * w;
        hi = c + 0.5 * w;
    }

    const PortMaps maps = port_intensity_maps(s);
    const ArrayXd t = time_grid(s.grid);
    const int n = static_cast<int>(t.size());
    Eigen::VectorXd mask(n);
    for (int i = 0; i < n; ++i) mask[i] = (t[i] >= lo && t[i] <= hi) ? 1.0 : 0.0;

    auto windowed = [&](const Eigen::MatrixXd& m) {
        return mask.dot(m * mask) * dt * dt;
    };
    const double p20f = windowed(maps.uu);
    const double p02f = windowed(maps.ll);
    const double p11f = windowed(maps.ul);
    const double p02f_coherent = windowed(maps.ll_coherent);
    const double accepted = p20f + p02f + p11f;

    FilterResult res;
    res.acceptance = accepted;
    if (accepted > 0.0) {
        res.stats.p20 = p20f / accepted;
        res.stats.p02 = p02f / accepted;
        res.stats.p11 = p11f / accepted;
        res.stats.p02_coherent_fraction = (p02f > 0.0) ? p02f_coherent / p02f : 1.0;
    }
    res.stats.loss2 = 1.0 - accepted;
    return res;
}

} // namespace sorterlab
