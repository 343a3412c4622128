#include "sorterlab/sorter.hpp"

#include "sorterlab/errors.hpp"
#include "sorterlab/parallel.hpp"

#include <cmath>

namespace sorterlab {

namespace {

// Full discrete convolution c[m] = sum_{i+j=m} a[i] b[j], m in [0, 2N-2].
ArrayXcd convolve(const ArrayXcd& a, const ArrayXcd& b) {
    const int n = static_cast<int>(a.size());
    ArrayXcd c = ArrayXcd::Zero(2 * n - 1);
    for (int i = 0; i < n; ++i) {
        const Complex ai = a[i];
        if (ai == Complex{}) continue;
        for (int j = 0; j < n; ++j) c[i + j] += ai * b[j];
    }
    return c;
}

ArrayXd convolve_real(const ArrayXd& a, const ArrayXd& b) {
    const int n = static_cast<int>(a.size());
    ArrayXd c = ArrayXd::Zero(2 * n - 1);
    for (int i = 0; i < n; ++i) {
        const double ai = a[i];
        for (int j = 0; j < n; ++j) c[i + j] += ai * b[j];
    }
    return c;
}

// Raw branch bookkeeping of one diffusion node.
struct NodeStats {
    double p10r = 0.0, p01r = 0.0;
    double p20r = 0.0, p02r = 0.0, p11r = 0.0;
    double p02_coherent = 0.0;
    double surv1 = 0.0, surv2 = 0.0;
    // ingredients kept for state construction
    double ts = 0.0, x = 0.0, w1 = 0.0, w2 = 0.0;
};

// Coherent-sector norms and jump weights at one diffusion offset. All the
// port contents follow from three convolutions; the composite matrices are
// never formed here.
NodeStats eval_node(const Pulse& p, const EmitterParams& base, double offset) {
    EmitterParams e = base;
    e.emitter_detuning += offset;

    const int n = p.grid.n_points;
    const double d = p.grid.spacing;
    ArrayXcd t(n), s(n);
    for (int k = 0; k < n; ++k) {
        t[k] = transmission_coeff(e, p.grid.omega[k]);
        s[k] = excitation_amp(e, p.grid.omega[k]);
    }
    const ArrayXcd xi = t * p.amplitude;
    const double ts = xi.abs2().sum() * d;

    // inelastic(i,j) = pref * s_i s_j * conv_sp[i+j]
    const ArrayXcd conv_sp = convolve(s * p.amplitude, p.amplitude) * d;
    const Complex pref = Complex(0.0, 1.0 / M_PI) * std::sqrt(e.gamma());

    // |inel|^2 via (|s|^2 * |s|^2) against |conv_sp|^2
    const ArrayXd s2 = s.abs2();
    const ArrayXd a2 = convolve_real(s2, s2);
    const double inel_norm2 =
        std::norm(pref) * (a2 * conv_sp.abs2()).sum() * d * d;

    // <elastic, inelastic> via (conj(xi) s) self-convolution
    const ArrayXcd g = xi.conjugate() * s;
    const ArrayXcd gg = convolve(g, g);
    const Complex el_inel = pref * (gg * conv_sp).sum() * d * d;

    NodeStats out;
    out.ts = ts;
    // Ports of the coherent pair: upper amplitude el + inel/2, lower inel/2.
    const double p20c = ts * ts + el_inel.real() + 0.25 * inel_norm2;
    const double p02c = 0.25 * inel_norm2;
    const double pair_coherent = p20c + p02c;

    // Guided jump weight per photon: beta=1 calibration, held as a fixed
    // ratio to the total decay (x = J1/beta), capped by the guided budget.
    const double j1 = jump_probability(p, e);
    double x = std::min(j1 / e.beta, 1.0 - ts);
    if (x < 0.0) x = 0.0;
    out.x = x;

    // Pair jump branches: independent labels at leading order, rescaled if
    // the branch sum would exceed unity (deep corner of the parameter maps).
    double w1 = 2.0 * x, w2 = x * x;
    if (pair_coherent + w1 + w2 > 1.0 && w1 + w2 > 0.0) {
        const double scale = (1.0 - pair_coherent) / (w1 + w2);
        w1 *= scale;
        w2 *= scale;
    }
    out.w1 = w1;
    out.w2 = w2;

    // Orthogonal bin-localized jump branches split (1/4, 1/4, 1/2).
    const double wj = w1 + w2;
    out.p20r = p20c + 0.25 * wj;
    out.p02r = p02c + 0.25 * wj;
    out.p11r = 0.5 * wj;
    out.p02_coherent = p02c;
    out.surv2 = pair_coherent + wj;

    out.p10r = ts + 0.5 * x;
    out.p01r = 0.5 * x;
    out.surv1 = ts + x;
    return out;
}

NodeStats averaged_nodes(const Pulse& p, const EmitterParams& e, const SorterConfig& cfg) {
    e.validate();
    Pulse work = p;
    if (p.grid.n_points != cfg.n_points || p.grid.span != cfg.span)
        work = gaussian_pulse(make_frequency_grid(cfg.n_points, cfg.span),
                              p.center_detuning, p.duration_fwhm, p.mean_photon_number);
    const DiffusionQuadrature q =
        diffusion_quadrature(e.spectral_diffusion, cfg.diffusion_nodes);
    NodeStats acc;
    for (int i = 0; i < q.nodes.size(); ++i) {
        const NodeStats ns = eval_node(work, e, q.nodes[i]);
        const double v = q.weights[i];
        acc.p10r += v * ns.p10r;
        acc.p01r += v * ns.p01r;
        acc.p20r += v * ns.p20r;
        acc.p02r += v * ns.p02r;
        acc.p11r += v * ns.p11r;
        acc.p02_coherent += v * ns.p02_coherent;
        acc.surv1 += v * ns.surv1;
        acc.surv2 += v * ns.surv2;
    }
    return acc;
}

} // namespace

SorterStats to_raw(const SorterStats& s) {
    if (!s.normalized) return s;
    SorterStats r = s;
    r.p10 *= s.survival1();
    r.p01 *= s.survival1();
    r.p20 *= s.survival2();
    r.p02 *= s.survival2();
    r.p11 *= s.survival2();
    r.normalized = false;
    return r;
}

SorterStats sort_one_photon(const Pulse& p, const EmitterParams& e, const SorterConfig& cfg) {
    const NodeStats acc = averaged_nodes(p, e, cfg);
    SorterStats s;
    s.p10 = acc.p10r / acc.surv1;
    s.p01 = acc.p01r / acc.surv1;
    s.loss1 = 1.0 - acc.surv1;
    return s;
}

SorterStats sort_two_photon(const Pulse& p, const EmitterParams& e, const SorterConfig& cfg) {
    const NodeStats acc = averaged_nodes(p, e, cfg);
    SorterStats s;
    s.p20 = acc.p20r / acc.surv2;
    s.p02 = acc.p02r / acc.surv2;
    s.p11 = acc.p11r / acc.surv2;
    s.p02_coherent_fraction = (acc.p02r > 0.0) ? acc.p02_coherent / acc.p02r : 1.0;
    s.loss2 = 1.0 - acc.surv2;
    return s;
}

SorterStats sort_pulse(const Pulse& p, const EmitterParams& e, const SorterConfig& cfg) {
    const NodeStats acc = averaged_nodes(p, e, cfg);
    SorterStats s;
    s.p10 = acc.p10r / acc.surv1;
    s.p01 = acc.p01r / acc.surv1;
    s.loss1 = 1.0 - acc.surv1;
    s.p20 = acc.p20r / acc.surv2;
    s.p02 = acc.p02r / acc.surv2;
    s.p11 = acc.p11r / acc.surv2;
    s.p02_coherent_fraction = (acc.p02r > 0.0) ? acc.p02_coherent / acc.p02r : 1.0;
    s.loss2 = 1.0 - acc.surv2;
    return s;
}

double sorter_success(const SorterStats& s) {
    if (!s.normalized)
        throw ConfigError("sorter_success requires normalized statistics");
    if (std::abs(s.p10 + s.p01 - 1.0) > 1e-9 || std::abs(s.p20 + s.p02 + s.p11 - 1.0) > 1e-9)
        throw ConfigError("sorter_success requires closed one- and two-photon sectors");
    return 0.5 * (s.p10 + s.p02);
}

LinearBaseline linear_baseline(double p10) {
    if (p10 < 0.0 || p10 > 1.0)
        throw ConfigError("linear_baseline requires p10 in [0, 1]");
    return {p10 * p10, (1.0 - p10) * (1.0 - p10), 2.0 * p10 * (1.0 - p10)};
}

std::vector<DetuningSweepRow> detuning_sweep(const EmitterParams& e,
                                             const Pulse& pulse_template,
                                             const std::vector<double>& detunings,
                                             const SorterConfig& cfg) {
    std::vector<DetuningSweepRow> rows(detunings.size());
    parallel_for(detunings.size(), [&](std::size_t i) {
        const Pulse p = gaussian_pulse(pulse_template.grid, detunings[i],
                                       pulse_template.duration_fwhm,
                                       pulse_template.mean_photon_number);
        rows[i] = {detunings[i], sort_pulse(p, e, cfg)};
    });
    return rows;
}

double TwoPhotonState::total_weight() const {
    const double d = grid.spacing;
    double sum = 0.0;
    for (const auto& c : coherent) sum += c.weight * c.amp.squaredNorm() * d * d;
    for (const auto& j : jumps) sum += j.weight;
    return sum;
}

Eigen::Matrix2cd splitter_50_50() {
    Eigen::Matrix2cd u;
    const double r = 1.0 / std::sqrt(2.0);
    u << r, r, r, -r;
    return u;
}

TwoPhotonState scattered_pair_state(const Pulse& p, const EmitterParams& e,
                                    const SorterConfig& cfg) {
    e.validate();
    Pulse work = p;
    if (p.grid.n_points != cfg.n_points || p.grid.span != cfg.span)
        work = gaussian_pulse(make_frequency_grid(cfg.n_points, cfg.span),
                              p.center_detuning, p.duration_fwhm, p.mean_photon_number);
    const int n = work.grid.n_points;
    const double d = work.grid.spacing;
    const DiffusionQuadrature q =
        diffusion_quadrature(e.spectral_diffusion, cfg.diffusion_nodes);

    TwoPhotonState state;
    state.grid = work.grid;
    state.coherent.reserve(q.nodes.size());

    for (int node = 0; node < q.nodes.size(); ++node) {
        EmitterParams en = e;
        en.emitter_detuning += q.nodes[node];
        const double v = q.weights[node];

        const TwoPhotonAmplitude pair = scatter_two(work, en);
        const SinglePhotonAmplitude one = scatter_one(work, en);
        const MatrixXcd psi2 = pair.amplitude();
        const MatrixXcd& el = pair.elastic_part;

        // Composite pre-splitter amplitude over modes {arm-A, arm-B}: pair-in-
        // bin blocks carry psi2/2, split blocks carry the independent product
        // el/2 (no interaction across bins).
        TwoPhotonState::CoherentBranch cb;
        cb.weight = v;
        cb.amp.resize(2 * n, 2 * n);
        cb.amp.block(0, 0, n, n) = psi2 / 2.0;
        cb.amp.block(n, n, n, n) = psi2 / 2.0;
        cb.amp.block(0, n, n, n) = el / 2.0;
        cb.amp.block(n, 0, n, n) = el / 2.0;
        state.coherent.push_back(std::move(cb));

        // Jump branches, matching the node bookkeeping of eval_node exactly.
        const NodeStats ns = eval_node(work, e, q.nodes[node]);
        const double ts = ns.ts;
        if (ns.w1 + ns.w2 <= 0.0 || ts <= 0.0) continue;

        // Normalized envelopes: scattered coherent shape for the surviving
        // partner, the same intensity envelope as the modeled jump shape.
        Eigen::VectorXcd envelope = (one.amplitude / std::sqrt(ts)).matrix();

        auto mode_vector = [&](int mode, const Eigen::VectorXcd& env) {
            Eigen::VectorXcd vfull = Eigen::VectorXcd::Zero(2 * n);
            vfull.segment(mode * n, n) = env;
            return vfull;
        };
        const Eigen::VectorXcd in_a = mode_vector(0, envelope);
        const Eigen::VectorXcd in_b = mode_vector(1, envelope);

        // One-jump inventory: pair-in-A, pair-in-B, and the two split
        // orderings, each w1/4; two-jump inventory likewise w2/4 each.
        const std::array<std::pair<const Eigen::VectorXcd*, const Eigen::VectorXcd*>, 4>
            placements{{{&in_a, &in_a}, {&in_b, &in_b}, {&in_a, &in_b}, {&in_b, &in_a}}};
        for (const auto& [pa, pb] : placements)
            state.jumps.push_back({v * ns.w1 / 4.0, {0, kCoherentTag}, *pa, *pb});
        for (const auto& [pa, pb] : placements)
            state.jumps.push_back({v * ns.w2 / 4.0, {0, 1}, *pa, *pb});
    }
    return state;
}

TwoPhotonState apply_mode_unitary(const TwoPhotonState& s, const Eigen::Matrix2cd& u) {
    if (!(u * u.adjoint()).isIdentity(1e-12))
        throw ConfigError("mode transform must be unitary to 1e-12");
    const int n = s.grid.n_points;
    TwoPhotonState out;
    out.grid = s.grid;
    out.n_modes = s.n_modes;
    out.coherent.reserve(s.coherent.size());
    for (const auto& c : s.coherent) {
        TwoPhotonState::CoherentBranch cb;
        cb.weight = c.weight;
        cb.amp = MatrixXcd::Zero(2 * n, 2 * n);
        // A'_{(m i),(n j)} = sum_{m' n'} U_{m m'} U_{n n'} A_{(m' i),(n' j)}
        for (int m = 0; m < 2; ++m)
            for (int nn = 0; nn < 2; ++nn)
                for (int mp = 0; mp < 2; ++mp)
                    for (int np = 0; np < 2; ++np)
                        cb.amp.block(m * n, nn * n, n, n) +=
                            u(m, mp) * u(nn, np) * c.amp.block(mp * n, np * n, n, n);
        out.coherent.push_back(std::move(cb));
    }
    out.jumps.reserve(s.jumps.size());
    for (const auto& j : s.jumps) {
        TwoPhotonState::ProductBranch pb;
        pb.weight = j.weight;
        pb.labels = j.labels;
        pb.photon_a = Eigen::VectorXcd::Zero(2 * n);
        pb.photon_b = Eigen::VectorXcd::Zero(2 * n);
        for (int m = 0; m < 2; ++m)
            for (int mp = 0; mp < 2; ++mp) {
                pb.photon_a.segment(m * n, n) += u(m, mp) * j.photon_a.segment(mp * n, n);
                pb.photon_b.segment(m * n, n) += u(m, mp) * j.photon_b.segment(mp * n, n);
            }
        out.jumps.push_back(std::move(pb));
    }
    return out;
}

TwoPhotonState sorter_output_state(const Pulse& p, const EmitterParams& e,
                                   const SorterConfig& cfg) {
    return apply_mode_unitary(scattered_pair_state(p, e, cfg), splitter_50_50());
}

SorterStats stats_from_state(const TwoPhotonState& s) {
    const int n = s.grid.n_points;
    const double d2 = s.grid.spacing * s.grid.spacing;
    double p20 = 0.0, p02 = 0.0, p11 = 0.0, p02_coh = 0.0;
    for (const auto& c : s.coherent) {
        p20 += c.weight * c.amp.block(0, 0, n, n).squaredNorm() * d2;
        const double ll = c.weight * c.amp.block(n, n, n, n).squaredNorm() * d2;
        p02 += ll;
        p02_coh += ll;
        p11 += c.weight *
               (c.amp.block(0, n, n, n).squaredNorm() + c.amp.block(n, 0, n, n).squaredNorm()) *
               d2;
    }
    const double d = s.grid.spacing;
    for (const auto& j : s.jumps) {
        const double pau = j.photon_a.segment(0, n).squaredNorm() * d;
        const double pal = j.photon_a.segment(n, n).squaredNorm() * d;
        const double pbu = j.photon_b.segment(0, n).squaredNorm() * d;
        const double pbl = j.photon_b.segment(n, n).squaredNorm() * d;
        p20 += j.weight * pau * pbu;
        p02 += j.weight * pal * pbl;
        p11 += j.weight * (pau * pbl + pal * pbu);
    }
    const double surv = p20 + p02 + p11;
    SorterStats out;
    out.p20 = p20 / surv;
    out.p02 = p02 / surv;
    out.p11 = p11 / surv;
    out.p02_coherent_fraction = (p02 > 0.0) ? p02_coh / p02 : 1.0;
    out.loss2 = 1.0 - surv;
    return out;
}

} // namespace sorterlab
