#include "sorterlab/bsm.hpp"

#include "sorterlab/errors.hpp"
#include "sorterlab/parallel.hpp"

#include <cmath>

namespace sorterlab {

BsmOutcome bsm_probabilities(const BsmInput& in) {
    const SorterStats& s = in.stats;
    const double pv = in.static_imbalance;
    if (pv < 0.0 || pv > s.p01 + 1e-12)
        throw ConfigError("static imbalance P_V must lie in [0, P01]");
    if (s.normalized) {
        if (std::abs(s.p10 + s.p01 - 1.0) > 1e-6 ||
            std::abs(s.p20 + s.p02 + s.p11 - 1.0) > 1e-6)
            throw ConfigError("normalized BSM input needs closed sectors");
    }
    const double pgd = s.p02_coherent_fraction;
    const double p02_deph = s.p02 * (1.0 - pgd);
    BsmOutcome out;
    // Averaged over the four Bell states: one photon per node for the
    // success/error channels, the dephased share of correctly sorted pairs
    // splits 1/4 : 1/4 : 1/2 like any distinguishable pair.
    out.success = 0.5 * (s.p10 * s.p10 + s.p02 * pgd + 0.25 * p02_deph);
    out.error = 0.5 * (0.5 * (s.p01 * s.p01 - pv * pv) + 0.25 * p02_deph);
    out.failure = 0.5 * (2.0 * s.p01 * s.p10 + pv * pv +
                         0.5 * (s.p01 * s.p01 - pv * pv) + 0.5 * p02_deph +
                         s.p20 + s.p11);
    out.loss = s.normalized ? 0.0 : 1.0 - out.success - out.error - out.failure;
    return out;
}

std::vector<BsmMapCell> bsm_map(const std::vector<double>& betas,
                                const std::vector<double>& dephasings,
                                double spectral_diffusion, bool normalized,
                                const Pulse& pulse_template,
                                const SorterConfig& cfg) {
    for (double b : betas)
        if (!(b > 0.0) || b > 1.0)
            throw ConfigError("bsm_map beta grid must lie in (0, 1]");
    for (double g : dephasings)
        if (g < 0.0 || g > 0.5)
            throw ConfigError("bsm_map dephasing grid must lie in [0, 0.5]");
    std::vector<BsmMapCell> cells(betas.size() * dephasings.size());
    parallel_for(cells.size(), [&](std::size_t i) {
        const double beta = betas[i / dephasings.size()];
        const double gd = dephasings[i % dephasings.size()];
        EmitterParams e;
        e.beta = beta;
        e.dephasing = gd;
        e.spectral_diffusion = spectral_diffusion;
        SorterStats stats = sort_pulse(pulse_template, e, cfg);
        if (!normalized) stats = to_raw(stats);
        cells[i] = {beta, gd, bsm_probabilities({stats, 0.0})};
    });
    return cells;
}

std::vector<TwoSidedBsmRow> two_sided_bsm(const std::vector<double>& widths,
                                          double beta,
                                          const SorterConfig& cfg) {
    for (double w : widths)
        if (!(w > 0.0)) throw ConfigError("pulse-width grid must be positive");
    EmitterParams e;
    e.beta = beta;
    std::vector<TwoSidedBsmRow> rows(widths.size());
    parallel_for(widths.size(), [&](std::size_t i) {
        TwoSidedBsmRow row;
        row.sigma = widths[i];
        row.fwhm = std::sqrt(2.0 * std::log(2.0)) / widths[i];
        // Widen the window for broadband pulses so the 6-sigma support fits.
        const double span = std::max(cfg.span, 8.0 * widths[i]);
        const Pulse p = gaussian_pulse(make_frequency_grid(cfg.n_points, span),
                                       0.0, row.fwhm, 0.1);
        const TwoSidedScatter sc = scatter_two_two_sided(p, e);
        row.p_t = sc.p_t;
        row.p_r = sc.p_r;
        row.p_tt = sc.p_tt;
        row.p_rr = sc.p_rr;
        row.p_tr = sc.p_tr;
        // Loss-inclusive statistics: reflection is the correct single-photon
        // port, double transmission the correct pair outcome.
        SorterStats raw;
        raw.p10 = sc.p_r;
        raw.p01 = sc.p_t;
        raw.p20 = sc.p_rr;
        raw.p02 = sc.p_tt;
        raw.p11 = sc.p_tr;
        raw.loss1 = 1.0 - (sc.p_t + sc.p_r);
        raw.loss2 = 1.0 - (sc.p_tt + sc.p_rr + sc.p_tr);
        raw.normalized = false;
        row.outcome = bsm_probabilities({raw, 0.0});
        rows[i] = row;
    });
    return rows;
}

} // namespace sorterlab
