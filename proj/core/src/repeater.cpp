#include "sorterlab/repeater.hpp"

#include "sorterlab/errors.hpp"
#include "sorterlab/parallel.hpp"

#include <cmath>

namespace sorterlab {

void RepeaterConfig::validate() const {
    if (!(total_distance_km > 0.0))
        throw ConfigError("total distance must be positive");
    if (nesting_level < 0)
        throw ConfigError("nesting level must be >= 0");
    if (multiplex < 1)
        throw ConfigError("multiplex N must be >= 1");
    if (!(emission_probability > 0.0) || emission_probability >= 1.0)
        throw ConfigError("emission probability must lie in (0, 1)");
    if (!(intrinsic_efficiency > 0.0) || intrinsic_efficiency > 1.0)
        throw ConfigError("intrinsic efficiency must lie in (0, 1]");
    if (!(attenuation_length_km > 0.0))
        throw ConfigError("attenuation length must be positive");
    if (!(signal_speed_km_s > 0.0))
        throw ConfigError("signal speed must be positive");
    if (!(swap_success > 0.0) || swap_success > 1.0)
        throw ConfigError("swap success must lie in (0, 1]");
    if (swap_error < 0.0)
        throw ConfigError("swap error must be >= 0");
}

double binary_entropy(double q) {
    if (q < 0.0 || q > 1.0)
        throw ConfigError("binary entropy argument must lie in [0, 1]");
    double h = 0.0;
    if (q > 0.0) h -= q * std::log2(q);
    if (q < 1.0) h -= (1.0 - q) * std::log2(1.0 - q);
    return h;
}

double secret_fraction(double q) {
    if (q < 0.0 || q >= 2.0 / 3.0)
        throw DomainError("secret fraction is defined on [0, 2/3)");
    const double inner = (1.0 - 1.5 * q) / (1.0 - q);
    return 1.0 - binary_entropy(q) - q - (1.0 - q) * binary_entropy(inner);
}

double swap_error_accumulation(int n, double eps0, double eps) {
    if (n < 0) throw ConfigError("nesting level must be >= 0");
    const double pow2 = std::ldexp(1.0, n);
    return pow2 * eps0 + (pow2 - 1.0) * eps;
}

RateResult entanglement_rate(const RepeaterConfig& cfg) {
    cfg.validate();
    const double pow2 = std::ldexp(1.0, cfg.nesting_level);
    const double eta = cfg.intrinsic_efficiency *
                       std::exp(-cfg.total_distance_km /
                                (2.0 * pow2 * cfg.attenuation_length_km));
    RateResult r;
    r.link_rate = cfg.base_rate() * (cfg.signal_speed_km_s * pow2 / cfg.total_distance_km) *
                  eta * (1.0 - cfg.base_fidelity());
    r.end_to_end_rate =
        r.link_rate * std::pow(2.0 / 3.0 * cfg.swap_success, cfg.nesting_level);
    return r;
}

QkdResult secret_key_rate(const RepeaterConfig& cfg) {
    const RateResult rates = entanglement_rate(cfg);
    QkdResult out;
    out.link_rate = rates.link_rate;
    out.end_to_end_rate = rates.end_to_end_rate;
    out.accumulated_error =
        swap_error_accumulation(cfg.nesting_level, cfg.base_error(), cfg.swap_error);
    out.fidelity = 1.0 - 0.75 * out.accumulated_error;
    out.qber = 0.5 * out.accumulated_error;
    out.secret_fraction = secret_fraction(out.qber); // throws for Q >= 2/3
    out.key_rate = std::max(0.0, out.end_to_end_rate * out.secret_fraction);
    return out;
}

std::vector<Scenario> default_scenarios() {
    return {{"linear", 0.5, 0.0},
            {"state-of-the-art", 0.645, 0.004},
            {"ideal", 0.86, 0.0}};
}

std::vector<SweepRow> distance_sweep(const RepeaterConfig& base,
                                     const std::vector<double>& distances_km,
                                     const std::vector<Scenario>& scenarios,
                                     int n_max) {
    if (n_max < 0) throw ConfigError("n_max must be >= 0");
    std::vector<SweepRow> rows(scenarios.size() * distances_km.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const Scenario& sc = scenarios[i / distances_km.size()];
        const double dist = distances_km[i % distances_km.size()];
        SweepRow best;
        best.scenario = sc.name;
        best.distance_km = dist;
        bool found = false;
        for (int n = 0; n <= n_max; ++n) {
            RepeaterConfig cfg = base;
            cfg.total_distance_km = dist;
            cfg.nesting_level = n;
            cfg.swap_success = sc.swap_success;
            cfg.swap_error = sc.swap_error;
            QkdResult r;
            try {
                r = secret_key_rate(cfg);
            } catch (const DomainError&) {
                continue; // QBER beyond the six-state threshold: no key
            }
            if (!found || r.key_rate > best.key_rate_per_s) {
                found = true;
                best.n_opt = n;
                best.rate_per_s = r.end_to_end_rate;
                best.qber = r.qber;
                best.secret_frac = r.secret_fraction;
                best.key_rate_per_s = r.key_rate;
            }
        }
        rows[i] = best;
    });
    return rows;
}

} // namespace sorterlab
