#include "run.hpp"

#include "svg.hpp"

#include "sorterlab/bsm.hpp"
#include "sorterlab/counts.hpp"
#include "sorterlab/csv.hpp"
#include "sorterlab/errors.hpp"
#include "sorterlab/fit.hpp"
#include "sorterlab/repeater.hpp"
#include "sorterlab/rng.hpp"
#include "sorterlab/sorter.hpp"
#include "sorterlab/units.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sorterlab::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string fmtg(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<double> linspace(double lo, double hi, int n, const char* what) {
    if (n < 1) throw ConfigError(std::string(what) + ": step count must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

// Registers each config key both as a CLI flag and as a JSON-assignable
// entry, so a config file and flat flag overrides share one schema. Flags
// win; unknown JSON keys are rejected before any computation.
class OptionSet {
public:
    explicit OptionSet(CLI::App* app) : app_(app) {}

    template <class T>
    void add(const std::string& key, T& var, const std::string& desc) {
        CLI::Option* opt = app_->add_option("--" + key, var, desc);
        entries_[key] = {opt, [&var](const json& j) { var = j.get<T>(); },
                         [&var] { return json(var); }};
    }

    void add_flag(const std::string& key, bool& var, const std::string& desc) {
        CLI::Option* opt = app_->add_flag("--" + key, var, desc);
        entries_[key] = {opt, [&var](const json& j) { var = j.get<bool>(); },
                         [&var] { return json(var); }};
    }

    void overlay(const json& cfg) {
        if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
        for (auto it = cfg.begin(); it != cfg.end(); ++it) {
            auto e = entries_.find(it.key());
            if (e == entries_.end())
                throw ConfigError("unknown config key: " + it.key());
            if (e->second.opt->count() > 0) continue; // explicit flag wins
            try {
                e->second.set(it.value());
            } catch (const json::exception& ex) {
                throw ConfigError("config key '" + it.key() + "': " + ex.what());
            }
        }
    }

    json resolved() const {
        json out = json::object();
        for (const auto& [key, entry] : entries_) out[key] = entry.get();
        return out; // std::map keeps keys sorted, so the dump is deterministic
    }

private:
    struct Entry {
        CLI::Option* opt = nullptr;
        std::function<void(const json&)> set;
        std::function<json()> get;
    };
    CLI::App* app_;
    std::map<std::string, Entry> entries_;
};

struct Common {
    std::string out = "out";
    std::uint64_t seed = 1234;
    bool svg = false;
    double lifetime_ps = 324.0;
    double linewidth_mhz = 491.0;
    std::string config_path;

    NormalizedUnits units() const { return NormalizedUnits::from_lifetime_ps(lifetime_ps); }
    // Detuning in Gamma/2 units to an ordinary frequency in MHz:
    // delta~ = 2 * delta_MHz / (gamma / 2pi in MHz).
    double to_mhz(double internal) const { return internal * linewidth_mhz / 2.0; }
};

void register_common(OptionSet& os, CLI::App* app, Common& c) {
    os.add("out", c.out, "output directory");
    os.add("seed", c.seed, "deterministic run seed");
    os.add_flag("svg", c.svg, "also write a self-contained SVG plot");
    os.add("lifetime_ps", c.lifetime_ps, "emitter lifetime 1/gamma in ps");
    os.add("linewidth_MHz", c.linewidth_mhz, "natural linewidth gamma/2pi in MHz");
    app->add_option("--config", c.config_path, "JSON config file (flags win over file values)");
}

struct EmitterOpts {
    double beta = 0.75;
    double dephasing = 0.035;
    double diffusion = 0.67;
    double fwhm_ps = 700.0;
    double detuning = 0.0;
    int n_points = 256;
    double span = 20.0;
    int diffusion_nodes = 21;

    SorterConfig cfg() const { return {n_points, span, diffusion_nodes}; }
    EmitterParams emitter() const { return {beta, 2.0, dephasing, diffusion, 0.0}; }
};

void register_emitter(OptionSet& os, EmitterOpts& e, bool with_center) {
    os.add("beta", e.beta, "waveguide coupling efficiency beta");
    os.add("dephasing", e.dephasing, "pure dephasing rate, Gamma/2 units");
    os.add("diffusion", e.diffusion, "spectral diffusion sigma, Gamma/2 units");
    os.add("fwhm_ps", e.fwhm_ps, "pulse intensity FWHM in ps");
    if (with_center)
        os.add("detuning", e.detuning, "pulse center detuning, Gamma/2 units");
    os.add("n_points", e.n_points, "frequency grid points");
    os.add("span", e.span, "frequency grid half width, Gamma/2 units");
    os.add("diffusion_nodes", e.diffusion_nodes, "Gauss-Hermite quadrature nodes");
}

std::ofstream open_output(const Common& c, const std::string& name, fs::path& full) {
    fs::create_directories(c.out);
    full = fs::path(c.out) / name;
    std::ofstream out(full);
    if (!out) throw std::runtime_error("cannot open output file " + full.string());
    return out;
}

void write_header(csv::Writer& w, const std::string& sub, const OptionSet& os,
                  const Common& c) {
    w.comment("sorterlab " + sub);
    w.comment("config: " + os.resolved().dump());
    w.comment("seed: " + std::to_string(c.seed));
}

std::string d(double v) { return csv::format_double(v); }

// ---------------------------------------------------------------- sorter-sweep

struct SweepOpts {
    Common common;
    EmitterOpts emitter;
    double detuning_min = -6.0;
    double detuning_max = 6.0;
    int detuning_steps = 121;
    bool normalized = true;
};

int run_sorter_sweep(const SweepOpts& o, const OptionSet& os) {
    const Common& c = o.common;
    const auto units = c.units();
    const auto grid = make_frequency_grid(o.emitter.n_points, o.emitter.span);
    const Pulse tpl =
        gaussian_pulse(grid, 0.0, units.time_to_internal(o.emitter.fwhm_ps), 0.0);
    const auto detunings =
        linspace(o.detuning_min, o.detuning_max, o.detuning_steps, "detuning_steps");
    const auto rows = forward_model(
        {o.emitter.beta, o.emitter.dephasing, o.emitter.diffusion}, detunings, tpl,
        o.emitter.cfg());

    fs::path path;
    auto out = open_output(c, "sorter_sweep.csv", path);
    csv::Writer w(out);
    write_header(w, "sorter-sweep", os, c);
    w.row({"detuning", "detuning_MHz", "p10", "p01", "p20", "p02", "p11",
           "p02_coherent_fraction", "loss1", "loss2", "success"});

    std::size_t at_res = 0;
    Series s10{"P10", {}, {}}, s02{"P02", {}, {}}, s11{"P11", {}, {}},
        ssucc{"success", {}, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const double succ = sorter_success(row.stats);
        const SorterStats s = o.normalized ? row.stats : to_raw(row.stats);
        w.row({d(row.detuning), d(c.to_mhz(row.detuning)), d(s.p10), d(s.p01),
               d(s.p20), d(s.p02), d(s.p11), d(s.p02_coherent_fraction), d(s.loss1),
               d(s.loss2), d(succ)});
        if (std::abs(row.detuning) < std::abs(rows[at_res].detuning)) at_res = i;
        s10.x.push_back(row.detuning);
        s10.y.push_back(s.p10);
        s02.x.push_back(row.detuning);
        s02.y.push_back(s.p02);
        s11.x.push_back(row.detuning);
        s11.y.push_back(s.p11);
        ssucc.x.push_back(row.detuning);
        ssucc.y.push_back(succ);
    }
    if (c.svg)
        write_line_chart((fs::path(c.out) / "sorter_sweep.svg").string(),
                         "Sorter port statistics vs detuning", "detuning (Gamma/2)",
                         "probability", {s10, s02, s11, ssucc});

    const auto& r0 = rows[at_res];
    std::cout << "sorter-sweep: " << rows.size() << " detunings, at detuning "
              << fmtg(r0.detuning) << ": P10=" << fmt4(r0.stats.p10)
              << " P02=" << fmt4(r0.stats.p02)
              << " success=" << fmt4(sorter_success(r0.stats)) << " -> "
              << path.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------- filter

struct FilterOpts {
    Common common;
    EmitterOpts emitter;
    double window_min_ns = 0.5;
    double window_max_ns = 5.0;
    int window_steps = 10;
    double center_ns = std::numeric_limits<double>::quiet_NaN();
};

int run_filter(const FilterOpts& o, const OptionSet& os) {
    const Common& c = o.common;
    const auto units = c.units();
    const auto grid = make_frequency_grid(o.emitter.n_points, o.emitter.span);
    const Pulse pulse = gaussian_pulse(grid, o.emitter.detuning,
                                       units.time_to_internal(o.emitter.fwhm_ps), 0.0);
    const TwoPhotonState state = sorter_output_state(pulse, o.emitter.emitter(), o.emitter.cfg());
    const auto windows =
        linspace(o.window_min_ns, o.window_max_ns, o.window_steps, "window_steps");
    const std::optional<double> center =
        std::isnan(o.center_ns) ? std::nullopt : std::optional<double>(o.center_ns);

    fs::path path;
    auto out = open_output(c, "filter.csv", path);
    csv::Writer w(out);
    write_header(w, "filter", os, c);
    w.row({"window_ns", "acceptance", "p20", "p02", "p11", "p02_coherent_fraction"});

    std::size_t best = 0;
    std::vector<FilterResult> results;
    results.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const FilterResult fr = temporal_filter(state, windows[i], units, center);
        results.push_back(fr);
        w.row({d(windows[i]), d(fr.acceptance), d(fr.stats.p20), d(fr.stats.p02),
               d(fr.stats.p11), d(fr.stats.p02_coherent_fraction)});
        if (fr.stats.p02 > results[best].stats.p02) best = i;
    }
    if (c.svg) {
        Series sp{"P02", windows, {}}, sa{"acceptance", windows, {}};
        for (const auto& fr : results) {
            sp.y.push_back(fr.stats.p02);
            sa.y.push_back(fr.acceptance);
        }
        write_line_chart((fs::path(c.out) / "filter.svg").string(),
                         "Temporal filtering", "window (ns)", "probability",
                         {sp, sa});
    }
    std::cout << "filter: best P02=" << fmt4(results[best].stats.p02) << " at "
              << fmtg(windows[best]) << " ns window (acceptance "
              << fmt4(results[best].acceptance) << ") -> " << path.string() << '\n';
    return 0;
}

// --------------------------------------------------------------------- bsm-map

struct BsmMapOpts {
    Common common;
    double beta_min = 0.5;
    double beta_max = 1.0;
    int beta_steps = 26;
    double dephasing_min = 0.0;
    double dephasing_max = 0.1;
    int dephasing_steps = 11;
    double diffusion = 0.0;
    double fwhm_ps = 700.0;
    bool normalized = true;
    int n_points = 256;
    double span = 20.0;
    int diffusion_nodes = 21;
};

int run_bsm_map(const BsmMapOpts& o, const OptionSet& os) {
    const Common& c = o.common;
    const auto units = c.units();
    const auto grid = make_frequency_grid(o.n_points, o.span);
    const Pulse tpl = gaussian_pulse(grid, 0.0, units.time_to_internal(o.fwhm_ps), 0.0);
    const auto betas = linspace(o.beta_min, o.beta_max, o.beta_steps, "beta_steps");
    const auto dephasings =
        linspace(o.dephasing_min, o.dephasing_max, o.dephasing_steps, "dephasing_steps");
    const auto cells =
        bsm_map(betas, dephasings, o.diffusion, o.normalized, tpl,
                {o.n_points, o.span, o.diffusion_nodes});

    fs::path path;
    auto out = open_output(c, "bsm_map.csv", path);
    csv::Writer w(out);
    write_header(w, "bsm-map", os, c);
    w.row({"beta", "gamma_d", "quantity", "value"});
    std::size_t best = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& cell = cells[i];
        w.row({d(cell.beta), d(cell.dephasing), "success", d(cell.outcome.success)});
        w.row({d(cell.beta), d(cell.dephasing), "error", d(cell.outcome.error)});
        w.row({d(cell.beta), d(cell.dephasing), "failure", d(cell.outcome.failure)});
        w.row({d(cell.beta), d(cell.dephasing), "loss", d(cell.outcome.loss)});
        if (cell.outcome.success > cells[best].outcome.success) best = i;
    }
    if (c.svg) {
        std::vector<Series> series;
        for (std::size_t j = 0; j < dephasings.size(); ++j) {
            Series s{"gd=" + fmtg(dephasings[j]), {}, {}};
            for (std::size_t i = 0; i < betas.size(); ++i) {
                const auto& cell = cells[i * dephasings.size() + j];
                s.x.push_back(cell.beta);
                s.y.push_back(cell.outcome.success);
            }
            series.push_back(std::move(s));
        }
        write_line_chart((fs::path(c.out) / "bsm_map.svg").string(),
                         "BSM success probability", "beta", "success", series);
    }
    std::cout << "bsm-map: " << betas.size() << "x" << dephasings.size()
              << " cells, max success=" << fmt4(cells[best].outcome.success)
              << " at beta=" << fmtg(cells[best].beta)
              << " dephasing=" << fmtg(cells[best].dephasing) << " -> "
              << path.string() << '\n';
    return 0;
}

// ------------------------------------------------------------------- two-sided

struct TwoSidedOpts {
    Common common;
    double beta = 1.0;
    double sigma_min = 0.02;
    double sigma_max = 0.4;
    int sigma_steps = 77;
    int n_points = 256;
    double span = 20.0;
};

int run_two_sided(const TwoSidedOpts& o, const OptionSet& os) {
    const Common& c = o.common;
    const auto widths = linspace(o.sigma_min, o.sigma_max, o.sigma_steps, "sigma_steps");
    const auto rows = two_sided_bsm(widths, o.beta, {o.n_points, o.span, 1});

    fs::path path;
    auto out = open_output(c, "two_sided.csv", path);
    csv::Writer w(out);
    write_header(w, "two-sided", os, c);
    w.row({"sigma", "fwhm", "p_t", "p_r", "p_tt", "p_rr", "p_tr", "success",
           "error", "failure", "loss"});
    std::size_t best = 0;
    Series ssucc{"success", {}, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        w.row({d(r.sigma), d(r.fwhm), d(r.p_t), d(r.p_r), d(r.p_tt), d(r.p_rr),
               d(r.p_tr), d(r.outcome.success), d(r.outcome.error),
               d(r.outcome.failure), d(r.outcome.loss)});
        if (r.outcome.success > rows[best].outcome.success) best = i;
        ssucc.x.push_back(r.sigma);
        ssucc.y.push_back(r.outcome.success);
    }
    if (c.svg)
        write_line_chart((fs::path(c.out) / "two_sided.svg").string(),
                         "Two-sided waveguide BSM", "pulse width sigma (Gamma/2)",
                         "success", {ssucc});
    std::cout << "two-sided: beta=" << fmtg(o.beta)
              << " max success=" << fmt4(rows[best].outcome.success)
              << " at sigma=" << fmtg(rows[best].sigma) << " -> " << path.string()
              << '\n';
    return 0;
}

// ------------------------------------------------------------------------- qkd

struct QkdOpts {
    Common common;
    double distance_min_km = 50.0;
    double distance_max_km = 600.0;
    int distance_steps = 56;
    int multiplex = 100;
    double emission_probability = 0.01;
    double intrinsic_efficiency = 1.0;
    double attenuation_length_km = 22.0;
    double signal_speed_km_s = 2.0e5;
    int n_max = 8;
    std::string scenario = "all";
    double swap_success = 0.5;
    double swap_error = 0.0;
};

int run_qkd(const QkdOpts& o, const OptionSet& os) {
    const Common& c = o.common;
    RepeaterConfig base;
    base.multiplex = o.multiplex;
    base.emission_probability = o.emission_probability;
    base.intrinsic_efficiency = o.intrinsic_efficiency;
    base.attenuation_length_km = o.attenuation_length_km;
    base.signal_speed_km_s = o.signal_speed_km_s;

    std::vector<Scenario> scenarios;
    if (o.scenario == "all") {
        scenarios = default_scenarios();
    } else if (o.scenario == "custom") {
        scenarios = {{"custom", o.swap_success, o.swap_error}};
    } else {
        for (const auto& s : default_scenarios())
            if (s.name == o.scenario) scenarios.push_back(s);
        if (scenarios.empty())
            throw ConfigError("unknown scenario '" + o.scenario +
                              "' (use all, linear, state-of-the-art, ideal, custom)");
    }
    const auto distances =
        linspace(o.distance_min_km, o.distance_max_km, o.distance_steps, "distance_steps");
    const auto rows = distance_sweep(base, distances, scenarios, o.n_max);

    fs::path path;
    auto out = open_output(c, "qkd.csv", path);
    csv::Writer w(out);
    write_header(w, "qkd", os, c);
    w.row({"scenario", "L_km", "n_opt", "R_per_s", "Q", "f", "K_per_s"});
    for (const auto& r : rows)
        w.row({r.scenario, d(r.distance_km), std::to_string(r.n_opt), d(r.rate_per_s),
               d(r.qber), d(r.secret_frac), d(r.key_rate_per_s)});

    if (c.svg) {
        std::vector<Series> series;
        for (const auto& sc : scenarios) {
            Series s{sc.name, {}, {}};
            for (const auto& r : rows)
                if (r.scenario == sc.name) {
                    s.x.push_back(r.distance_km);
                    s.y.push_back(std::log10(std::max(r.key_rate_per_s, 1e-6)));
                }
            series.push_back(std::move(s));
        }
        write_line_chart((fs::path(c.out) / "qkd.svg").string(),
                         "Secret key rate vs distance", "L (km)", "log10 K (1/s)",
                         series);
    }

    std::string summary = "qkd:";
    for (const auto& sc : scenarios) {
        double best_k = 0.0;
        double best_l = distances.front();
        for (const auto& r : rows)
            if (r.scenario == sc.name &&
                std::abs(r.distance_km - 100.0) < std::abs(best_l - 100.0)) {
                best_l = r.distance_km;
                best_k = r.key_rate_per_s;
            }
        summary += " " + sc.name + " K(" + fmtg(best_l) + " km)=" + fmtg(best_k);
    }
    std::cout << summary << " -> " << path.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------- counts

struct CountsOpts {
    Common common;
    EmitterOpts emitter;
    std::int64_t shots = 10000000;
    EfficiencySet eff;
};

int run_counts(const CountsOpts& o, const OptionSet& os) {
    const Common& c = o.common;
    const auto units = c.units();
    const auto grid = make_frequency_grid(o.emitter.n_points, o.emitter.span);
    const Pulse pulse = gaussian_pulse(grid, o.emitter.detuning,
                                       units.time_to_internal(o.emitter.fwhm_ps), 0.0);
    const SorterStats normalized = sort_pulse(pulse, o.emitter.emitter(), o.emitter.cfg());
    const SorterStats raw = to_raw(normalized);
    o.eff.validate();
    const auto expected = expected_counts(raw, o.eff, o.shots);
    const CountRecord rec = simulate_counts(raw, o.eff, o.shots, c.seed);
    const auto one = extract_one_photon(rec);
    const auto two = extract_two_photon(rec);

    const auto& names = CountRecord::counter_names();
    const auto counters = rec.counters();
    std::vector<std::string> header(names.begin(), names.end());
    header.push_back("shots");
    header.push_back("seed");

    // CountRecord serialization: one header row naming each counter, one row
    // of simulated counts.
    fs::path path;
    auto out = open_output(c, "counts.csv", path);
    csv::Writer w(out);
    write_header(w, "counts", os, c);
    w.row(header);
    std::vector<std::string> sim_row;
    for (int i = 0; i < CountRecord::n_counters; ++i)
        sim_row.push_back(std::to_string(counters[static_cast<std::size_t>(i)]));
    sim_row.push_back(std::to_string(rec.shots));
    sim_row.push_back(std::to_string(rec.seed));
    w.row(sim_row);

    fs::path xpath;
    auto xout = open_output(c, "counts_expected.csv", xpath);
    csv::Writer xw(xout);
    write_header(xw, "counts", os, c);
    xw.row(std::vector<std::string>(names.begin(), names.end()));
    std::vector<std::string> exp_row;
    for (int i = 0; i < CountRecord::n_counters; ++i)
        exp_row.push_back(d(expected[static_cast<std::size_t>(i)]));
    xw.row(exp_row);

    fs::path epath;
    auto eout = open_output(c, "counts_extracted.csv", epath);
    csv::Writer ew(eout);
    write_header(ew, "counts", os, c);
    ew.row({"quantity", "true_value", "extracted"});
    ew.row({"P1_mode1", d(normalized.p10), d(one.p1_mode1)});
    ew.row({"P1_mode2", d(normalized.p01), d(one.p1_mode2)});
    ew.row({"P20", d(normalized.p20), d(two.p20)});
    ew.row({"P02", d(normalized.p02), d(two.p02)});
    ew.row({"P11", d(normalized.p11), d(two.p11)});

    if (c.svg) {
        Series se{"expected", {}, {}}, ss{"simulated", {}, {}};
        for (int i = 0; i < CountRecord::n_counters; ++i) {
            se.x.push_back(i);
            se.y.push_back(expected[static_cast<std::size_t>(i)]);
            ss.x.push_back(i);
            ss.y.push_back(static_cast<double>(counters[static_cast<std::size_t>(i)]));
        }
        write_line_chart((fs::path(c.out) / "counts.svg").string(),
                         "Expected vs simulated counts", "counter index", "counts",
                         {se, ss});
    }
    std::cout << "counts: shots=" << o.shots << " extracted P1=" << fmt4(one.p1_mode1)
              << " P20=" << fmt4(two.p20) << " P02=" << fmt4(two.p02)
              << " P11=" << fmt4(two.p11) << " -> " << path.string() << '\n';
    return 0;
}

// ------------------------------------------------------------------------- fit

struct FitOpts {
    Common common;
    std::string data;
    int points = 13;
    double detuning_min = -6.0;
    double detuning_max = 6.0;
    double true_beta = 0.75;
    double true_dephasing = 0.035;
    double true_diffusion = 0.67;
    double noise_p1 = 0.01;
    double noise_p2 = 0.01;
    double guess_beta = 0.8;
    double guess_dephasing = 0.02;
    double guess_diffusion = 0.5;
    double fwhm_ps = 700.0;
    int n_points = 128;
    double span = 20.0;
    int diffusion_nodes = 13;
};

std::vector<FitObservation> load_observations(const std::string& file, double err1,
                                              double err2) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read data file " + file);
    const auto rows = csv::read(in);
    std::vector<FitObservation> obs;
    for (const auto& cells : rows) {
        if (cells.size() < 5)
            throw ConfigError("data rows need >= 5 columns: detuning,p10,p20,p02,p11");
        FitObservation ob;
        try {
            ob.detuning = std::stod(cells[0]);
        } catch (const std::exception&) {
            continue; // header row
        }
        try {
            ob.p10 = std::stod(cells[1]);
            ob.p20 = std::stod(cells[2]);
            ob.p02 = std::stod(cells[3]);
            ob.p11 = std::stod(cells[4]);
            ob.p10_err = cells.size() > 5 ? std::stod(cells[5]) : err1;
            ob.p20_err = cells.size() > 6 ? std::stod(cells[6]) : err2;
            ob.p02_err = cells.size() > 7 ? std::stod(cells[7]) : err2;
            ob.p11_err = cells.size() > 8 ? std::stod(cells[8]) : err2;
        } catch (const std::exception&) {
            throw ConfigError("malformed numeric cell in data file " + file);
        }
        obs.push_back(ob);
    }
    return obs;
}

int run_fit(const FitOpts& o, const OptionSet& os) {
    const Common& c = o.common;
    const auto units = c.units();
    const SorterConfig cfg{o.n_points, o.span, o.diffusion_nodes};
    const auto grid = make_frequency_grid(o.n_points, o.span);
    const Pulse tpl = gaussian_pulse(grid, 0.0, units.time_to_internal(o.fwhm_ps), 0.0);
    const double err1 = std::max(o.noise_p1, 1e-4);
    const double err2 = std::max(o.noise_p2, 1e-4);

    std::vector<FitObservation> obs;
    if (!o.data.empty()) {
        obs = load_observations(o.data, err1, err2);
    } else {
        const auto detunings =
            linspace(o.detuning_min, o.detuning_max, o.points, "points");
        const auto truth = forward_model(
            {o.true_beta, o.true_dephasing, o.true_diffusion}, detunings, tpl, cfg);
        const CounterRng rng(c.seed, 0);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const auto& s = truth[i].stats;
            FitObservation ob;
            ob.detuning = truth[i].detuning;
            const std::uint64_t base = 8 * (4 * static_cast<std::uint64_t>(i));
            ob.p10 = s.p10 + o.noise_p1 * rng.normal(base);
            ob.p20 = s.p20 + o.noise_p2 * rng.normal(base + 8);
            ob.p02 = s.p02 + o.noise_p2 * rng.normal(base + 16);
            ob.p11 = s.p11 + o.noise_p2 * rng.normal(base + 24);
            ob.p10_err = err1;
            ob.p20_err = err2;
            ob.p02_err = err2;
            ob.p11_err = err2;
            obs.push_back(ob);
        }
    }

    FitProblem prob;
    prob.observed = obs;
    prob.pulse_template = tpl;
    prob.initial_guess = {o.guess_beta, o.guess_dephasing, o.guess_diffusion};
    prob.resolution = cfg;
    const FitResult r = fit(prob);

    fs::path dpath;
    auto dout = open_output(c, "fit_data.csv", dpath);
    csv::Writer dw(dout);
    write_header(dw, "fit", os, c);
    dw.row({"detuning", "p10", "p20", "p02", "p11", "p10_err", "p20_err", "p02_err",
            "p11_err"});
    for (const auto& ob : obs)
        dw.row({d(ob.detuning), d(ob.p10), d(ob.p20), d(ob.p02), d(ob.p11),
                d(ob.p10_err), d(ob.p20_err), d(ob.p02_err), d(ob.p11_err)});

    fs::path path;
    auto out = open_output(c, "fit_result.csv", path);
    csv::Writer w(out);
    write_header(w, "fit", os, c);
    w.row({"quantity", "value", "error"});
    w.row({"beta", d(r.beta), d(r.beta_err)});
    w.row({"dephasing", d(r.dephasing), d(r.dephasing_err)});
    w.row({"diffusion", d(r.diffusion), d(r.diffusion_err)});
    w.row({"residual", d(r.residual), ""});
    w.row({"converged", r.converged ? "1" : "0", ""});
    w.row({"at_bound", r.at_bound ? "1" : "0", ""});
    w.row({"evaluations", std::to_string(r.evaluations), ""});

    // JSON summary twin of the CSV; config and seed ride along as fields
    // since JSON carries no comments.
    json summary;
    summary["config"] = os.resolved();
    summary["seed"] = c.seed;
    summary["estimates"] = {{"beta", r.beta},
                            {"dephasing", r.dephasing},
                            {"diffusion", r.diffusion}};
    summary["uncertainties"] = {{"beta", r.beta_err},
                                {"dephasing", r.dephasing_err},
                                {"diffusion", r.diffusion_err}};
    summary["residual"] = r.residual;
    summary["converged"] = r.converged;
    summary["at_bound"] = r.at_bound;
    summary["evaluations"] = r.evaluations;
    fs::path jpath;
    auto jout = open_output(c, "fit_result.json", jpath);
    jout << summary.dump(2) << '\n';

    if (c.svg) {
        const auto dets = [&] {
            std::vector<double> v;
            for (const auto& ob : obs) v.push_back(ob.detuning);
            return v;
        }();
        const auto model = forward_model({r.beta, r.dephasing, r.diffusion}, dets, tpl, cfg);
        Series data10{"P10 data", dets, {}}, model10{"P10 fit", dets, {}};
        Series data02{"P02 data", dets, {}}, model02{"P02 fit", dets, {}};
        for (std::size_t i = 0; i < obs.size(); ++i) {
            data10.y.push_back(obs[i].p10);
            data02.y.push_back(obs[i].p02);
            model10.y.push_back(model[i].stats.p10);
            model02.y.push_back(model[i].stats.p02);
        }
        write_line_chart((fs::path(c.out) / "fit.svg").string(),
                         "Joint fit: data vs model", "detuning (Gamma/2)",
                         "probability", {data10, model10, data02, model02});
    }
    std::cout << "fit: beta=" << fmt4(r.beta) << "+-" << fmt4(r.beta_err)
              << " dephasing=" << fmt4(r.dephasing) << "+-" << fmt4(r.dephasing_err)
              << " diffusion=" << fmt4(r.diffusion) << "+-" << fmt4(r.diffusion_err)
              << " residual=" << fmtg(r.residual)
              << (r.converged ? "" : " (not converged)") << " -> " << path.string()
              << '\n';
    return 0;
}

// ------------------------------------------------------------------------- jti

struct JtiOpts {
    Common common;
    EmitterOpts emitter;
    std::string port = "ll";
};

int run_jti(const JtiOpts& o, const OptionSet& os) {
    const Common& c = o.common;
    const auto units = c.units();
    const auto grid = make_frequency_grid(o.emitter.n_points, o.emitter.span);
    const Pulse pulse = gaussian_pulse(grid, o.emitter.detuning,
                                       units.time_to_internal(o.emitter.fwhm_ps), 0.0);
    PortPair pair;
    if (o.port == "uu")
        pair = PortPair::upper_upper;
    else if (o.port == "ll")
        pair = PortPair::lower_lower;
    else if (o.port == "ul")
        pair = PortPair::upper_lower;
    else
        throw ConfigError("unknown port '" + o.port + "' (use uu, ll, ul)");

    const TwoPhotonState state = sorter_output_state(pulse, o.emitter.emitter(), o.emitter.cfg());
    const JtiGrid g = jti(state, pair, units);

    fs::path path;
    auto out = open_output(c, "jti_" + o.port + ".csv", path);
    csv::Writer w(out);
    write_header(w, "jti", os, c);
    w.row({"t1_ns", "t2_ns", "intensity"});
    const int n = static_cast<int>(g.times.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            w.row({d(g.times_ns[i]), d(g.times_ns[j]), d(g.intensity(i, j))});

    if (c.svg)
        write_heatmap((fs::path(c.out) / ("jti_" + o.port + ".svg")).string(),
                      "Joint temporal intensity (" + o.port + ")", "t2 (ns)",
                      "t1 (ns)", g.intensity, g.times_ns[0], g.times_ns[n - 1],
                      g.times_ns[0], g.times_ns[n - 1]);
    std::cout << "jti: port " << o.port << " integral=" << fmt4(g.integral())
              << " -> " << path.string() << '\n';
    return 0;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config file parse failure: ") + e.what());
    }
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"sorterlab: emitter-mediated photon sorting toolkit"};
    app.require_subcommand(1);

    SweepOpts sweep;
    CLI::App* sweep_app = app.add_subcommand(
        "sorter-sweep", "port statistics of the nonlinear sorter vs detuning");
    OptionSet sweep_os(sweep_app);
    register_common(sweep_os, sweep_app, sweep.common);
    register_emitter(sweep_os, sweep.emitter, false);
    sweep_os.add("detuning_min", sweep.detuning_min, "sweep start, Gamma/2 units");
    sweep_os.add("detuning_max", sweep.detuning_max, "sweep end, Gamma/2 units");
    sweep_os.add("detuning_steps", sweep.detuning_steps, "sweep point count");
    sweep_os.add("normalized", sweep.normalized, "post-selected (true) or loss-inclusive rows");

    FilterOpts filter;
    CLI::App* filter_app =
        app.add_subcommand("filter", "temporal filtering of the sorter output");
    OptionSet filter_os(filter_app);
    register_common(filter_os, filter_app, filter.common);
    register_emitter(filter_os, filter.emitter, true);
    filter_os.add("window_min_ns", filter.window_min_ns, "smallest window, ns");
    filter_os.add("window_max_ns", filter.window_max_ns, "largest window, ns");
    filter_os.add("window_steps", filter.window_steps, "window count");
    filter_os.add("center_ns", filter.center_ns,
                  "window center override, ns (default: window opens at arrival)");

    BsmMapOpts bsm;
    CLI::App* bsm_app =
        app.add_subcommand("bsm-map", "BSM outcome probabilities over (beta, dephasing)");
    OptionSet bsm_os(bsm_app);
    register_common(bsm_os, bsm_app, bsm.common);
    bsm_os.add("beta_min", bsm.beta_min, "smallest beta");
    bsm_os.add("beta_max", bsm.beta_max, "largest beta");
    bsm_os.add("beta_steps", bsm.beta_steps, "beta count");
    bsm_os.add("dephasing_min", bsm.dephasing_min, "smallest dephasing rate");
    bsm_os.add("dephasing_max", bsm.dephasing_max, "largest dephasing rate");
    bsm_os.add("dephasing_steps", bsm.dephasing_steps, "dephasing count");
    bsm_os.add("diffusion", bsm.diffusion, "spectral diffusion sigma, Gamma/2 units");
    bsm_os.add("fwhm_ps", bsm.fwhm_ps, "pulse intensity FWHM in ps");
    bsm_os.add("normalized", bsm.normalized, "post-selected (true) or loss-inclusive");
    bsm_os.add("n_points", bsm.n_points, "frequency grid points");
    bsm_os.add("span", bsm.span, "frequency grid half width");
    bsm_os.add("diffusion_nodes", bsm.diffusion_nodes, "Gauss-Hermite nodes");

    TwoSidedOpts two;
    CLI::App* two_app = app.add_subcommand(
        "two-sided", "two-sided waveguide sorter BSM over pulse widths");
    OptionSet two_os(two_app);
    register_common(two_os, two_app, two.common);
    two_os.add("beta", two.beta, "waveguide coupling efficiency beta");
    two_os.add("sigma_min", two.sigma_min, "smallest pulse width sigma, Gamma/2 units");
    two_os.add("sigma_max", two.sigma_max, "largest pulse width sigma");
    two_os.add("sigma_steps", two.sigma_steps, "width count");
    two_os.add("n_points", two.n_points, "frequency grid points");
    two_os.add("span", two.span, "frequency grid half width");

    QkdOpts qkd;
    CLI::App* qkd_app =
        app.add_subcommand("qkd", "repeater secret key rate vs distance");
    OptionSet qkd_os(qkd_app);
    register_common(qkd_os, qkd_app, qkd.common);
    qkd_os.add("distance_min_km", qkd.distance_min_km, "smallest distance, km");
    qkd_os.add("distance_max_km", qkd.distance_max_km, "largest distance, km");
    qkd_os.add("distance_steps", qkd.distance_steps, "distance count");
    qkd_os.add("multiplex", qkd.multiplex, "multiplexed qubits per node");
    qkd_os.add("emission_probability", qkd.emission_probability,
               "photon-pair emission probability p");
    qkd_os.add("intrinsic_efficiency", qkd.intrinsic_efficiency,
               "distance-independent efficiency");
    qkd_os.add("attenuation_length_km", qkd.attenuation_length_km,
               "fiber attenuation length, km");
    qkd_os.add("signal_speed_km_s", qkd.signal_speed_km_s, "signal speed, km/s");
    qkd_os.add("n_max", qkd.n_max, "largest nesting level");
    qkd_os.add("scenario", qkd.scenario,
               "all, linear, state-of-the-art, ideal, or custom");
    qkd_os.add("swap_success", qkd.swap_success, "custom scenario swap success P_S");
    qkd_os.add("swap_error", qkd.swap_error, "custom scenario swap error eps");

    CountsOpts counts;
    CLI::App* counts_app =
        app.add_subcommand("counts", "Poisson count simulation and extraction");
    OptionSet counts_os(counts_app);
    register_common(counts_os, counts_app, counts.common);
    register_emitter(counts_os, counts.emitter, true);
    counts_os.add("shots", counts.shots, "number of experiment shots");
    counts_os.add("eta_E1", counts.eff.eta_E1, "early arm efficiency, pass 1");
    counts_os.add("eta_L1", counts.eff.eta_L1, "late arm efficiency, pass 1");
    counts_os.add("eta_E2", counts.eff.eta_E2, "early arm efficiency, pass 2");
    counts_os.add("eta_L2", counts.eff.eta_L2, "late arm efficiency, pass 2");
    counts_os.add("eta_D1a", counts.eff.eta_D1a, "mode-1 detector a efficiency");
    counts_os.add("eta_D1b", counts.eff.eta_D1b, "mode-1 detector b efficiency");
    counts_os.add("eta_D2a", counts.eff.eta_D2a, "mode-2 detector a efficiency");
    counts_os.add("eta_D2b", counts.eff.eta_D2b, "mode-2 detector b efficiency");

    FitOpts fitopts;
    CLI::App* fit_app =
        app.add_subcommand("fit", "joint (beta, dephasing, diffusion) parameter fit");
    OptionSet fit_os(fit_app);
    register_common(fit_os, fit_app, fitopts.common);
    fit_os.add("data", fitopts.data,
               "observation CSV (detuning,p10,p20,p02,p11[,errs]); empty = synthesize");
    fit_os.add("points", fitopts.points, "synthetic detuning count");
    fit_os.add("detuning_min", fitopts.detuning_min, "synthetic sweep start");
    fit_os.add("detuning_max", fitopts.detuning_max, "synthetic sweep end");
    fit_os.add("true_beta", fitopts.true_beta, "synthetic truth beta");
    fit_os.add("true_dephasing", fitopts.true_dephasing, "synthetic truth dephasing");
    fit_os.add("true_diffusion", fitopts.true_diffusion, "synthetic truth diffusion");
    fit_os.add("noise_p1", fitopts.noise_p1, "one-photon observation noise sigma");
    fit_os.add("noise_p2", fitopts.noise_p2, "two-photon observation noise sigma");
    fit_os.add("guess_beta", fitopts.guess_beta, "starting guess beta");
    fit_os.add("guess_dephasing", fitopts.guess_dephasing, "starting guess dephasing");
    fit_os.add("guess_diffusion", fitopts.guess_diffusion, "starting guess diffusion");
    fit_os.add("fwhm_ps", fitopts.fwhm_ps, "pulse intensity FWHM in ps");
    fit_os.add("n_points", fitopts.n_points, "frequency grid points");
    fit_os.add("span", fitopts.span, "frequency grid half width");
    fit_os.add("diffusion_nodes", fitopts.diffusion_nodes, "Gauss-Hermite nodes");

    JtiOpts jtio;
    CLI::App* jti_app =
        app.add_subcommand("jti", "joint temporal intensity of a port pair");
    OptionSet jti_os(jti_app);
    register_common(jti_os, jti_app, jtio.common);
    register_emitter(jti_os, jtio.emitter, true);
    jti_os.add("port", jtio.port, "port pair: uu, ll, or ul");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ConfigError::exit_code;
    }

    struct Dispatch {
        CLI::App* sub;
        OptionSet* os;
        Common* common;
        std::function<int(const OptionSet&)> exec;
    };
    const std::vector<Dispatch> table = {
        {sweep_app, &sweep_os, &sweep.common,
         [&](const OptionSet& os) { return run_sorter_sweep(sweep, os); }},
        {filter_app, &filter_os, &filter.common,
         [&](const OptionSet& os) { return run_filter(filter, os); }},
        {bsm_app, &bsm_os, &bsm.common,
         [&](const OptionSet& os) { return run_bsm_map(bsm, os); }},
        {two_app, &two_os, &two.common,
         [&](const OptionSet& os) { return run_two_sided(two, os); }},
        {qkd_app, &qkd_os, &qkd.common,
         [&](const OptionSet& os) { return run_qkd(qkd, os); }},
        {counts_app, &counts_os, &counts.common,
         [&](const OptionSet& os) { return run_counts(counts, os); }},
        {fit_app, &fit_os, &fitopts.common,
         [&](const OptionSet& os) { return run_fit(fitopts, os); }},
        {jti_app, &jti_os, &jtio.common,
         [&](const OptionSet& os) { return run_jti(jtio, os); }},
    };

    try {
        for (const auto& entry : table) {
            if (!entry.sub->parsed()) continue;
            if (!entry.common->config_path.empty())
                entry.os->overlay(load_config_file(entry.common->config_path));
            return entry.exec(*entry.os);
        }
        throw ConfigError("no subcommand selected");
    } catch (const ConfigError& e) {
        std::cerr << "error[config]: " << e.what() << '\n';
        return ConfigError::exit_code;
    } catch (const TruncationError& e) {
        std::cerr << "error[truncation]: " << e.what() << '\n';
        return TruncationError::exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error[runtime]: " << e.what() << '\n';
        return 1;
    }
}

} // namespace sorterlab::cli
