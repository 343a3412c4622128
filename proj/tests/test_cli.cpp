#include "doctest.h"
#include "run.hpp"

#include "sorterlab/csv.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("sorterlab");
    for (const auto& a : args) argv.push_back(a.c_str());
    return sorterlab::cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sorterlab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return sorterlab::csv::read(in);
}

} // namespace

TEST_CASE("cli: help and bad invocations") {
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({}) == 2);                  // a subcommand is required
    CHECK(run_cli({"no-such-command"}) == 2);
    CHECK(run_cli({"sorter-sweep", "--no_such_flag", "1"}) == 2);
}

TEST_CASE("cli: sorter sweep output shape and header") {
    const auto dir = fresh_dir("sweep");
    CHECK(run_cli({"sorter-sweep", "--out", dir.string(), "--detuning_steps", "5",
                   "--n_points", "128", "--diffusion_nodes", "3"}) == 0);
    const auto file = dir / "sorter_sweep.csv";
    REQUIRE(fs::exists(file));

    const std::string text = slurp(file);
    CHECK(text.find("# sorterlab sorter-sweep") == 0);
    CHECK(text.find("# config:") != std::string::npos);
    CHECK(text.find("# seed: 1234") != std::string::npos);

    const auto rows = read_csv(file);
    REQUIRE(rows.size() == 6); // header + 5 points
    CHECK(rows[0][0] == "detuning");
    CHECK(rows[0][1] == "detuning_MHz");
    // Success column equals (P10 + P02)/2 of the same row.
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double p10 = std::stod(rows[r][2]);
        const double p02 = std::stod(rows[r][5]);
        const double success = std::stod(rows[r].back());
        CHECK(success == doctest::Approx(0.5 * (p10 + p02)).epsilon(1e-12));
    }
    // Detunings ascend from the configured minimum to the maximum.
    CHECK(std::stod(rows[1][0]) == doctest::Approx(-6.0));
    CHECK(std::stod(rows[5][0]) == doctest::Approx(6.0));
}

TEST_CASE("cli: runs are bit-identical per (config, seed)") {
    const auto dir = fresh_dir("repro");
    const std::vector<std::string> args = {"sorter-sweep", "--out", dir.string(),
                                           "--detuning_steps", "5", "--n_points", "128",
                                           "--diffusion_nodes", "3"};
    CHECK(run_cli(args) == 0);
    const std::string first = slurp(dir / "sorter_sweep.csv");

    CHECK(run_cli(args) == 0);
    CHECK(slurp(dir / "sorter_sweep.csv") == first);

    // Thread count must not leak into the numbers.
    setenv("SORTERLAB_THREADS", "1", 1);
    CHECK(run_cli(args) == 0);
    unsetenv("SORTERLAB_THREADS");
    CHECK(slurp(dir / "sorter_sweep.csv") == first);
}

TEST_CASE("cli: config file with flag overrides") {
    const auto dir = fresh_dir("config");
    const auto cfg_path = dir / "run.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"beta": 0.9, "detuning_steps": 5, "n_points": 128,)"
            << R"( "diffusion_nodes": 3, "out": ")" << dir.string() << R"("})";
    }
    CHECK(run_cli({"sorter-sweep", "--config", cfg_path.string(), "--beta", "0.8"}) == 0);
    const std::string text = slurp(dir / "sorter_sweep.csv");
    // The resolved config echoed in the header carries the flag value.
    CHECK(text.find("\"beta\":0.8") != std::string::npos);
    CHECK(text.find("\"beta\":0.9") == std::string::npos);

    // Values match a pure-flag run with the same physics.
    const auto dir2 = fresh_dir("config_flags");
    CHECK(run_cli({"sorter-sweep", "--out", dir2.string(), "--beta", "0.8",
                   "--detuning_steps", "5", "--n_points", "128",
                   "--diffusion_nodes", "3"}) == 0);
    const auto a = read_csv(dir / "sorter_sweep.csv");
    const auto b = read_csv(dir2 / "sorter_sweep.csv");
    CHECK(a == b);
}

TEST_CASE("cli: config violations exit with code 2") {
    const auto dir = fresh_dir("badcfg");
    const auto cfg_path = dir / "bad.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"betta": 0.9})"; // unknown key
    }
    CHECK(run_cli({"sorter-sweep", "--out", dir.string(), "--config",
                   cfg_path.string()}) == 2);

    const auto broken = dir / "broken.json";
    {
        std::ofstream cfg(broken);
        cfg << "{ not json";
    }
    CHECK(run_cli({"sorter-sweep", "--out", dir.string(), "--config",
                   broken.string()}) == 2);
    CHECK(run_cli({"sorter-sweep", "--out", dir.string(), "--config",
                   (dir / "missing.json").string()}) == 2);
    // Domain violation through a flag.
    CHECK(run_cli({"sorter-sweep", "--out", dir.string(), "--beta", "1.5",
                   "--n_points", "128", "--detuning_steps", "3",
                   "--diffusion_nodes", "1"}) == 2);
}

TEST_CASE("cli: truncation exits with code 3") {
    const auto dir = fresh_dir("trunc");
    CHECK(run_cli({"sorter-sweep", "--out", dir.string(), "--fwhm_ps", "30",
                   "--n_points", "128", "--detuning_steps", "3",
                   "--diffusion_nodes", "1"}) == 3);
}

TEST_CASE("cli: decoupled emitter produces identity rows") {
    const auto dir = fresh_dir("identity");
    CHECK(run_cli({"sorter-sweep", "--out", dir.string(), "--beta", "0",
                   "--detuning_steps", "3", "--n_points", "128",
                   "--diffusion_nodes", "1"}) == 0);
    const auto rows = read_csv(dir / "sorter_sweep.csv");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        CHECK(std::stod(rows[r][2]) == 1.0);  // p10
        CHECK(std::stod(rows[r][4]) == 1.0);  // p20
        CHECK(std::stod(rows[r][5]) == 0.0);  // p02
    }
}

TEST_CASE("cli: counts record serialization and extraction") {
    const auto dir = fresh_dir("counts");
    CHECK(run_cli({"counts", "--out", dir.string(), "--shots", "2000000",
                   "--n_points", "128", "--diffusion_nodes", "3",
                   "--seed", "42"}) == 0);

    const auto rows = read_csv(dir / "counts.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "C_EE,1");
    CHECK(rows[0][8] == "C_C/C,20");
    CHECK(rows[0][15] == "shots");
    CHECK(rows[0][16] == "seed");
    CHECK(rows[1][15] == "2000000");
    CHECK(rows[1][16] == "42");

    const auto expected = read_csv(dir / "counts_expected.csv");
    REQUIRE(expected.size() == 2);
    // Simulated counters sit near their expectations (Poisson, 6 sigma).
    for (int c = 0; c < 15; ++c) {
        const double mean = std::stod(expected[1][c]);
        const double simulated = std::stod(rows[1][c]);
        CHECK(std::abs(simulated - mean) <= 6.0 * std::sqrt(mean) + 1.0);
    }

    const auto extracted = read_csv(dir / "counts_extracted.csv");
    REQUIRE(extracted.size() == 6);
    for (std::size_t r = 1; r < extracted.size(); ++r) {
        const double truth = std::stod(extracted[r][1]);
        const double est = std::stod(extracted[r][2]);
        CHECK(std::abs(est - truth) < 0.01);
    }

    // Same seed reruns byte-identically.
    const std::string first = slurp(dir / "counts.csv");
    CHECK(run_cli({"counts", "--out", dir.string(), "--shots", "2000000",
                   "--n_points", "128", "--diffusion_nodes", "3",
                   "--seed", "42"}) == 0);
    CHECK(slurp(dir / "counts.csv") == first);
}

TEST_CASE("cli: bsm map long-format rows") {
    const auto dir = fresh_dir("bsmmap");
    CHECK(run_cli({"bsm-map", "--out", dir.string(), "--beta_steps", "2",
                   "--dephasing_steps", "2", "--n_points", "128",
                   "--diffusion_nodes", "1"}) == 0);
    const auto rows = read_csv(dir / "bsm_map.csv");
    REQUIRE(rows.size() == 1 + 2 * 2 * 4);
    CHECK(rows[0] == std::vector<std::string>{"beta", "gamma_d", "quantity", "value"});
    // Each cell contributes success/error/failure/loss and closes to one.
    for (std::size_t base = 1; base < rows.size(); base += 4) {
        CHECK(rows[base][2] == "success");
        CHECK(rows[base + 1][2] == "error");
        CHECK(rows[base + 2][2] == "failure");
        CHECK(rows[base + 3][2] == "loss");
        const double total = std::stod(rows[base][3]) + std::stod(rows[base + 1][3]) +
                             std::stod(rows[base + 2][3]) + std::stod(rows[base + 3][3]);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("cli: two-sided sweep") {
    const auto dir = fresh_dir("twosided");
    CHECK(run_cli({"two-sided", "--out", dir.string(), "--sigma_steps", "3",
                   "--sigma_min", "0.1", "--sigma_max", "0.15",
                   "--n_points", "128"}) == 0);
    const auto rows = read_csv(dir / "two_sided.csv");
    REQUIRE(rows.size() == 4);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double success = std::stod(rows[r][7]);
        CHECK(success > 0.4);
        CHECK(success < 0.53);
    }
}

TEST_CASE("cli: qkd scenarios and ordering") {
    const auto dir = fresh_dir("qkd");
    CHECK(run_cli({"qkd", "--out", dir.string(), "--distance_steps", "3"}) == 0);
    const auto rows = read_csv(dir / "qkd.csv");
    REQUIRE(rows.size() == 10); // header + 3 scenarios x 3 distances
    // Scenario-major rows; compare key rates per distance.
    for (int d = 0; d < 3; ++d) {
        const double linear = std::stod(rows[1 + d][6]);
        const double sota = std::stod(rows[4 + d][6]);
        const double ideal = std::stod(rows[7 + d][6]);
        CHECK(ideal >= sota);
        CHECK(sota >= linear);
    }

    const auto dir2 = fresh_dir("qkd_one");
    CHECK(run_cli({"qkd", "--out", dir2.string(), "--distance_steps", "2",
                   "--scenario", "linear"}) == 0);
    const auto only = read_csv(dir2 / "qkd.csv");
    REQUIRE(only.size() == 3);
    CHECK(only[1][0] == "linear");
    CHECK(only[2][0] == "linear");

    const auto dir3 = fresh_dir("qkd_custom");
    CHECK(run_cli({"qkd", "--out", dir3.string(), "--distance_steps", "2",
                   "--scenario", "custom", "--swap_success", "0.7",
                   "--swap_error", "0.002"}) == 0);
    const auto custom = read_csv(dir3 / "qkd.csv");
    REQUIRE(custom.size() == 3);
    CHECK(custom[1][0] == "custom");

    CHECK(run_cli({"qkd", "--out", dir3.string(), "--scenario", "no-such"}) == 2);
}

TEST_CASE("cli: temporal filter table") {
    const auto dir = fresh_dir("filter");
    CHECK(run_cli({"filter", "--out", dir.string(), "--window_steps", "2",
                   "--window_min_ns", "2.0", "--window_max_ns", "3.0",
                   "--n_points", "128", "--diffusion_nodes", "3"}) == 0);
    const auto rows = read_csv(dir / "filter.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "window_ns");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double acceptance = std::stod(rows[r][1]);
        CHECK(acceptance > 0.0);
        CHECK(acceptance < 1.0);
        const double p20 = std::stod(rows[r][2]);
        const double p02 = std::stod(rows[r][3]);
        const double p11 = std::stod(rows[r][4]);
        CHECK(p20 + p02 + p11 == doctest::Approx(1.0).epsilon(1e-9));
    }

    CHECK(run_cli({"filter", "--out", dir.string(), "--window_steps", "1",
                   "--window_min_ns", "4.0", "--window_max_ns", "4.0",
                   "--center_ns", "0", "--n_points", "128",
                   "--diffusion_nodes", "3"}) == 0);
}

TEST_CASE("cli: jti map export") {
    const auto dir = fresh_dir("jti");
    CHECK(run_cli({"jti", "--out", dir.string(), "--port", "ll", "--n_points", "64",
                   "--diffusion_nodes", "1"}) == 0);
    const auto file = dir / "jti_ll.csv";
    REQUIRE(fs::exists(file));
    const auto rows = read_csv(file);
    REQUIRE(rows.size() == 1 + 64 * 64);
    CHECK(rows[0][0] == "t1_ns");
    double total = 0.0;
    for (std::size_t r = 1; r < rows.size(); ++r) total += std::stod(rows[r][2]);
    CHECK(total > 0.0);

    CHECK(run_cli({"jti", "--out", dir.string(), "--port", "zz"}) == 2);
}

TEST_CASE("cli: fit on synthetic data and on a data file") {
    const auto dir = fresh_dir("fit");
    CHECK(run_cli({"fit", "--out", dir.string(), "--points", "9",
                   "--n_points", "128", "--diffusion_nodes", "3",
                   "--true_diffusion", "0.3", "--guess_diffusion", "0.4",
                   "--noise_p1", "0.005", "--noise_p2", "0.005"}) == 0);
    REQUIRE(fs::exists(dir / "fit_data.csv"));
    REQUIRE(fs::exists(dir / "fit_result.csv"));
    REQUIRE(fs::exists(dir / "fit_result.json"));

    const auto summary = nlohmann::json::parse(slurp(dir / "fit_result.json"));
    CHECK(summary.contains("estimates"));
    CHECK(summary.contains("uncertainties"));
    CHECK(summary.contains("config"));
    CHECK(summary["seed"].get<std::uint64_t>() == 1234);
    const double beta = summary["estimates"]["beta"].get<double>();
    CHECK(beta > 0.5);
    CHECK(beta <= 1.0);
    CHECK(summary["residual"].get<double>() >= 0.0);

    // Round trip: the emitted dataset is valid --data input.
    const auto dir2 = fresh_dir("fit_roundtrip");
    CHECK(run_cli({"fit", "--out", dir2.string(), "--data",
                   (dir / "fit_data.csv").string(), "--n_points", "128",
                   "--diffusion_nodes", "3", "--guess_diffusion", "0.4"}) == 0);
    const auto second = nlohmann::json::parse(slurp(dir2 / "fit_result.json"));
    const double beta2 = second["estimates"]["beta"].get<double>();
    CHECK(beta2 == doctest::Approx(beta).epsilon(1e-3));
}

TEST_CASE("cli: svg emission") {
    const auto dir = fresh_dir("svg");
    CHECK(run_cli({"sorter-sweep", "--out", dir.string(), "--svg",
                   "--detuning_steps", "5", "--n_points", "128",
                   "--diffusion_nodes", "1"}) == 0);
    const auto svg = dir / "sorter_sweep.svg";
    REQUIRE(fs::exists(svg));
    const std::string text = slurp(svg);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.rfind("</svg>") != std::string::npos);
    CHECK(text.find("http://www.w3.org/2000/svg") != std::string::npos);
}
