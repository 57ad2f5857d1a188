#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mlq/cli.hpp"
#include "mlq/config.hpp"
#include "mlq/errors.hpp"
#include "mlq/io.hpp"

using namespace mlq;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"({
  "levels": {"thresholds": [1.0], "lambda": [1.0, 1.0], "mu": [1.0, 1.0], "lambda0": 1.0,
             "lambda_hat": [0.0, 0.0], "mu_hat": [1.0, 2.0]},
  "arrival_dist": {"family": "gamma", "params": [2.0]},
  "service_dist": {"family": "exponential", "params": []},
  "n_grid": [25, 100],
  "horizon": 1.0,
  "replications": 40,
  "sde": {"dt": 1e-3, "projection": "bridge"},
  "probe_times": [0.5, 1.0],
  "seed": 9,
  "output_dir": "unused",
  "export_paths": 1
})";

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "mlq");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mlq-unit-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const auto p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("selftest exits cleanly") {
    const auto r = run({"selftest"});
    CHECK(r.code == exit_pass);
    CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("configuration errors exit with code 2 and name the key") {
    const auto dir = scratch("errors");
    struct Case {
        std::string text, key;
    };
    const std::vector<Case> cases{
        {replace(kSmallConfig, "\"seed\": 9", "\"seed\": 9, \"colour\": 1"), "colour"},
        {replace(kSmallConfig, "\"mu_hat\": [1.0, 2.0]", "\"mu_hat\": [-20.0, 2.0]"), "mu_hat_1"},
        {replace(kSmallConfig, "\"horizon\": 1.0", "\"horizon\": -1.0"), "horizon"},
        {replace(kSmallConfig, "\"params\": [2.0]", "\"params\": [0.0]"), "arrival_dist."},
        {"{ \"levels\": ", "config"},
    };
    for (const auto& c : cases) {
        const auto cfg = write_config(dir, c.text);
        const auto r = run({"simulate", "--config", cfg.string(), "--out", (dir / "out").string()});
        CAPTURE(c.key);
        CHECK(r.code == exit_config_error);
        CHECK(r.err.find(c.key) != std::string::npos);
    }
    CHECK(run({"simulate", "--config", (dir / "missing.json").string()}).code == exit_config_error);
    CHECK(run({"frobnicate"}).code == exit_config_error);
}

TEST_CASE("compare is reproducible across runs and worker counts") {
    const auto dir = scratch("compare");
    const auto cfg = write_config(dir, kSmallConfig);
    std::vector<std::string> reports;
    for (const auto& [sub, workers] : std::vector<std::pair<std::string, std::string>>{
             {"a", "1"}, {"b", "1"}, {"c", "3"}}) {
        const auto out = dir / sub;
        const auto r = run({"compare", "--config", cfg.string(), "--out", out.string(), "--workers", workers});
        CHECK(r.code != exit_config_error);
        REQUIRE(fs::exists(out / "report.json"));
        reports.push_back(slurp(out / "report.json"));
        CHECK(slurp(out / "report.txt") == slurp(dir / "a" / "report.txt"));
    }
    CHECK(reports[0] == reports[1]);
    CHECK(reports[0] == reports[2]);

    const auto hash = config_hash(parse_config(kSmallConfig));
    for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
        if (entry.path().extension() != ".csv") continue;
        std::ifstream in(entry.path());
        std::string header;
        std::getline(in, header);
        CAPTURE(entry.path().string());
        CHECK(header == "# mlqueue " + std::string(kToolVersion) + " config_hash=" + hash);
    }
    CHECK(reports[0].find(hash) != std::string::npos);
}

TEST_CASE("the config hash tracks the canonical content") {
    const auto base = parse_config(kSmallConfig);
    auto seeded = base;
    seeded.seed = 10;
    CHECK(config_hash(base).size() == 16);
    CHECK(config_hash(base) == config_hash(parse_config(kSmallConfig)));
    CHECK(config_hash(base) != config_hash(seeded));
    // key order and whitespace do not matter
    const auto reordered = replace(kSmallConfig, "\"seed\": 9,", "");
    CHECK(config_hash(base) == config_hash(parse_config(replace(reordered, "{\n", "{\"seed\": 9,\n"))));
    CHECK(canonical_json(parse_config(canonical_json(base))) == canonical_json(base));
}

TEST_CASE("formatted doubles round-trip exactly") {
    for (double v : {0.0, -0.0, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, std::numeric_limits<double>::max(),
                     std::numeric_limits<double>::denorm_min()}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(2.0) == "2");
}
