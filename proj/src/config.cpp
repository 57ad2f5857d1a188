#include "mlq/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mlq/errors.hpp"

namespace mlq {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            const std::string key = where.empty() ? item.key() : where + "." + item.key();
            throw ParameterError(key, "unknown configuration key");
        }
    }
}

const json& require_object(const json& j, const std::string& key) {
    if (!j.is_object()) throw ParameterError(key, "expected an object");
    return j;
}

double get_number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ParameterError(key, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParameterError(key, "must be finite");
    return v;
}

long long get_integer(const json& j, const std::string& key) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ParameterError(key, "expected an integer");
    return j.get<long long>();
}

std::vector<double> get_numbers(const json& j, const std::string& key) {
    if (!j.is_array()) throw ParameterError(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

DistributionConfig parse_distribution(const json& j, const std::string& key) {
    require_object(j, key);
    reject_unknown(j, key, {"family", "params"});
    if (!j.contains("family") || !j["family"].is_string()) throw ParameterError(key + ".family", "expected a string");
    DistributionConfig d;
    try {
        d.family = parse_family(j["family"].get<std::string>());
    } catch (const ParameterError& e) {
        throw ParameterError(key + ".family", e.what());
    }
    if (j.contains("params")) d.params = get_numbers(j["params"], key + ".params");
    return d;
}

LevelStructure parse_levels(const json& j) {
    require_object(j, "levels");
    reject_unknown(j, "levels", {"thresholds", "lambda", "mu", "lambda0", "lambda_hat", "mu_hat"});
    for (const char* k : {"thresholds", "lambda", "mu", "lambda0", "lambda_hat", "mu_hat"}) {
        if (!j.contains(k)) throw ParameterError(std::string("levels.") + k, "missing");
    }
    LevelStructure l;
    l.thresholds = get_numbers(j["thresholds"], "levels.thresholds");
    l.lambda = get_numbers(j["lambda"], "levels.lambda");
    l.mu = get_numbers(j["mu"], "levels.mu");
    l.lambda0 = get_number(j["lambda0"], "levels.lambda0");
    l.lambda_hat = get_numbers(j["lambda_hat"], "levels.lambda_hat");
    l.mu_hat = get_numbers(j["mu_hat"], "levels.mu_hat");
    return l;
}

json distribution_json(const DistributionConfig& d) {
    return json{{"family", std::string(family_name(d.family))}, {"params", d.params}};
}

json to_json(const ExperimentConfig& c) {
    json levels{{"thresholds", c.levels.thresholds}, {"lambda", c.levels.lambda},
                {"mu", c.levels.mu},                 {"lambda0", c.levels.lambda0},
                {"lambda_hat", c.levels.lambda_hat}, {"mu_hat", c.levels.mu_hat}};
    return json{{"levels", levels},
                {"arrival_dist", distribution_json(c.arrival_dist)},
                {"service_dist", distribution_json(c.service_dist)},
                {"n_grid", c.n_grid},
                {"horizon", c.horizon},
                {"replications", c.replications},
                {"sde", json{{"dt", c.sde_dt}, {"projection", std::string(boundary_mode_name(c.sde_projection))}}},
                {"probe_times", c.probe_times},
                {"seed", c.seed},
                {"output_dir", c.output_dir},
                {"export_paths", c.export_paths},
                {"local_time_eps", c.local_time_eps},
                {"occupation_eps", c.occupation_eps},
                {"qv_bias_budget", c.qv_bias_budget}};
}

}  // namespace

RenewalSpec ExperimentConfig::arrival_spec() const {
    try {
        return make_renewal_spec(arrival_dist.family, arrival_dist.params);
    } catch (const ParameterError& e) {
        throw ParameterError("arrival_dist." + e.key(), e.what());
    }
}

RenewalSpec ExperimentConfig::service_spec() const {
    try {
        return make_renewal_spec(service_dist.family, service_dist.params);
    } catch (const ParameterError& e) {
        throw ParameterError("service_dist." + e.key(), e.what());
    }
}

CoefficientField ExperimentConfig::coefficients() const {
    return make_coefficients(levels, arrival_spec(), service_spec());
}

void ExperimentConfig::validate() const {
    levels.validate();
    arrival_spec();
    service_spec();
    if (n_grid.empty()) throw ParameterError("n_grid", "needs at least one value");
    for (int n : n_grid) {
        if (n < 1) throw ParameterError("n_grid", "values must be >= 1");
        scale_system(levels, n);
    }
    if (!(horizon > 0.0)) throw ParameterError("horizon", "must be positive");
    if (replications < 2) throw ParameterError("replications", "must be at least 2");
    grid_steps(horizon, sde_dt);
    if (probe_times.empty()) throw ParameterError("probe_times", "must not be empty");
    for (double t : probe_times) {
        if (!(t > 0.0) || t > horizon) throw ParameterError("probe_times", "probes must lie in (0, horizon]");
    }
    if (export_paths < 0) throw ParameterError("export_paths", "must be >= 0");
    if (!(local_time_eps > 0.0)) throw ParameterError("local_time_eps", "must be positive");
    for (double e : occupation_eps) {
        if (!(e > 0.0)) throw ParameterError("occupation_eps", "must be positive");
    }
    if (output_dir.empty()) throw ParameterError("output_dir", "must not be empty");
}

ExperimentConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParameterError("config", std::string("malformed JSON: ") + e.what());
    }
    require_object(j, "config");
    reject_unknown(j, "",
                   {"levels", "arrival_dist", "service_dist", "n_grid", "horizon", "replications", "sde",
                    "probe_times", "seed", "output_dir", "export_paths", "local_time_eps", "occupation_eps",
                    "qv_bias_budget"});
    for (const char* k : {"levels", "arrival_dist", "service_dist"}) {
        if (!j.contains(k)) throw ParameterError(k, "missing");
    }

    ExperimentConfig c;
    c.levels = parse_levels(j["levels"]);
    c.arrival_dist = parse_distribution(j["arrival_dist"], "arrival_dist");
    c.service_dist = parse_distribution(j["service_dist"], "service_dist");
    if (j.contains("n_grid")) {
        if (!j["n_grid"].is_array()) throw ParameterError("n_grid", "expected an array of integers");
        c.n_grid.clear();
        for (const auto& v : j["n_grid"]) c.n_grid.push_back(static_cast<int>(get_integer(v, "n_grid")));
    }
    if (j.contains("horizon")) c.horizon = get_number(j["horizon"], "horizon");
    if (j.contains("replications")) c.replications = static_cast<int>(get_integer(j["replications"], "replications"));
    if (j.contains("sde")) {
        const json& s = require_object(j["sde"], "sde");
        reject_unknown(s, "sde", {"dt", "projection"});
        if (s.contains("dt")) c.sde_dt = get_number(s["dt"], "sde.dt");
        if (s.contains("projection")) {
            if (!s["projection"].is_string()) throw ParameterError("sde.projection", "expected a string");
            c.sde_projection = parse_boundary_mode(s["projection"].get<std::string>());
        }
    }
    if (j.contains("probe_times")) c.probe_times = get_numbers(j["probe_times"], "probe_times");
    if (c.probe_times.empty()) c.probe_times = {0.5 * c.horizon, c.horizon};
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ParameterError("seed", "expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ParameterError("output_dir", "expected a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("export_paths")) c.export_paths = static_cast<int>(get_integer(j["export_paths"], "export_paths"));
    if (j.contains("local_time_eps")) c.local_time_eps = get_number(j["local_time_eps"], "local_time_eps");
    if (j.contains("occupation_eps")) c.occupation_eps = get_numbers(j["occupation_eps"], "occupation_eps");
    if (j.contains("qv_bias_budget")) c.qv_bias_budget = get_number(j["qv_bias_budget"], "qv_bias_budget");
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("config", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string canonical_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) {
    // where results are written does not change what they are
    auto j = to_json(cfg);
    j.erase("output_dir");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

double default_qv_bias_budget(const ExperimentConfig& cfg, int n) {
    if (cfg.qv_bias_budget >= 0.0) return cfg.qv_bias_budget;
    const double va = cfg.arrival_spec().variance();
    const double vs = cfg.service_spec().variance();
    return (va * (1.0 + va) + vs * (1.0 + vs)) / static_cast<double>(n);
}

}  // namespace mlq
