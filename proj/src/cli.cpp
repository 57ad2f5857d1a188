#include "mlq/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlq/analysis.hpp"
#include "mlq/config.hpp"
#include "mlq/decomposition.hpp"
#include "mlq/errors.hpp"
#include "mlq/experiment.hpp"
#include "mlq/io.hpp"
#include "mlq/selftest.hpp"

namespace mlq {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string out;
    std::vector<int> n;
    int reps = 0;
};

struct Context {
    ExperimentConfig cfg;
    std::string hash;
    int workers = 1;
    fs::path out;
    RenewalSpec arrivals;
    RenewalSpec services;
};

ordered_json estimate_json(const MeanEstimate& m) { return ordered_json{{"mean", m.mean}, {"se", m.se}}; }

std::string tag(int n, std::size_t r) { return "n" + std::to_string(n) + "_r" + std::to_string(r); }

void write_decomposition(const fs::path& file, std::string_view hash, const DecompositionRecord& rec,
                         const QueuePath& path) {
    CsvWriter csv(file, hash, {"time", "M_A", "M_S", "M", "QV_A", "QV_S", "QV_cross", "QV", "eA", "eS", "e"});
    for (std::size_t k = 0; k < rec.size(); ++k) {
        csv << rec.times[k] << rec.m_a[k] << rec.m_s[k] << rec.m[k] << rec.qv_a[k] << rec.qv_s[k] << rec.qv_cross[k]
            << rec.qv(k) << rec.error_a(k) << rec.error_s(k) << rec.error(k);
        csv.end_row();
    }
    (void)path;
}

ordered_json run_simulate(const Context& c, bool& pass) {
    const auto& cfg = c.cfg;
    ordered_json out = ordered_json::object();
    for (int n : cfg.n_grid) {
        const ScaledSystem sys = scale_system(cfg.levels, n);
        struct Row {
            double x_hat = 0.0, i_hat = 0.0, flow = 0.0, clock = 0.0;
        };
        const auto rows = run_replications(static_cast<std::size_t>(cfg.replications), c.workers, [&](std::size_t r) {
            const QueuePath path = simulate_queue(sys, c.arrivals, c.services, cfg.horizon, queue_streams(cfg.seed, n, r));
            if (r < static_cast<std::size_t>(cfg.export_paths)) {
                write_queue_path(c.out / "paths" / (tag(n, r) + ".csv"), c.hash, path);
                write_scaled_path(c.out / "paths" / (tag(n, r) + "_scaled.csv"), c.hash, path);
            }
            const auto h = occupation_times(path, cfg.horizon);
            return Row{static_cast<double>(path.events().back().x) / sys.scale(),
                       sys.arrival_rate[0] * h[0] / sys.scale(), verify_flow_balance(path),
                       clock_consistency_defect(path)};
        });
        CsvWriter csv(c.out / "terminal" / ("queue_n" + std::to_string(n) + ".csv"), c.hash,
                      {"replication", "X_hat", "I_hat"});
        std::vector<double> xs, is;
        double flow = 0.0, clock = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            csv << static_cast<long long>(r) << rows[r].x_hat << rows[r].i_hat;
            csv.end_row();
            xs.push_back(rows[r].x_hat);
            is.push_back(rows[r].i_hat);
            flow = std::max(flow, rows[r].flow);
            clock = std::max(clock, rows[r].clock);
        }
        const bool ok = flow == 0.0 && clock <= 1e-9;
        pass = pass && ok;
        out[std::to_string(n)] = ordered_json{{"x_hat_T", estimate_json(mean_estimate(xs))},
                                              {"i_hat_T", estimate_json(mean_estimate(is))},
                                              {"max_flow_defect", flow},
                                              {"max_clock_defect", clock},
                                              {"pass", ok}};
    }
    return out;
}

ordered_json run_decompose(const Context& c, bool& pass) {
    const auto& cfg = c.cfg;
    ordered_json out = ordered_json::object();
    for (int n : cfg.n_grid) {
        const ScaledSystem sys = scale_system(cfg.levels, n);
        const auto obs = run_replications(static_cast<std::size_t>(cfg.replications), c.workers, [&](std::size_t r) {
            const auto streams = queue_streams(cfg.seed, n, r);
            if (r < static_cast<std::size_t>(cfg.export_paths)) {
                const QueuePath path = simulate_queue(sys, c.arrivals, c.services, cfg.horizon, streams);
                const auto rec = build_record(path, c.arrivals, c.services);
                write_decomposition(c.out / "decomposition" / (tag(n, r) + ".csv"), c.hash, rec, path);
            }
            return observe_queue(sys, c.arrivals, c.services, cfg.horizon, cfg.probe_times, streams);
        });
        double worst = 0.0;
        std::vector<double> m_end, m_sq, e_a, sup_e_a, cross, pqv;
        for (const auto& o : obs) {
            worst = std::max(worst, o.dm_defect / (1.0 + static_cast<double>(o.arrivals_end)));
            m_end.push_back(o.m_end);
            m_sq.push_back(o.m_end * o.m_end);
            e_a.push_back(o.e_a_end);
            sup_e_a.push_back(o.sup_e_a);
            cross.push_back(o.cross_end);
        }
        const bool ok = worst <= 1e-8;
        pass = pass && ok;
        out[std::to_string(n)] = ordered_json{{"max_relative_dm_defect", worst},
                                              {"m_hat_T", estimate_json(mean_estimate(m_end))},
                                              {"m_hat_T_squared", estimate_json(mean_estimate(m_sq))},
                                              {"e_a_T", estimate_json(mean_estimate(e_a))},
                                              {"sup_abs_e_a", estimate_json(mean_estimate(sup_e_a))},
                                              {"cross_variation_T", estimate_json(mean_estimate(cross))},
                                              {"pass", ok}};
    }
    return out;
}

SdeObservableSpec observable_spec(const ExperimentConfig& cfg) {
    SdeObservableSpec s;
    s.probe_times = cfg.probe_times;
    s.local_time_level = 0.0;
    s.local_time_eps = {cfg.local_time_eps, 2.0 * cfg.local_time_eps};
    s.occupation_level = cfg.levels.thresholds.front();
    s.occupation_eps = cfg.occupation_eps;
    return s;
}

std::vector<SdeObservables> sde_ensemble(const Context& c, const CoefficientField& coeffs, Scheme scheme) {
    const auto& cfg = c.cfg;
    const auto spec = observable_spec(cfg);
    return run_replications(static_cast<std::size_t>(cfg.replications), c.workers, [&](std::size_t r) {
        if (r < static_cast<std::size_t>(cfg.export_paths)) {
            Stream s = sde_stream(cfg.seed, scheme, r);
            const auto path = scheme == Scheme::projected
                                  ? solve_projected(coeffs, 0.0, cfg.horizon, cfg.sde_dt, s, cfg.sde_projection)
                                  : solve_mirror(coeffs, 0.0, cfg.horizon, cfg.sde_dt, s);
            write_sde_path(c.out / "sde" / (std::string(scheme_name(scheme)) + "_r" + std::to_string(r) + ".csv"),
                           c.hash, path);
        }
        return observe_sde(scheme, coeffs, 0.0, cfg.horizon, cfg.sde_dt, sde_stream(cfg.seed, scheme, r), spec,
                           cfg.sde_projection);
    });
}

ordered_json sde_summary(const Context& c, Scheme scheme, const std::vector<SdeObservables>& obs,
                         std::vector<double>& x_end) {
    const auto& cfg = c.cfg;
    CsvWriter csv(c.out / "sde" / ("terminal_" + std::string(scheme_name(scheme)) + ".csv"), c.hash, {"X", "L"});
    std::vector<double> l_end, lt, lt2;
    std::vector<std::vector<double>> occ(cfg.occupation_eps.size());
    x_end.clear();
    for (const auto& o : obs) {
        csv << o.x_end << o.l_end;
        csv.end_row();
        x_end.push_back(o.x_end);
        l_end.push_back(o.l_end);
        lt.push_back(o.local_time[0]);
        lt2.push_back(o.local_time[1]);
        for (std::size_t e = 0; e < occ.size(); ++e) occ[e].push_back(o.occupation[e]);
    }
    const auto l = mean_estimate(l_end);
    const auto local = mean_estimate(lt);
    ordered_json j{{"x_T", estimate_json(mean_estimate(x_end))},
                   {"l_T", estimate_json(l)},
                   {"local_time_at_0", estimate_json(local)},
                   {"local_time_at_0_double_eps", estimate_json(mean_estimate(lt2))},
                   {"local_time_over_2l", local.mean / (2.0 * l.mean)}};
    ordered_json o = ordered_json::object();
    for (std::size_t e = 0; e < occ.size(); ++e) {
        o[format_double(cfg.occupation_eps[e])] = estimate_json(mean_estimate(occ[e]));
    }
    j["threshold_occupation"] = o;
    if (occ.size() >= 2) {
        j["occupation_ratio"] = mean_estimate(occ[0]).mean / mean_estimate(occ[1]).mean;
    }
    return j;
}

ordered_json run_sde(const Context& c, bool&) {
    const auto coeffs = c.cfg.coefficients();
    std::vector<double> xp, xm;
    ordered_json out;
    out["projection"] = std::string(boundary_mode_name(c.cfg.sde_projection));
    out["projected"] = sde_summary(c, Scheme::projected, sde_ensemble(c, coeffs, Scheme::projected), xp);
    out["mirror"] = sde_summary(c, Scheme::mirror, sde_ensemble(c, coeffs, Scheme::mirror), xm);
    out["ks_projected_vs_mirror"] = ks_distance(xp, xm);
    return out;
}

ordered_json run_compare(const Context& c, bool& pass) {
    const auto& cfg = c.cfg;
    if (cfg.n_grid.size() < 2) throw ParameterError("n_grid", "compare needs at least two n values");
    const auto coeffs = cfg.coefficients();

    std::vector<double> probes = cfg.probe_times;
    std::map<int, TerminalSamples> queue;
    std::vector<QueueObservables> largest;
    const int n_max = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
    for (int n : cfg.n_grid) {
        const ScaledSystem sys = scale_system(cfg.levels, n);
        auto obs = run_replications(static_cast<std::size_t>(cfg.replications), c.workers, [&](std::size_t r) {
            return observe_queue(sys, c.arrivals, c.services, cfg.horizon, probes, queue_streams(cfg.seed, n, r));
        });
        TerminalSamples t;
        t.horizon = cfg.horizon;
        CsvWriter csv(c.out / "terminal" / ("queue_n" + std::to_string(n) + ".csv"), c.hash,
                      {"replication", "X_hat", "I_hat"});
        for (std::size_t r = 0; r < obs.size(); ++r) {
            t.x.push_back(obs[r].x_hat_end);
            t.boundary.push_back(obs[r].i_hat_end);
            csv << static_cast<long long>(r) << obs[r].x_hat_end << obs[r].i_hat_end;
            csv.end_row();
        }
        queue[n] = std::move(t);
        if (n == n_max) largest = std::move(obs);
    }

    const auto sde_obs = sde_ensemble(c, coeffs, Scheme::projected);
    TerminalSamples sde;
    sde.horizon = cfg.horizon;
    for (const auto& o : sde_obs) {
        sde.x.push_back(o.x_end);
        sde.boundary.push_back(o.l_end);
    }
    std::vector<double> scratch;
    ordered_json sde_json = sde_summary(c, Scheme::projected, sde_obs, scratch);

    const auto conv = convergence_report(queue, sde);
    ordered_json rows = ordered_json::array();
    for (const auto& r : conv.rows) {
        rows.push_back(ordered_json{{"n", r.n},
                                    {"ks", r.ks},
                                    {"mean_x_hat", r.mean_x},
                                    {"mean_i_hat", r.mean_boundary},
                                    {"boundary_gap", r.boundary_gap}});
    }

    const ScaledSystem sys = scale_system(cfg.levels, n_max);
    std::vector<QvObservation> qv;
    std::vector<MartingaleSample> ms;
    for (const auto& o : largest) {
        qv.push_back(QvObservation{o.qv_end, o.occupation});
        ms.push_back(MartingaleSample{o.x_hat_probe.front(), o.m_probe.front(), o.m_end});
    }
    const auto weights = qv_weights(sys, c.arrivals.variance(), c.services.variance());
    const auto qvr = qv_match_test(qv, weights, cfg.horizon, default_qv_bias_budget(cfg, n_max));
    // with no probe before T, test the increment from the empty start: X(0) = M(0) = 0
    const double s = probes.front() < cfg.horizon ? probes.front() : 0.0;
    if (s == 0.0) {
        for (auto& m : ms) m.x_s = m.m_s = 0.0;
    }
    const auto battery = martingale_battery(ms, s, cfg.horizon);
    ordered_json bat = ordered_json::array();
    for (const auto& e : battery.entries) {
        bat.push_back(ordered_json{{"h", e.name}, {"mean", e.estimate.mean}, {"se", e.estimate.se}, {"pass", e.pass}});
    }

    pass = pass && conv.pass() && qvr.pass && battery.pass();
    return ordered_json{
        {"convergence", ordered_json{{"rows", rows},
                                     {"sde_mean_x", conv.sde_mean_x},
                                     {"sde_mean_l", conv.sde_mean_boundary},
                                     {"monotone", conv.monotone},
                                     {"ks_pass", conv.ks_pass},
                                     {"boundary_pass", conv.boundary_pass}}},
        {"sde", sde_json},
        {"qv_match", ordered_json{{"n", n_max},
                                  {"difference", estimate_json(qvr.difference)},
                                  {"bias_budget", qvr.bias_budget},
                                  {"pass", qvr.pass}}},
        {"martingale_battery", ordered_json{{"n", n_max}, {"s", battery.s}, {"t", battery.t}, {"entries", bat}}}};
}

void flatten(const ordered_json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", rows);
    } else if (j.is_number_float()) {
        rows.emplace_back(prefix, format_double(j.get<double>()));
    } else if (j.is_string()) {
        rows.emplace_back(prefix, j.get<std::string>());
    } else {
        rows.emplace_back(prefix, j.dump());
    }
}

std::string render_text(const ordered_json& report) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(report, "", rows);
    std::size_t width = 0;
    for (const auto& r : rows) width = std::max(width, r.first.size());
    std::ostringstream os;
    for (const auto& [k, v] : rows) os << k << std::string(width + 2 - k.size(), ' ') << v << '\n';
    return os.str();
}

int selftest(std::ostream& out) {
    const auto results = run_selftest();
    int failed = 0;
    for (const auto& r : results) {
        out << (r.pass ? "PASS " : "FAIL ") << r.name;
        if (!r.detail.empty()) out << "  (" << r.detail << ")";
        out << '\n';
        failed += r.pass ? 0 : 1;
    }
    out << results.size() - failed << "/" << results.size() << " fixtures passed\n";
    return failed == 0 ? exit_pass : exit_test_failure;
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-level GI/G/1 heavy-traffic simulator", "mlq"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "Experiment configuration (JSON)");
    app.add_option("--seed", o.seed, "Master seed override");
    app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "Output directory override");
    app.add_option("--n", o.n, "Comma-separated n grid override")->delimiter(',');
    app.add_option("--reps", o.reps, "Replication count override")->check(CLI::PositiveNumber);
    auto* sim = app.add_subcommand("simulate", "Queue paths and their diffusion scaling");
    auto* dec = app.add_subcommand("decompose", "Martingale decomposition, identity defects, error processes");
    auto* sde = app.add_subcommand("sde", "Projected and mirror SDE ensembles");
    auto* cmp = app.add_subcommand("compare", "Queue vs SDE convergence, QV match, martingale battery");
    auto* st = app.add_subcommand("selftest", "Deterministic fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_pass : exit_config_error;
    }

    if (st->parsed()) return selftest(out);

    Context c;
    try {
        if (o.config.empty()) throw ParameterError("config", "--config is required for this command");
        c.cfg = load_config(o.config);
        if (o.seed) c.cfg.seed = *o.seed;
        if (!o.n.empty()) c.cfg.n_grid = o.n;
        if (o.reps > 0) c.cfg.replications = o.reps;
        if (!o.out.empty()) {
            c.cfg.output_dir = o.out;
        } else if (const char* env = std::getenv("MLQ_OUT_DIR"); env && *env) {
            c.cfg.output_dir = env;
        }
        c.cfg.validate();
        c.arrivals = c.cfg.arrival_spec();
        c.services = c.cfg.service_spec();
    } catch (const ParameterError& e) {
        err << "config error [" << e.key() << "]: " << e.what() << '\n';
        return exit_config_error;
    }
    c.hash = config_hash(c.cfg);
    c.workers = o.workers;
    c.out = c.cfg.output_dir;

    std::string command;
    bool pass = true;
    ordered_json results;
    try {
        if (sim->parsed()) {
            command = "simulate";
            results = run_simulate(c, pass);
        } else if (dec->parsed()) {
            command = "decompose";
            results = run_decompose(c, pass);
        } else if (sde->parsed()) {
            command = "sde";
            results = run_sde(c, pass);
        } else if (cmp->parsed()) {
            command = "compare";
            results = run_compare(c, pass);
        }
    } catch (const ParameterError& e) {
        err << "config error [" << e.key() << "]: " << e.what() << '\n';
        return exit_config_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_test_failure;
    }

    ordered_json report{{"tool", "mlqueue"},
                        {"version", std::string(kToolVersion)},
                        {"command", command},
                        {"config_hash", c.hash},
                        {"seed", c.cfg.seed},
                        {"replications", c.cfg.replications},
                        {"n_grid", c.cfg.n_grid},
                        {"pass", pass},
                        {"results", results}};
    const std::string text = render_text(report);
    write_text(c.out / "report.json", report.dump(2) + "\n");
    write_text(c.out / "report.txt", text);
    out << text;
    return pass ? exit_pass : exit_test_failure;
}

}  // namespace mlq
