#include "cluster_limit/cli.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cluster_limit/blocks.hpp"
#include "cluster_limit/limits.hpp"
#include "cluster_limit/models.hpp"
#include "cluster_limit/verify.hpp"

namespace cluster_limit::cli {

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown config key: " + path + "." + key);
        }
    }
}

const json& need(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError("missing config key: " + path + "." + key);
    return j.at(key);
}

SequenceModel parse_model(const json& j) {
    const std::string kind = need(j, "model", "kind").get<std::string>();
    if (kind == "iid_pareto") {
        require_keys(j, "model", {"kind", "alpha", "p", "burn_in"});
    } else if (kind == "moving_max") {
        require_keys(j, "model", {"kind", "m", "alpha", "burn_in"});
    } else if (kind == "ar1") {
        require_keys(j, "model", {"kind", "phi", "alpha", "burn_in"});
    } else if (kind == "associated_linear") {
        require_keys(j, "model", {"kind", "depth", "burn_in"});
    } else {
        throw ConfigError("model.kind: unknown model '" + kind + "'");
    }
    return SequenceModel::from_json(j);
}

CanonicalMeasure parse_canonical(const json& j) {
    const std::string variant = need(j, "canonical", "variant").get<std::string>();
    if (variant == "compound_poisson_uniform") {
        require_keys(j, "canonical", {"variant", "a", "pi"});
    } else if (variant == "regvar_cluster") {
        require_keys(j, "canonical", {"variant", "theta", "alpha", "Q"});
    } else {
        throw ConfigError("canonical.variant: unknown variant '" + variant + "'");
    }
    return CanonicalMeasure::from_json(j);
}

struct PlanSpec {
    std::vector<std::int64_t> n_schedule;
    BlockRule rule = BlockRule::sqrt_n;
    std::int64_t fixed_length = 0;
};

PlanSpec parse_plan(const json& j) {
    require_keys(j, "plan", {"n", "block"});
    PlanSpec spec;
    const json& n = need(j, "plan", "n");
    if (n.is_array()) {
        spec.n_schedule = n.get<std::vector<std::int64_t>>();
    } else {
        spec.n_schedule = {n.get<std::int64_t>()};
    }
    if (spec.n_schedule.empty()) throw ConfigError("plan.n: empty schedule");
    if (j.contains("block")) {
        const json& block = j.at("block");
        if (block.is_string()) {
            const std::string rule = block.get<std::string>();
            if (rule == "sqrt") {
                spec.rule = BlockRule::sqrt_n;
            } else if (rule == "two_thirds") {
                spec.rule = BlockRule::two_thirds;
            } else {
                throw ConfigError("plan.block: unknown rule '" + rule + "'");
            }
        } else {
            spec.rule = BlockRule::fixed;
            spec.fixed_length = block.get<std::int64_t>();
        }
    }
    return spec;
}

ProcessMode parse_mode(const json& j) {
    const std::string mode = j.get<std::string>();
    if (mode == "exceedance") return ProcessMode::exceedance;
    if (mode == "scaled") return ProcessMode::scaled;
    throw ConfigError("mode: expected 'exceedance' or 'scaled'");
}

std::vector<TestFunction> parse_panel(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "default5") return default_panel();
        throw ConfigError("panel: unknown named panel '" + j.get<std::string>() + "'");
    }
    std::vector<TestFunction> panel;
    for (const auto& f : j) panel.push_back(TestFunction::from_json(f));
    if (panel.empty()) throw ConfigError("panel: empty");
    return panel;
}

std::vector<ClusterEvent> parse_events(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "default") return default_events();
        throw ConfigError("events: unknown named family '" + j.get<std::string>() + "'");
    }
    std::vector<ClusterEvent> events;
    for (const auto& e : j) events.push_back(ClusterEvent::from_json(e));
    if (events.empty()) throw ConfigError("events: empty");
    return events;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out << content;
}

struct CommonConfig {
    json root;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    std::int64_t reps = 0;
    ExecPolicy policy;
};

void print_rows(std::ostream& out, const ConvergenceReport& report) {
    for (const auto& row : report.rows) {
        out << (row.pass ? "[PASS] " : "[FAIL] ") << row.check << " n=" << row.n << ' '
            << row.label << ": statistic=" << row.statistic << " target=" << row.target
            << " ci=[" << row.ci_lo << ',' << row.ci_hi << "]\n";
    }
}

int run_verify(const CommonConfig& common, std::ostream& out) {
    const json& j = common.root;
    const SequenceModel model = parse_model(need(j, "config", "model"));
    const CanonicalMeasure canonical = parse_canonical(need(j, "config", "canonical"));
    const PlanSpec plan = parse_plan(need(j, "config", "plan"));
    const ProcessMode mode = parse_mode(need(j, "config", "mode"));

    Tolerance tol;
    if (j.contains("tolerance")) {
        require_keys(j.at("tolerance"), "tolerance", {"abs", "rel"});
        tol.abs_probability = j.at("tolerance").value("abs", tol.abs_probability);
        tol.rel_mass = j.at("tolerance").value("rel", tol.rel_mass);
    }

    std::vector<std::string> checks;
    for (const auto& c : need(j, "config", "checks")) checks.push_back(c.get<std::string>());

    ConvergenceReport report;
    report.experiment = j.value("name", "verify");
    for (const std::string& check : checks) {
        if (check == "condition_a") {
            const auto x_grid = need(j, "config", "x_grid").get<std::vector<double>>();
            report.append(check_condition_a(model, canonical, plan.n_schedule, x_grid, mode,
                                            plan.rule, plan.fixed_length, common.reps,
                                            common.seed, tol, common.policy));
        } else if (check == "condition_b") {
            const double x = need(j, "config", "condition_b_x").get<double>();
            const auto events = parse_events(need(j, "config", "events"));
            for (std::int64_t n : plan.n_schedule) {
                const BlockPlan bp = BlockPlan::with_rule(n, plan.rule, plan.fixed_length);
                report.append(check_condition_b(model, canonical, bp, x, events, mode,
                                                common.reps, common.seed, tol, common.policy));
            }
        } else if (check == "laplace") {
            const auto panel = parse_panel(need(j, "config", "panel"));
            report.append(check_laplace(model, canonical, panel, plan.n_schedule, mode,
                                        plan.rule, plan.fixed_length, common.reps, common.seed,
                                        tol, common.policy));
        } else if (check == "poisson_iid") {
            const auto x_grid = need(j, "config", "x_grid").get<std::vector<double>>();
            report.append(check_poisson_iid(model, plan.n_schedule, x_grid, common.reps,
                                            common.seed, tol, common.policy));
        } else {
            throw ConfigError("checks: unknown check '" + check + "'");
        }
    }
    report.metadata["seed"] = common.seed;
    report.metadata["reps"] = common.reps;

    write_text_file(common.out_dir / "report.json", report.to_json().dump(2) + "\n");
    std::ostringstream plot;
    report.write_plotdata_csv(plot);
    write_text_file(common.out_dir / "plotdata.csv", plot.str());
    print_rows(out, report);
    out << (report.global_pass() ? "PASS" : "FAIL") << ": " << report.rows.size()
        << " checks, report written to " << (common.out_dir / "report.json").string() << "\n";
    return report.global_pass() ? 0 : 1;
}

int run_simulate(const CommonConfig& common, std::ostream& out) {
    const json& j = common.root;
    const SequenceModel model = parse_model(need(j, "config", "model"));
    const std::int64_t n = need(j, "config", "n").get<std::int64_t>();
    if (n < 1) throw ConfigError("n: must be >= 1");

    std::ostringstream csv;
    csv << "replicate,j,value\n";
    for (std::int64_t r = 0; r < common.reps; ++r) {
        PathSampler sampler(model, rng::Stream(common.seed, rng::fnv1a64("sample_path"),
                                               static_cast<std::uint64_t>(r)));
        for (std::int64_t idx = 1; idx <= n; ++idx) {
            csv << r << ',' << idx << ',' << sampler.next() << '\n';
        }
    }
    write_text_file(common.out_dir / "paths.csv", csv.str());
    out << "wrote " << common.reps << " path(s) of length " << n << " to "
        << (common.out_dir / "paths.csv").string() << "\n";
    return 0;
}

int run_estimate(const CommonConfig& common, std::ostream& out) {
    const json& j = common.root;
    const SequenceModel model = parse_model(need(j, "config", "model"));
    const PlanSpec plan = parse_plan(need(j, "config", "plan"));
    const ProcessMode mode =
        j.contains("mode") ? parse_mode(j.at("mode")) : ProcessMode::exceedance;

    std::vector<std::string> statistics;
    for (const auto& s : need(j, "config", "statistics")) {
        statistics.push_back(s.get<std::string>());
    }

    json results = json::object();
    for (std::int64_t n : plan.n_schedule) {
        const BlockPlan bp = BlockPlan::with_rule(n, plan.rule, plan.fixed_length);
        json entry = json::object();
        entry["n"] = n;
        entry["r"] = bp.block_length;
        entry["k"] = bp.block_count;
        for (const std::string& stat : statistics) {
            if (stat == "extremal_index") {
                const auto est = extremal_index(model, bp, common.reps, common.seed,
                                                common.policy);
                json e{{"theta_hat", est.theta_hat},
                       {"ci_lo", est.ci.lo},
                       {"ci_hi", est.ci.hi},
                       {"scale", est.scale}};
                if (est.known_theta) e["known_theta"] = *est.known_theta;
                entry["extremal_index"] = e;
            } else if (stat == "cluster_sizes") {
                const auto table = cluster_sizes(model, bp, common.reps, common.seed,
                                                 common.policy);
                json pmf = json::object();
                for (const auto& [k, p] : table.pmf) pmf[std::to_string(k)] = p;
                entry["cluster_sizes"] = {{"pmf", pmf},
                                          {"qualifying_blocks", table.qualifying_blocks},
                                          {"threshold", table.threshold}};
            } else if (stat == "condition_a") {
                const auto x_grid = need(j, "config", "x_grid").get<std::vector<double>>();
                json rows = json::array();
                for (double x : x_grid) {
                    const auto s =
                        condition_a_stat(model, bp, mode, x, common.reps, common.seed,
                                         common.policy);
                    rows.push_back({{"x", x},
                                    {"statistic", s.statistic},
                                    {"ci_lo", s.ci.lo},
                                    {"ci_hi", s.ci.hi}});
                }
                entry["condition_a"] = rows;
            } else if (stat == "ai_gap") {
                const auto panel = parse_panel(need(j, "config", "panel"));
                json rows = json::array();
                for (const auto& f : panel) {
                    const auto gap =
                        ai_gap(model, bp, mode, f, common.reps, common.seed, common.policy);
                    rows.push_back({{"f", f.name()},
                                    {"gap", gap.gap},
                                    {"ci_lo", gap.ci.lo},
                                    {"ci_hi", gap.ci.hi}});
                }
                entry["ai_gap"] = rows;
            } else if (stat == "assoc_bound") {
                const std::int64_t m = need(j, "config", "assoc_m").get<std::int64_t>();
                const auto bound = assoc_covariance_bound(model, n, m, common.reps, common.seed,
                                                          common.policy);
                json lags = json::array();
                for (const auto& lag : bound.lags) {
                    lags.push_back({{"lag", lag.lag},
                                    {"cov", lag.covariance},
                                    {"ci_half_width", lag.ci_half_width}});
                }
                entry["assoc_bound"] = {{"partial_sum", bound.partial_sum},
                                        {"ci_lo", bound.ci.lo},
                                        {"ci_hi", bound.ci.hi},
                                        {"m", m},
                                        {"max_lag", bound.max_lag},
                                        {"lags", lags}};
            } else {
                throw ConfigError("statistics: unknown statistic '" + stat + "'");
            }
        }
        results[std::to_string(n)] = entry;
    }

    // Block summaries of the first replicate, for inspection and plots.
    {
        const std::int64_t n = plan.n_schedule.front();
        const BlockPlan bp = BlockPlan::with_rule(n, plan.rule, plan.fixed_length);
        const double level = mode == ProcessMode::exceedance ? model.level_u(n).value
                                                             : model.scale_a(n).value;
        PathSampler sampler(model, rng::Stream(common.seed, kernel_salt::block_events, 0));
        std::vector<double> path(static_cast<std::size_t>(n));
        for (auto& v : path) v = sampler.next();
        std::vector<std::pair<std::int64_t, BlockSummary>> rows;
        for (auto& summary : split_blocks(path, mode, level, bp)) {
            rows.emplace_back(0, std::move(summary));
        }
        std::ostringstream csv;
        write_block_summaries_csv(csv, rows);
        write_text_file(common.out_dir / "blocks.csv", csv.str());
    }

    write_text_file(common.out_dir / "estimates.json", results.dump(2) + "\n");
    out << "wrote estimates for " << plan.n_schedule.size() << " n value(s) to "
        << (common.out_dir / "estimates.json").string() << "\n";
    return 0;
}

int run_limit(const CommonConfig& common, std::ostream& out) {
    const json& j = common.root;
    const CanonicalMeasure canonical = parse_canonical(need(j, "config", "canonical"));
    const double eps = need(j, "config", "eps").get<double>();
    const std::int64_t samples = j.value("samples", std::int64_t{100});
    if (samples < 1) throw ConfigError("samples: must be >= 1");

    json sample_list = json::array();
    rng::Stream stream(common.seed, rng::fnv1a64("limit_samples"), 0);
    for (std::int64_t s = 0; s < samples; ++s) {
        json m;
        canonical.sample(eps, stream).to_json(m);
        sample_list.push_back(std::move(m));
    }
    json samples_doc{{"eps", eps}, {"seed", common.seed}, {"samples", sample_list}};
    write_text_file(common.out_dir / "samples.json", samples_doc.dump(2) + "\n");

    json values = json::object();
    if (j.contains("x_grid")) {
        json tails = json::array();
        for (double x : j.at("x_grid").get<std::vector<double>>()) {
            tails.push_back({{"x", x},
                             {"tail_mass", canonical.tail_mass(x)},
                             {"void_probability", canonical.void_probability(x)}});
        }
        values["tail"] = tails;
    }
    if (j.contains("panel")) {
        json laplaces = json::array();
        for (const auto& f : parse_panel(j.at("panel"))) {
            laplaces.push_back({{"f", f.name()}, {"laplace", canonical.laplace(f).value}});
        }
        values["laplace"] = laplaces;
    }
    write_text_file(common.out_dir / "limit.json", values.dump(2) + "\n");
    out << "wrote " << samples << " samples to " << (common.out_dir / "samples.json").string()
        << "\n";
    return 0;
}

const std::set<std::string> kTopLevelKeys = {
    "command", "name",   "seed",   "out",     "threads",  "model",          "plan",
    "mode",    "canonical", "checks", "x_grid", "events",   "condition_b_x", "panel",
    "reps",    "tolerance", "n",      "statistics", "assoc_m", "eps",        "samples"};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (args.empty()) {
            throw ConfigError(
                "usage: cluster-limit <simulate|estimate|verify|limit> --config FILE"
                " [--seed S] [--out DIR]");
        }
        const std::string command = args[0];
        if (command != "simulate" && command != "estimate" && command != "verify" &&
            command != "limit") {
            throw ConfigError("unknown command '" + command + "'");
        }
        std::optional<std::string> config_path;
        std::optional<std::uint64_t> seed_override;
        std::optional<std::string> out_override;
        for (std::size_t i = 1; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size()) {
                config_path = args[++i];
            } else if (args[i] == "--seed" && i + 1 < args.size()) {
                seed_override = std::stoull(args[++i]);
            } else if (args[i] == "--out" && i + 1 < args.size()) {
                out_override = args[++i];
            } else {
                throw ConfigError("unknown argument '" + args[i] + "'");
            }
        }
        if (!config_path) throw ConfigError("--config FILE is required");

        std::ifstream in(*config_path);
        if (!in) throw ConfigError("cannot read config file: " + *config_path);
        json root;
        try {
            root = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("config parse error: " + std::string(e.what()));
        }
        require_keys(root, "config", kTopLevelKeys);
        if (root.contains("command") && root.at("command").get<std::string>() != command) {
            throw ConfigError("command: config says '" +
                              root.at("command").get<std::string>() + "' but '" + command +
                              "' was invoked");
        }

        CommonConfig common;
        common.root = root;
        if (seed_override) {
            common.seed = *seed_override;
        } else if (root.contains("seed")) {
            common.seed = root.at("seed").get<std::uint64_t>();
        } else {
            throw ConfigError("seed: required (config key or --seed)");
        }
        common.reps = root.value("reps", std::int64_t{1});
        if (common.reps < 1) throw ConfigError("reps: must be >= 1");
        const int threads = root.value("threads", 0);
        common.policy = threads == 1 ? ExecPolicy::serial() : ExecPolicy::parallel(threads);

        std::string out_dir = out_override.value_or(root.value("out", "out"));
        common.out_dir = out_dir;
        std::filesystem::create_directories(common.out_dir);

        if (command == "verify") return run_verify(common, out);
        if (command == "simulate") return run_simulate(common, out);
        if (command == "estimate") return run_estimate(common, out);
        return run_limit(common, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cluster_limit::cli
