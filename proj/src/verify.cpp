#include "cluster_limit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace cluster_limit {

double tv_distance(const Pmf& p, const Pmf& q) {
    auto total = [](const Pmf& d) {
        double s = 0.0;
        for (const auto& [k, v] : d) {
            if (k < 1) throw std::invalid_argument("tv_distance: support must be {1,2,...}");
            if (v < 0.0) throw std::invalid_argument("tv_distance: negative mass");
            s += v;
        }
        return s;
    };
    if (std::abs(total(p) - 1.0) > 1e-9 || std::abs(total(q) - 1.0) > 1e-9) {
        throw std::invalid_argument("tv_distance: inputs must sum to 1");
    }
    std::set<std::int64_t> support;
    for (const auto& [k, v] : p) support.insert(k);
    for (const auto& [k, v] : q) support.insert(k);
    double d = 0.0;
    for (std::int64_t k : support) {
        const auto pit = p.find(k);
        const auto qit = q.find(k);
        const double pv = pit == p.end() ? 0.0 : pit->second;
        const double qv = qit == q.end() ? 0.0 : qit->second;
        d += std::abs(pv - qv);
    }
    return d;
}

bool ReportRow::evaluate() const {
    if (comparison == "greater_than") return statistic > target;
    if (comparison == "less_than") return statistic < target;
    return target >= ci_lo - slack && target <= ci_hi + slack;
}

bool ConvergenceReport::global_pass() const {
    for (const auto& row : rows) {
        if (!row.pass) return false;
    }
    return true;
}

void ConvergenceReport::append(const ConvergenceReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    for (const auto& [key, value] : other.metadata.items()) {
        metadata[key] = value;
    }
}

nlohmann::json ConvergenceReport::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["global_pass"] = global_pass();
    j["metadata"] = metadata;
    nlohmann::json out_rows = nlohmann::json::array();
    for (const auto& row : rows) {
        out_rows.push_back({{"check", row.check},
                            {"n", row.n},
                            {"label", row.label},
                            {"statistic", row.statistic},
                            {"ci_lo", row.ci_lo},
                            {"ci_hi", row.ci_hi},
                            {"target", row.target},
                            {"slack", row.slack},
                            {"comparison", row.comparison},
                            {"pass", row.pass}});
    }
    j["rows"] = out_rows;
    return j;
}

ConvergenceReport ConvergenceReport::from_json(const nlohmann::json& j) {
    ConvergenceReport report;
    report.experiment = j.at("experiment").get<std::string>();
    report.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& r : j.at("rows")) {
        ReportRow row;
        row.check = r.at("check").get<std::string>();
        row.n = r.at("n").get<std::int64_t>();
        row.label = r.at("label").get<std::string>();
        row.statistic = r.at("statistic").get<double>();
        row.ci_lo = r.at("ci_lo").get<double>();
        row.ci_hi = r.at("ci_hi").get<double>();
        row.target = r.at("target").get<double>();
        row.slack = r.at("slack").get<double>();
        row.comparison = r.at("comparison").get<std::string>();
        row.pass = r.at("pass").get<bool>();
        report.rows.push_back(std::move(row));
    }
    return report;
}

void ConvergenceReport::write_plotdata_csv(std::ostream& out) const {
    out << "n,x_or_f,statistic,ci_lo,ci_hi,target\n";
    for (const auto& row : rows) {
        out << row.n << ',' << row.label << ',' << row.statistic << ',' << row.ci_lo << ','
            << row.ci_hi << ',' << row.target << '\n';
    }
}

namespace {

ReportRow ci_row(std::string check, std::int64_t n, std::string label, double statistic,
                 const stats::CI& ci, double target, double slack) {
    ReportRow row;
    row.check = std::move(check);
    row.n = n;
    row.label = std::move(label);
    row.statistic = statistic;
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    row.target = target;
    row.slack = slack;
    row.pass = row.evaluate();
    return row;
}

std::string x_label(double x) { return "x=" + std::to_string(x); }

}  // namespace

ConvergenceReport check_condition_a(const SequenceModel& model, const CanonicalMeasure& canonical,
                                    const std::vector<std::int64_t>& n_schedule,
                                    const std::vector<double>& x_grid, ProcessMode mode,
                                    BlockRule rule, std::int64_t fixed_block_length,
                                    std::int64_t reps, std::uint64_t seed, const Tolerance& tol,
                                    const ExecPolicy& policy) {
    ConvergenceReport report;
    report.experiment = "condition_a:" + model.label() + " vs " + canonical.label();
    nlohmann::json sup = nlohmann::json::object();
    for (double x : x_grid) {
        if (!(x > 0.0)) throw std::invalid_argument("check_condition_a: x must be positive");
        if (canonical.is_fixed_modulus(x)) {
            throw std::invalid_argument("check_condition_a: x lies on a fixed-atom modulus");
        }
        double sup_stat = 0.0;
        for (std::int64_t n : n_schedule) {
            const BlockPlan plan = BlockPlan::with_rule(n, rule, fixed_block_length);
            const BlockEventStat stat =
                condition_a_stat(model, plan, mode, x, reps, seed, policy);
            const double target = canonical.tail_mass(x);
            report.rows.push_back(ci_row("condition_a", n, x_label(x), stat.statistic, stat.ci,
                                         target, tol.rel_mass * std::abs(target)));
            sup_stat = std::max(sup_stat, stat.statistic);
        }
        sup[x_label(x)] = sup_stat;
    }
    report.metadata["sup_statistic"] = sup;
    report.metadata["seed"] = seed;
    report.metadata["reps"] = reps;
    report.metadata["mode"] = to_string(mode);
    report.metadata["rule"] = to_string(rule);
    return report;
}

ConvergenceReport check_condition_b(const SequenceModel& model, const CanonicalMeasure& canonical,
                                    const BlockPlan& plan, double x,
                                    const std::vector<ClusterEvent>& events, ProcessMode mode,
                                    std::int64_t reps, std::uint64_t seed, const Tolerance& tol,
                                    const ExecPolicy& policy) {
    const double scale = canonical.tail_mass(x);
    if (!(scale > 0.0)) {
        throw std::invalid_argument("check_condition_b: tail mass vanishes at x");
    }
    for (const auto& event : events) {
        if (!event.avoids_fixed_atoms(canonical.fixed_moduli())) {
            throw std::invalid_argument("check_condition_b: event endpoint on a fixed atom");
        }
    }

    const BlockEventSweep sweep =
        block_event_sweep(model, plan, mode, x, events, reps, seed, policy);
    ConvergenceReport report;
    report.experiment = "condition_b:" + model.label() + " vs " + canonical.label();
    for (std::size_t e = 0; e < events.size(); ++e) {
        const double target = canonical.cluster_mass(x, events[e]).value;
        // Slack is relative to the canonical-mass scale at the level, so
        // zero-mass events get the same absolute allowance as the rest.
        report.rows.push_back(ci_row("condition_b", plan.n,
                                     x_label(x) + "," + events[e].label(),
                                     sweep.events[e].statistic, sweep.events[e].ci, target,
                                     tol.rel_mass * scale));
    }
    report.metadata["seed"] = seed;
    report.metadata["reps"] = reps;
    report.metadata["mode"] = to_string(mode);
    report.metadata["x"] = x;
    report.metadata["level"] = sweep.level;
    return report;
}

ConvergenceReport check_laplace(const SequenceModel& model, const CanonicalMeasure& canonical,
                                const std::vector<TestFunction>& panel,
                                const std::vector<std::int64_t>& n_schedule, ProcessMode mode,
                                BlockRule rule, std::int64_t fixed_block_length, std::int64_t reps,
                                std::uint64_t seed, const Tolerance& tol,
                                const ExecPolicy& policy) {
    ConvergenceReport report;
    report.experiment = "laplace:" + model.label() + " vs " + canonical.label();
    for (std::int64_t n : n_schedule) {
        const BlockPlan plan = BlockPlan::with_rule(n, rule, fixed_block_length);
        for (std::size_t i = 0; i < panel.size(); ++i) {
            const TestFunction& f = panel[i];
            const std::string name =
                f.name().empty() ? "f" + std::to_string(i) : f.name();
            const LaplaceFunctionalStat stat =
                laplace_functionals(model, plan, mode, f, reps, seed, policy);
            const MassEstimate target = canonical.laplace(f);
            const MassEstimate nll =
                canonical.neg_log_laplace(f, 0.0, std::numeric_limits<double>::infinity());
            report.rows.push_back(ci_row(
                "laplace", n, name, stat.empirical_laplace,
                stats::normal_ci(stat.empirical_laplace, stat.laplace_se), target.value,
                tol.abs_probability));
            report.rows.push_back(ci_row(
                "laplace_functional", n, name, stat.block_functional,
                stats::normal_ci(stat.block_functional, stat.functional_se), nll.value,
                tol.abs_probability));
        }
    }
    report.metadata["seed"] = seed;
    report.metadata["reps"] = reps;
    report.metadata["mode"] = to_string(mode);
    report.metadata["rule"] = to_string(rule);
    return report;
}

ConvergenceReport check_poisson_iid(const SequenceModel& model,
                                    const std::vector<std::int64_t>& n_schedule,
                                    const std::vector<double>& x_grid, std::int64_t reps,
                                    std::uint64_t seed, const Tolerance& tol,
                                    const ExecPolicy& policy) {
    ConvergenceReport report;
    report.experiment = "poisson_iid:" + model.label();
    if (!model.is_iid()) {
        report.metadata["warning"] =
            "model is not i.i.d.; the Poisson baseline is expected to fail";
    }
    for (std::int64_t n : n_schedule) {
        const BlockPlan plan = BlockPlan::make(n, 1);
        for (double x : x_grid) {
            const double target = std::pow(x, -model.alpha());
            const BlockEventStat stat =
                condition_a_stat(model, plan, ProcessMode::scaled, x, reps, seed, policy);
            report.rows.push_back(ci_row("poisson_intensity", n, x_label(x), stat.statistic,
                                         stat.ci, target, tol.rel_mass * target));

            const auto counts =
                replicate_counts(model, n, ProcessMode::scaled, x, reps, seed, policy);
            const stats::GofResult gof = stats::poisson_gof(counts, target);
            ReportRow gof_row;
            gof_row.check = "poisson_gof";
            gof_row.n = n;
            gof_row.label = x_label(x);
            gof_row.statistic = gof.p_value;
            gof_row.ci_lo = gof.p_value;
            gof_row.ci_hi = gof.p_value;
            gof_row.target = 0.01;
            gof_row.comparison = "greater_than";
            gof_row.pass = gof_row.evaluate();
            report.rows.push_back(gof_row);
        }
        // With unit blocks every qualifying block holds exactly one point.
        const ClusterSizeTable table = cluster_sizes(model, plan, reps, seed, policy);
        ReportRow tv_row;
        tv_row.check = "cluster_sizes_tv";
        tv_row.n = n;
        tv_row.label = "vs delta_1";
        tv_row.statistic = tv_distance(table.pmf, Pmf{{1, 1.0}});
        tv_row.ci_lo = tv_row.ci_hi = tv_row.statistic;
        tv_row.target = 0.1;
        tv_row.comparison = "less_than";
        tv_row.pass = tv_row.evaluate();
        report.rows.push_back(tv_row);
    }
    report.metadata["seed"] = seed;
    report.metadata["reps"] = reps;
    return report;
}

std::vector<TestFunction> default_panel() {
    return {
        TestFunction::trapezoid(0.20, 0.60, 1.0, 0.05, "trap_wide_unit"),
        TestFunction::trapezoid(0.50, 1.00, 0.7, 0.05, "trap_upper_07"),
        TestFunction::trapezoid(0.15, 0.35, 2.0, 0.04, "trap_low_tall"),
        TestFunction::trapezoid(0.30, 0.90, 0.5, 0.10, "trap_broad_low"),
        TestFunction::trapezoid(0.60, 1.00, 1.5, 0.08, "trap_top_tall"),
    };
}

std::vector<ClusterEvent> default_events(double interior_cut) {
    std::vector<ClusterEvent> events;
    for (std::int64_t k = 1; k <= 5; ++k) events.push_back(ClusterEvent::total_count(k));
    events.push_back(
        ClusterEvent::count_at_least(Interval::open_closed(interior_cut, 1.0), 1));
    return events;
}

}  // namespace cluster_limit
