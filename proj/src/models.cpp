#include "cluster_limit/models.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cluster_limit {

namespace {

const std::uint64_t kSaltPath = rng::fnv1a64("sample_path");
const std::uint64_t kSaltAssoc = rng::fnv1a64("assoc_covariance");

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

SequenceModel SequenceModel::iid_pareto(double alpha, double p) {
    if (!(alpha > 0.0)) throw std::invalid_argument("iid_pareto: alpha must be positive");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("iid_pareto: p must be in [0,1]");
    SequenceModel m;
    m.kind_ = Kind::iid_pareto;
    m.alpha_ = alpha;
    m.p_ = p;
    m.burn_in_ = 0;
    m.known_theta_ = 1.0;
    return m;
}

SequenceModel SequenceModel::moving_max(int window, double alpha) {
    if (window < 1) throw std::invalid_argument("moving_max: window must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("moving_max: alpha must be positive");
    SequenceModel m;
    m.kind_ = Kind::moving_max;
    m.alpha_ = alpha;
    m.window_ = window;
    m.burn_in_ = window - 1;
    m.known_theta_ = 1.0 / static_cast<double>(window);
    return m;
}

SequenceModel SequenceModel::ar1(double phi, double alpha) {
    if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("ar1: phi must be in (0,1)");
    if (!(alpha > 0.0)) throw std::invalid_argument("ar1: alpha must be positive");
    SequenceModel m;
    m.kind_ = Kind::ar1;
    m.alpha_ = alpha;
    m.phi_ = phi;
    m.burn_in_ = 1000;
    m.known_theta_ = 1.0 - std::pow(phi, alpha);
    return m;
}

SequenceModel SequenceModel::associated_linear(int depth) {
    if (depth < 1 || depth > 62) {
        throw std::invalid_argument("associated_linear: depth must be in [1,62]");
    }
    SequenceModel m;
    m.kind_ = Kind::associated_linear;
    m.depth_ = depth;
    m.burn_in_ = depth;
    return m;
}

std::string SequenceModel::label() const {
    switch (kind_) {
        case Kind::iid_pareto:
            return "iid_pareto(alpha=" + std::to_string(alpha_) + ",p=" + std::to_string(p_) + ")";
        case Kind::moving_max:
            return "moving_max(m=" + std::to_string(window_) +
                   ",alpha=" + std::to_string(alpha_) + ")";
        case Kind::ar1:
            return "ar1(phi=" + std::to_string(phi_) + ",alpha=" + std::to_string(alpha_) + ")";
        case Kind::associated_linear:
            return "associated_linear(depth=" + std::to_string(depth_) + ")";
    }
    return "unknown";
}

TailProbs SequenceModel::tail(double x) const {
    if (!(x > 0.0)) throw std::invalid_argument("tail: x must be positive");
    TailProbs t;
    switch (kind_) {
        case Kind::iid_pareto: {
            const double two = x <= 1.0 ? 1.0 : std::pow(x, -alpha_);
            t.two_sided = two;
            t.right = p_ * two;
            t.left = (1.0 - p_) * two;
            break;
        }
        case Kind::moving_max: {
            const double z_tail = x <= 1.0 ? 1.0 : std::pow(x, -alpha_);
            const double two = 1.0 - std::pow(1.0 - z_tail, window_);
            t.two_sided = two;
            t.right = two;
            t.left = 0.0;
            break;
        }
        case Kind::ar1: {
            const TailOracle& oracle = TailOracle::for_model(*this);
            t.two_sided = oracle.two_sided(x);
            t.right = oracle.right(x);
            t.left = clamp01(t.two_sided - t.right);
            break;
        }
        case Kind::associated_linear: {
            const double right = clamp01(1.0 - 0.5 * x);
            t.two_sided = right;
            t.right = right;
            t.left = 0.0;
            break;
        }
    }
    return t;
}

LevelResult SequenceModel::invert_tail(std::int64_t n, bool two_sided) const {
    if (n < 1) throw std::invalid_argument("level inversion: n must be >= 1");
    const double target = 1.0 / static_cast<double>(n);
    auto tail_at = [&](double x) {
        const TailProbs t = tail(x);
        return two_sided ? t.two_sided : t.right;
    };

    double lo = 1.0, hi = 1e12;
    const double f_lo = tail_at(lo);
    const double f_hi = tail_at(hi);
    if (f_lo < target) {
        // Level unreachable from the bracket: nearest achievable is lo.
        return {lo, std::abs(static_cast<double>(n) * f_lo - 1.0), false};
    }
    if (f_hi > target) {
        return {hi, std::abs(static_cast<double>(n) * f_hi - 1.0), false};
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (tail_at(mid) >= target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the endpoint with the smaller residual; ties go to lo.
    const double r_lo = std::abs(static_cast<double>(n) * tail_at(lo) - 1.0);
    const double r_hi = std::abs(static_cast<double>(n) * tail_at(hi) - 1.0);
    const double u = r_lo <= r_hi ? lo : hi;
    const double residual = std::min(r_lo, r_hi);
    return {u, residual, residual <= 1e-9};
}

LevelResult SequenceModel::level_u(std::int64_t n) const {
    if (tail(1.0).right <= 0.0) {
        throw std::domain_error("level_u: model has no right tail");
    }
    return invert_tail(n, /*two_sided=*/false);
}

LevelResult SequenceModel::scale_a(std::int64_t n) const { return invert_tail(n, true); }

void SequenceModel::to_json(nlohmann::json& j) const {
    switch (kind_) {
        case Kind::iid_pareto:
            j = nlohmann::json{{"kind", "iid_pareto"}, {"alpha", alpha_}, {"p", p_}};
            break;
        case Kind::moving_max:
            j = nlohmann::json{{"kind", "moving_max"}, {"m", window_}, {"alpha", alpha_}};
            break;
        case Kind::ar1:
            j = nlohmann::json{{"kind", "ar1"}, {"phi", phi_}, {"alpha", alpha_}};
            break;
        case Kind::associated_linear:
            j = nlohmann::json{{"kind", "associated_linear"}, {"depth", depth_}};
            break;
    }
    j["burn_in"] = burn_in_;
}

SequenceModel SequenceModel::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    SequenceModel m;
    if (kind == "iid_pareto") {
        m = iid_pareto(j.at("alpha").get<double>(), j.value("p", 1.0));
    } else if (kind == "moving_max") {
        m = moving_max(j.at("m").get<int>(), j.at("alpha").get<double>());
    } else if (kind == "ar1") {
        m = ar1(j.at("phi").get<double>(), j.at("alpha").get<double>());
    } else if (kind == "associated_linear") {
        m = associated_linear(j.value("depth", 60));
    } else {
        throw std::invalid_argument("SequenceModel: unknown kind '" + kind + "'");
    }
    if (j.contains("burn_in")) m.burn_in_ = j.at("burn_in").get<std::int64_t>();
    return m;
}

// ---------------------------------------------------------------------------
// PathSampler

PathSampler::PathSampler(const SequenceModel& model, rng::Stream stream)
    : model_(model), stream_(stream) {
    switch (model_.kind()) {
        case SequenceModel::Kind::iid_pareto:
            break;
        case SequenceModel::Kind::moving_max: {
            const int m = model_.window();
            ring_.assign(static_cast<std::size_t>(m), 0.0);
            for (int i = 0; i + 1 < m; ++i) {
                ring_[static_cast<std::size_t>(i)] = stream_.pareto(model_.alpha());
            }
            ring_pos_ = static_cast<std::size_t>(m > 1 ? m - 1 : 0);
            break;
        }
        case SequenceModel::Kind::ar1: {
            state_ = draw_signed_pareto(0.5);
            for (std::int64_t i = 0; i < model_.burn_in(); ++i) {
                state_ = model_.phi() * state_ + draw_signed_pareto(0.5);
            }
            break;
        }
        case SequenceModel::Kind::associated_linear: {
            bit_window_ = 0;
            for (int i = 0; i < model_.depth(); ++i) {
                bit_window_ = (bit_window_ >> 1) |
                              (static_cast<std::uint64_t>(stream_.bit()) << model_.depth());
            }
            break;
        }
    }
}

double PathSampler::draw_signed_pareto(double p) {
    const double magnitude = stream_.pareto(model_.alpha());
    if (p >= 1.0) {
        last_innovation_ = magnitude;
        return magnitude;
    }
    const bool positive = stream_.uniform_open() < p;
    last_innovation_ = positive ? magnitude : -magnitude;
    return last_innovation_;
}

double PathSampler::next() {
    switch (model_.kind()) {
        case SequenceModel::Kind::iid_pareto:
            return draw_signed_pareto(model_.sign_weight());
        case SequenceModel::Kind::moving_max: {
            const double z = stream_.pareto(model_.alpha());
            last_innovation_ = z;
            ring_[ring_pos_] = z;
            ring_pos_ = (ring_pos_ + 1) % ring_.size();
            double top = ring_[0];
            for (std::size_t i = 1; i < ring_.size(); ++i) top = std::max(top, ring_[i]);
            return top;
        }
        case SequenceModel::Kind::ar1: {
            const double eps = draw_signed_pareto(0.5);
            state_ = model_.phi() * state_ + eps;
            return state_;
        }
        case SequenceModel::Kind::associated_linear: {
            const std::uint64_t bit = stream_.bit() ? 1u : 0u;
            last_innovation_ = static_cast<double>(bit);
            bit_window_ = (bit_window_ >> 1) | (bit << model_.depth());
            return std::ldexp(static_cast<double>(bit_window_), -model_.depth());
        }
    }
    throw std::logic_error("PathSampler: unreachable");
}

std::vector<double> sample_path(const SequenceModel& model, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_path: n must be >= 1");
    PathSampler sampler(model, rng::Stream(seed, kSaltPath, 0));
    std::vector<double> path(static_cast<std::size_t>(n));
    for (auto& v : path) v = sampler.next();
    return path;
}

PathWithInnovations sample_path_with_innovations(const SequenceModel& model, std::int64_t n,
                                                 std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_path_with_innovations: n must be >= 1");
    PathWithInnovations out;
    out.path.reserve(static_cast<std::size_t>(n));

    PathSampler sampler(model, rng::Stream(seed, kSaltPath, 0));
    if (model.kind() == SequenceModel::Kind::moving_max) {
        // Burn-in innovations Z_{2-m}, ..., Z_0 come from an identical shadow
        // stream; with them, path[j] = max(innovations[j .. j+m-1]).
        rng::Stream shadow(seed, kSaltPath, 0);
        for (int i = 0; i + 1 < model.window(); ++i) {
            out.innovations.push_back(shadow.pareto(model.alpha()));
        }
    } else if (model.kind() == SequenceModel::Kind::ar1) {
        out.initial_state = sampler.state();
    }
    for (std::int64_t j = 0; j < n; ++j) {
        out.path.push_back(sampler.next());
        out.innovations.push_back(sampler.last_innovation());
    }
    return out;
}

// ---------------------------------------------------------------------------
// TailOracle

TailOracle TailOracle::build(const SequenceModel& model, std::int64_t draws, std::uint64_t seed) {
    if (draws < 10000) throw std::invalid_argument("TailOracle: too few draws");
    TailOracle oracle;
    oracle.alpha_ = model.alpha();
    oracle.draws_ = draws;
    oracle.seed_ = seed;

    PathSampler sampler(model, rng::Stream(seed, rng::fnv1a64("tail_oracle"), 0));
    std::vector<double> values(static_cast<std::size_t>(draws));
    for (auto& v : values) v = sampler.next();

    std::vector<double> magnitudes(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) magnitudes[i] = std::abs(values[i]);
    std::sort(magnitudes.begin(), magnitudes.end());
    std::vector<double> sorted_values = values;
    std::sort(sorted_values.begin(), sorted_values.end());

    // The grid stops at the 1e-3 level (>= 10^4 hits per point at the default
    // draw count); deeper levels come from the anchored power law, which is
    // more accurate there than raw counts.
    const double n = static_cast<double>(draws);
    const double floor_level = std::max(1e-3, 100.0 / n);
    std::vector<double> levels;
    for (double level = 0.95; level > floor_level; level *= std::pow(10.0, -0.25)) {
        levels.push_back(level);
    }
    levels.push_back(floor_level);

    for (double level : levels) {
        auto idx = static_cast<std::size_t>(std::min<double>(
            n - 1.0, std::floor((1.0 - level) * n)));
        const double x = magnitudes[idx];
        if (!oracle.grid_.empty() && x <= oracle.grid_.back()) continue;
        const auto above = magnitudes.end() -
                           std::upper_bound(magnitudes.begin(), magnitudes.end(), x);
        const auto right = sorted_values.end() -
                           std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
        const double t_two = static_cast<double>(above) / n;
        const double t_right = static_cast<double>(right) / n;
        if (t_two <= 0.0) break;
        oracle.grid_.push_back(x);
        oracle.tail_two_.push_back(t_two);
        oracle.tail_right_.push_back(t_right);
        oracle.ci_half_.push_back(stats::kZ99 * std::sqrt(t_two * (1.0 - t_two) / n));
    }
    if (oracle.grid_.size() < 4) throw std::runtime_error("TailOracle: degenerate grid");
    return oracle;
}

const TailOracle& TailOracle::for_model(const SequenceModel& model) {
    static std::map<std::string, TailOracle> cache;
    static std::mutex mutex;
    nlohmann::json j;
    model.to_json(j);
    const std::string key = j.dump();
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, build(model, kDefaultDraws, kOracleSeed)).first;
    }
    return it->second;
}

double TailOracle::eval(const std::vector<double>& grid, const std::vector<double>& tail,
                        double x, double alpha) {
    if (x <= grid.front()) return tail.front();
    if (x >= grid.back()) {
        // Anchored power-law extrapolation with the model's known index.
        return tail.back() * std::pow(x / grid.back(), -alpha);
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const auto hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    if (tail[hi] <= 0.0 || tail[lo] <= 0.0) return tail[hi];
    const double t = (std::log(x) - std::log(grid[lo])) / (std::log(grid[hi]) - std::log(grid[lo]));
    return std::exp(std::log(tail[lo]) + t * (std::log(tail[hi]) - std::log(tail[lo])));
}

double TailOracle::two_sided(double x) const { return eval(grid_, tail_two_, x, alpha_); }

double TailOracle::right(double x) const { return eval(grid_, tail_right_, x, alpha_); }

void TailOracle::to_json(nlohmann::json& j) const {
    j = nlohmann::json{{"x_grid", grid_},        {"tail_two_sided", tail_two_},
                       {"tail_right", tail_right_}, {"ci_half_width", ci_half_},
                       {"alpha", alpha_},        {"draws", draws_},
                       {"oracle_seed", seed_}};
}

TailOracle TailOracle::from_json(const nlohmann::json& j) {
    TailOracle oracle;
    oracle.grid_ = j.at("x_grid").get<std::vector<double>>();
    oracle.tail_two_ = j.at("tail_two_sided").get<std::vector<double>>();
    oracle.tail_right_ = j.at("tail_right").get<std::vector<double>>();
    oracle.ci_half_ = j.at("ci_half_width").get<std::vector<double>>();
    oracle.alpha_ = j.at("alpha").get<double>();
    oracle.draws_ = j.at("draws").get<std::int64_t>();
    oracle.seed_ = j.at("oracle_seed").get<std::uint64_t>();
    return oracle;
}

// ---------------------------------------------------------------------------
// Association diagnostic

AssocBound assoc_covariance_bound(const SequenceModel& model, std::int64_t n, std::int64_t m,
                                  std::int64_t reps, std::uint64_t seed,
                                  const ExecPolicy& policy) {
    if (n < 2) throw std::invalid_argument("assoc_covariance_bound: n must be >= 2");
    if (m < 0 || m >= n) throw std::invalid_argument("assoc_covariance_bound: need 0 <= m < n");
    if (reps < 100) {
        throw std::invalid_argument("assoc_covariance_bound: reps must be >= 100 for a CI");
    }

    const double u = model.level_u(n).value;
    std::int64_t max_lag;
    if (model.kind() == SequenceModel::Kind::associated_linear) {
        max_lag = std::min<std::int64_t>(n - 1, model.depth() + 1);
    } else {
        max_lag = std::min<std::int64_t>(n - 1, 64);
    }

    struct Slot {
        std::vector<std::int64_t> joint;  // joint exceedances per lag
        std::int64_t exceed = 0;
        double partial = 0.0;  // n * sum_{lag >= m+?} joint/(n-lag), filled later
    };
    std::vector<Slot> slots(static_cast<std::size_t>(reps));

    for_each_index(reps, policy, [&](std::int64_t r) {
        Slot& slot = slots[static_cast<std::size_t>(r)];
        slot.joint.assign(static_cast<std::size_t>(max_lag) + 1, 0);
        PathSampler sampler(model, rng::Stream(seed, kSaltAssoc, static_cast<std::uint64_t>(r)));
        std::vector<std::uint8_t> recent(static_cast<std::size_t>(max_lag), 0);
        for (std::int64_t j = 0; j < n; ++j) {
            const bool hit = sampler.next() > u;
            if (hit) {
                ++slot.exceed;
                const std::int64_t reach = std::min<std::int64_t>(j, max_lag);
                for (std::int64_t lag = 1; lag <= reach; ++lag) {
                    const auto idx = static_cast<std::size_t>((j - lag) % max_lag);
                    slot.joint[static_cast<std::size_t>(lag)] += recent[idx];
                }
            }
            recent[static_cast<std::size_t>(j % max_lag)] = hit ? 1 : 0;
        }
    });

    const double n_real = static_cast<double>(n);
    std::vector<std::int64_t> joint_total(static_cast<std::size_t>(max_lag) + 1, 0);
    std::int64_t exceed_total = 0;
    for (const auto& slot : slots) {
        exceed_total += slot.exceed;
        for (std::size_t lag = 1; lag < joint_total.size(); ++lag) {
            joint_total[lag] += slot.joint[lag];
        }
    }
    const std::int64_t single_trials = reps * n;
    const double p_single = static_cast<double>(exceed_total) / static_cast<double>(single_trials);
    const stats::CI single_ci = stats::wilson_ci(exceed_total, single_trials);
    const double single_half = 0.5 * (single_ci.hi - single_ci.lo);

    AssocBound out;
    out.max_lag = max_lag;
    out.threshold = u;
    out.lags.reserve(static_cast<std::size_t>(max_lag));
    for (std::int64_t lag = 1; lag <= max_lag; ++lag) {
        const std::int64_t trials = reps * (n - lag);
        const std::int64_t successes = joint_total[static_cast<std::size_t>(lag)];
        const double p_joint = static_cast<double>(successes) / static_cast<double>(trials);
        const stats::CI joint_ci = stats::wilson_ci(successes, trials);
        const double half =
            0.5 * (joint_ci.hi - joint_ci.lo) + 2.0 * p_single * single_half;
        out.lags.push_back({lag, p_joint - p_single * p_single, half});
    }

    // Partial sum over lags >= m (pairs (1, j) with j >= m+1), from
    // per-replicate totals so the CI reflects replicate-level scatter.
    stats::MeanAccumulator acc;
    for (auto& slot : slots) {
        double t = 0.0;
        for (std::int64_t lag = std::max<std::int64_t>(1, m); lag <= max_lag; ++lag) {
            t += static_cast<double>(slot.joint[static_cast<std::size_t>(lag)]) /
                 static_cast<double>(n - lag);
        }
        slot.partial = n_real * t;
        acc.add(slot.partial);
    }
    const double lags_used =
        static_cast<double>(max_lag - std::max<std::int64_t>(1, m) + 1);
    out.partial_sum = acc.mean() - n_real * lags_used * p_single * p_single;
    out.se = acc.standard_error();
    out.ci = stats::normal_ci(out.partial_sum, out.se);
    return out;
}

}  // namespace cluster_limit
