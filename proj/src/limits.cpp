#include "cluster_limit/limits.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cluster_limit/quadrature.hpp"

namespace cluster_limit {

// ---------------------------------------------------------------------------
// ClusterSizeDist

ClusterSizeDist ClusterSizeDist::dirac(std::int64_t k) {
    if (k < 1) throw std::invalid_argument("ClusterSizeDist: k must be >= 1");
    std::vector<double> pmf(static_cast<std::size_t>(k), 0.0);
    pmf.back() = 1.0;
    return finite(std::move(pmf));
}

ClusterSizeDist ClusterSizeDist::finite(std::vector<double> pmf) {
    if (pmf.empty()) throw std::invalid_argument("ClusterSizeDist: empty pmf");
    double sum = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument("ClusterSizeDist: pmf entries must be finite and >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("ClusterSizeDist: pmf must sum to 1");
    }
    ClusterSizeDist d;
    d.table_ = std::move(pmf);
    return d;
}

ClusterSizeDist ClusterSizeDist::geometric(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("ClusterSizeDist: geometric rho must be in (0,1)");
    }
    ClusterSizeDist d;
    d.is_geometric_ = true;
    d.rho_ = rho;
    return d;
}

double ClusterSizeDist::pmf(std::int64_t k) const {
    if (k < 1) return 0.0;
    if (is_geometric_) return (1.0 - rho_) * std::pow(rho_, static_cast<double>(k - 1));
    const auto idx = static_cast<std::size_t>(k - 1);
    return idx < table_.size() ? table_[idx] : 0.0;
}

double ClusterSizeDist::prob_at_least(std::int64_t k) const {
    if (k <= 1) return 1.0;
    if (is_geometric_) return std::pow(rho_, static_cast<double>(k - 1));
    double tail = 0.0;
    for (std::size_t i = static_cast<std::size_t>(k - 1); i < table_.size(); ++i) tail += table_[i];
    return tail;
}

double ClusterSizeDist::pgf(double z) const {
    if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("pgf: z must be in [0,1]");
    if (is_geometric_) return (1.0 - rho_) * z / (1.0 - rho_ * z);
    double total = 0.0;
    double zk = 1.0;
    for (double p : table_) {
        zk *= z;
        total += p * zk;
    }
    return total;
}

std::int64_t ClusterSizeDist::sample(rng::Stream& stream) const {
    const double u = stream.uniform_open();
    if (is_geometric_) {
        return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log(rho_)));
    }
    double cdf = 0.0;
    for (std::size_t i = 0; i < table_.size(); ++i) {
        cdf += table_[i];
        if (u <= cdf) return static_cast<std::int64_t>(i) + 1;
    }
    return static_cast<std::int64_t>(table_.size());
}

std::int64_t ClusterSizeDist::enumeration_bound(double tol) const {
    if (!is_geometric_) return static_cast<std::int64_t>(table_.size());
    return 1 + static_cast<std::int64_t>(std::ceil(std::log(tol) / std::log(rho_)));
}

double ClusterSizeDist::mean() const {
    if (is_geometric_) return 1.0 / (1.0 - rho_);
    double m = 0.0;
    for (std::size_t i = 0; i < table_.size(); ++i) {
        m += static_cast<double>(i + 1) * table_[i];
    }
    return m;
}

void ClusterSizeDist::to_json(nlohmann::json& j) const {
    if (is_geometric_) {
        j = nlohmann::json{{"kind", "geometric"}, {"rho", rho_}};
    } else {
        j = nlohmann::json{{"kind", "finite"}, {"pmf", table_}};
    }
}

ClusterSizeDist ClusterSizeDist::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "geometric") return geometric(j.at("rho").get<double>());
    if (kind == "finite") return finite(j.at("pmf").get<std::vector<double>>());
    throw std::invalid_argument("ClusterSizeDist: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// ClusterShapeDist

ClusterShapeDist ClusterShapeDist::atom_multiplicity(ClusterSizeDist sizes) {
    ClusterShapeDist q;
    q.sizes_ = std::move(sizes);
    return q;
}

ClusterShapeDist ClusterShapeDist::empirical(std::vector<PointMeasure> shapes) {
    if (shapes.empty()) throw std::invalid_argument("ClusterShapeDist: empty shape sample");
    for (const auto& shape : shapes) {
        if (!shape.is_normalized_shape()) {
            throw std::invalid_argument("ClusterShapeDist: shape outside the normalized class");
        }
    }
    ClusterShapeDist q;
    q.empirical_ = true;
    q.shapes_ = std::move(shapes);
    return q;
}

PointMeasure ClusterShapeDist::sample(rng::Stream& stream) const {
    if (empirical_) {
        const double u = stream.uniform_halfopen();
        auto idx = static_cast<std::size_t>(u * static_cast<double>(shapes_.size()));
        if (idx >= shapes_.size()) idx = shapes_.size() - 1;
        return shapes_[idx];
    }
    const std::int64_t k = sizes_.sample(stream);
    return PointMeasure::dirac(SpaceSpec::punctured_line(), 1.0, k);
}

void ClusterShapeDist::for_each_weighted_shape(
    const std::function<void(double, const PointMeasure&)>& fn, double tol) const {
    if (empirical_) {
        const double w = 1.0 / static_cast<double>(shapes_.size());
        for (const auto& shape : shapes_) fn(w, shape);
        return;
    }
    const std::int64_t bound = sizes_.enumeration_bound(tol);
    for (std::int64_t k = 1; k <= bound; ++k) {
        const double w = sizes_.pmf(k);
        if (w <= 0.0) continue;
        fn(w, PointMeasure::dirac(SpaceSpec::punctured_line(), 1.0, k));
    }
}

void ClusterShapeDist::to_json(nlohmann::json& j) const {
    if (empirical_) {
        nlohmann::json shapes = nlohmann::json::array();
        for (const auto& shape : shapes_) {
            nlohmann::json s;
            shape.to_json(s);
            shapes.push_back(std::move(s));
        }
        j = nlohmann::json{{"kind", "empirical"}, {"shapes", shapes}};
    } else {
        nlohmann::json sizes;
        sizes_.to_json(sizes);
        j = nlohmann::json{{"kind", "atom_multiplicity"}, {"sizes", sizes}};
    }
}

ClusterShapeDist ClusterShapeDist::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "atom_multiplicity") {
        return atom_multiplicity(ClusterSizeDist::from_json(j.at("sizes")));
    }
    if (kind == "empirical") {
        std::vector<PointMeasure> shapes;
        for (const auto& s : j.at("shapes")) shapes.push_back(PointMeasure::from_json(s));
        return empirical(std::move(shapes));
    }
    throw std::invalid_argument("ClusterShapeDist: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// CanonicalMeasure

CanonicalMeasure CanonicalMeasure::compound_poisson_uniform(double rate, ClusterSizeDist sizes) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("CanonicalMeasure: rate must be a positive real");
    }
    CanonicalMeasure c;
    c.variant_ = Variant::compound_poisson_uniform;
    c.rate_ = rate;
    c.sizes_ = std::move(sizes);
    return c;
}

CanonicalMeasure CanonicalMeasure::regvar_cluster(double theta, double alpha,
                                                  ClusterShapeDist shapes) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("CanonicalMeasure: theta must be in (0,1]");
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("CanonicalMeasure: alpha must be a positive real");
    }
    CanonicalMeasure c;
    c.variant_ = Variant::regvar_cluster;
    c.theta_ = theta;
    c.alpha_ = alpha;
    c.shapes_ = std::move(shapes);
    return c;
}

std::string CanonicalMeasure::label() const {
    if (variant_ == Variant::compound_poisson_uniform) {
        return "compound_poisson_uniform(a=" + std::to_string(rate_) + ")";
    }
    return "regvar_cluster(theta=" + std::to_string(theta_) +
           ",alpha=" + std::to_string(alpha_) + ")";
}

std::vector<double> CanonicalMeasure::fixed_moduli() const {
    std::vector<double> out;
    for (double d : fixed_atoms_) out.push_back(std::abs(d));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool CanonicalMeasure::is_fixed_modulus(double x) const {
    for (double d : fixed_atoms_) {
        if (std::abs(d) == x) return true;
    }
    return false;
}

SpaceSpec CanonicalMeasure::target_space() const {
    return variant_ == Variant::compound_poisson_uniform ? SpaceSpec::unit_interval()
                                                         : SpaceSpec::punctured_line();
}

double CanonicalMeasure::tail_mass(double x) const {
    if (!(x > 0.0)) throw std::invalid_argument("tail_mass: x must be positive");
    if (variant_ == Variant::compound_poisson_uniform) {
        return rate_ * std::max(0.0, 1.0 - x);
    }
    return theta_ * std::pow(x, -alpha_);
}

MassEstimate CanonicalMeasure::cluster_mass(double x, const ClusterEvent& event) const {
    if (!(x > 0.0)) throw std::invalid_argument("cluster_mass: x must be positive");
    if (!event.avoids_fixed_atoms(fixed_moduli())) {
        throw std::invalid_argument("cluster_mass: event endpoint sits on a fixed atom");
    }

    if (variant_ == Variant::compound_poisson_uniform) {
        // K(y, .) charges the single shape k * delta_y; the y-set where the
        // event holds is an interval intersection, so the mass is exact.
        double total = 0.0;
        const std::int64_t bound = sizes_.enumeration_bound();
        for (std::int64_t k = 1; k <= bound; ++k) {
            const double w = sizes_.pmf(k);
            if (w <= 0.0) continue;
            if (event.total() && *event.total() != k) continue;
            double lo = std::max(x, 0.0), hi = 1.0;
            bool possible = true;
            for (const auto& term : event.terms()) {
                if (k < term.at_least) {
                    possible = false;
                    break;
                }
                lo = std::max(lo, term.where.lo);
                hi = std::min(hi, term.where.hi);
            }
            if (!possible) continue;
            total += w * rate_ * std::max(0.0, hi - lo);
        }
        return {total, 0.0};
    }

    // regvar_cluster: integrate K(y, event) against nu exactly, shape by
    // shape. Event membership of the rescaled shape is piecewise constant in
    // y; breakpoints occur where an atom crosses a term endpoint.
    double total = 0.0;
    shapes_.for_each_weighted_shape([&](double w, const PointMeasure& shape) {
        const std::int64_t shape_total = shape.total_count();
        if (event.total() && *event.total() != shape_total) return;
        std::vector<double> cuts{x};
        for (const auto& term : event.terms()) {
            for (const auto& atom : shape.atoms()) {
                for (double endpoint : {term.where.lo, term.where.hi}) {
                    if (endpoint == 0.0 || std::isinf(endpoint)) continue;
                    const double y = endpoint / atom.location;
                    if (y > x && std::isfinite(y)) cuts.push_back(y);
                }
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        auto holds_at = [&](double y) {
            for (const auto& term : event.terms()) {
                std::int64_t c = 0;
                for (const auto& atom : shape.atoms()) {
                    if (term.where.contains(y * atom.location)) c += atom.multiplicity;
                }
                if (c < term.at_least) return false;
            }
            return true;
        };
        auto nu_of = [&](double lo, double hi) {
            const double upper = std::isinf(hi) ? 0.0 : std::pow(hi, -alpha_);
            return theta_ * (std::pow(lo, -alpha_) - upper);
        };

        for (std::size_t i = 0; i < cuts.size(); ++i) {
            const double lo = cuts[i];
            const double hi =
                i + 1 < cuts.size() ? cuts[i + 1] : std::numeric_limits<double>::infinity();
            const double mid = std::isinf(hi) ? 2.0 * lo + 1.0 : 0.5 * (lo + hi);
            if (holds_at(mid)) total += w * nu_of(lo, hi);
        }
    });
    return {total, 0.0};
}

MassEstimate CanonicalMeasure::neg_log_laplace(const TestFunction& f, double y_lo,
                                               double y_hi) const {
    if (!(y_lo >= 0.0) || !(y_hi > y_lo)) {
        throw std::invalid_argument("neg_log_laplace: need 0 <= y_lo < y_hi");
    }
    if (f.is_zero()) return {0.0, 0.0};
    constexpr double kTol = 1e-10;

    if (variant_ == Variant::compound_poisson_uniform) {
        const double lo = std::max(y_lo, 0.0);
        const double hi = std::min(y_hi, 1.0);
        if (!(lo < hi)) return {0.0, 0.0};
        const double value = rate_ * quadrature::integrate(
                                         [&](double y) { return 1.0 - sizes_.pgf(std::exp(-f(y))); },
                                         lo, hi, kTol / std::max(1.0, rate_), f.breakpoints());
        return {value, 0.0};
    }

    // regvar_cluster. Substituting u = y^-alpha turns nu into theta * du, so
    // the kernel integral is free of endpoint singularities for every alpha:
    //   int_lo^hi g(y) theta alpha y^-alpha-1 dy = theta int g(u^-1/alpha) du.
    const double s = f.inner_gap();
    double total = 0.0;
    double shape_count = 0.0;
    shapes_.for_each_weighted_shape([&](double w, const PointMeasure&) {
        (void)w;
        shape_count += 1.0;
    });
    const double tol = kTol / std::max(1.0, shape_count);

    shapes_.for_each_weighted_shape([&](double w, const PointMeasure& shape) {
        const double lo = std::max(y_lo, s);  // pair vanishes for y <= s
        const double hi = y_hi;
        if (!(lo < hi)) return;
        const double u_hi = std::pow(lo, -alpha_);
        const double u_lo = std::isinf(hi) ? 0.0 : std::pow(hi, -alpha_);
        if (!(u_lo < u_hi)) return;

        std::vector<double> cuts;
        for (const auto& atom : shape.atoms()) {
            for (double b : f.breakpoints()) {
                const double y = b / atom.location;
                if (y > 0.0 && std::isfinite(y)) {
                    const double u = std::pow(y, -alpha_);
                    if (u > u_lo && u < u_hi) cuts.push_back(u);
                }
            }
        }
        auto pair_at = [&](double u) {
            const double y = std::pow(u, -1.0 / alpha_);
            double sum = 0.0;
            for (const auto& atom : shape.atoms()) {
                sum += static_cast<double>(atom.multiplicity) * f(y * atom.location);
            }
            return sum;
        };
        total += w * theta_ *
                 quadrature::integrate([&](double u) { return -std::expm1(-pair_at(u)); }, u_lo,
                                       u_hi, tol / std::max(1.0, theta_), cuts);
    });
    return {total, 0.0};
}

MassEstimate CanonicalMeasure::laplace(const TestFunction& f) const {
    const MassEstimate nll =
        neg_log_laplace(f, 0.0, std::numeric_limits<double>::infinity());
    const double value = std::exp(-nll.value);
    return {value, value * nll.ci_half_width};
}

double CanonicalMeasure::void_probability(double x) const {
    if (!(x > 0.0)) throw std::invalid_argument("void_probability: x must be positive");
    if (is_fixed_modulus(x)) {
        throw std::domain_error("void_probability: fixed atom at boundary");
    }
    return std::exp(-tail_mass(x));
}

SampleDetail CanonicalMeasure::sample_detailed(double eps, rng::Stream& stream) const {
    if (!(eps > 0.0)) throw std::invalid_argument("sample: eps must be positive");
    if (variant_ == Variant::compound_poisson_uniform && !(eps < 1.0)) {
        throw std::invalid_argument("sample: eps must be < 1 for the compound Poisson variant");
    }

    const double mass = tail_mass(eps);
    const std::int64_t clusters = stream.poisson(mass);

    SampleDetail detail{PointMeasure(target_space()), {}, {}};
    std::vector<PointMeasure::Atom> atoms;
    for (std::int64_t c = 0; c < clusters; ++c) {
        double y;
        PointMeasure cluster(target_space());
        if (variant_ == Variant::compound_poisson_uniform) {
            y = eps + stream.uniform_open() * (1.0 - eps);
            cluster = PointMeasure::dirac(target_space(), y, sizes_.sample(stream));
        } else {
            y = eps * std::pow(stream.uniform_open(), -1.0 / alpha_);
            cluster = shapes_.sample(stream).rescaled(y);
        }
        for (const auto& atom : cluster.atoms()) atoms.push_back(atom);
        detail.clusters.push_back(std::move(cluster));
        detail.positions.push_back(y);
    }
    detail.process = PointMeasure(target_space(), std::move(atoms));
    return detail;
}

PointMeasure CanonicalMeasure::sample(double eps, rng::Stream& stream) const {
    return sample_detailed(eps, stream).process;
}

void CanonicalMeasure::to_json(nlohmann::json& j) const {
    if (variant_ == Variant::compound_poisson_uniform) {
        nlohmann::json pi;
        sizes_.to_json(pi);
        j = nlohmann::json{{"variant", "compound_poisson_uniform"}, {"a", rate_}, {"pi", pi}};
    } else {
        nlohmann::json q;
        shapes_.to_json(q);
        j = nlohmann::json{
            {"variant", "regvar_cluster"}, {"theta", theta_}, {"alpha", alpha_}, {"Q", q}};
    }
}

CanonicalMeasure CanonicalMeasure::from_json(const nlohmann::json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "compound_poisson_uniform") {
        return compound_poisson_uniform(j.at("a").get<double>(),
                                        ClusterSizeDist::from_json(j.at("pi")));
    }
    if (variant == "regvar_cluster") {
        return regvar_cluster(j.at("theta").get<double>(), j.at("alpha").get<double>(),
                              ClusterShapeDist::from_json(j.at("Q")));
    }
    throw std::invalid_argument("CanonicalMeasure: unknown variant '" + variant + "'");
}

}  // namespace cluster_limit
