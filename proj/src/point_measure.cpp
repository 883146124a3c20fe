#include "cluster_limit/point_measure.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cluster_limit {

PointMeasure::PointMeasure(SpaceSpec space, std::vector<Atom> atoms) : space_(space) {
    for (const auto& atom : atoms) {
        if (std::isnan(atom.location)) {
            throw std::invalid_argument("PointMeasure: NaN atom location");
        }
        if (std::isinf(atom.location)) {
            throw std::invalid_argument("PointMeasure: atoms at +-infinity are not allowed");
        }
        if (!space_.contains(atom.location)) {
            throw std::invalid_argument("PointMeasure: atom location outside the space");
        }
        if (atom.multiplicity < 1) {
            throw std::invalid_argument("PointMeasure: multiplicities must be >= 1");
        }
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    atoms_.reserve(atoms.size());
    for (const auto& atom : atoms) {
        if (!atoms_.empty() && atoms_.back().location == atom.location) {
            atoms_.back().multiplicity += atom.multiplicity;
        } else {
            atoms_.push_back(atom);
        }
    }
}

std::int64_t PointMeasure::total_count() const {
    std::int64_t total = 0;
    for (const auto& atom : atoms_) total += atom.multiplicity;
    return total;
}

std::int64_t PointMeasure::count(const IntervalUnion& b) const {
    for (const auto& part : b.parts) {
        if (std::isnan(part.lo) || std::isnan(part.hi)) {
            throw std::domain_error("count: NaN interval endpoint");
        }
        if (!space_.closure_contains(part.lo) || !space_.closure_contains(part.hi)) {
            throw std::domain_error("count: interval endpoint outside the space closure: " +
                                    part.str());
        }
    }
    std::int64_t total = 0;
    for (const auto& atom : atoms_) {
        if (b.contains(atom.location)) total += atom.multiplicity;
    }
    return total;
}

double PointMeasure::sup_modulus() const {
    if (atoms_.empty()) {
        throw std::domain_error("Phi undefined on null measure");
    }
    return std::max(std::abs(atoms_.front().location), std::abs(atoms_.back().location));
}

bool PointMeasure::exceeds_modulus(double x) const {
    if (!(x > 0.0)) throw std::invalid_argument("exceeds_modulus: x must be positive");
    if (atoms_.empty()) return false;
    return sup_modulus() > x;
}

double PointMeasure::pair(const TestFunction& f) const {
    double total = 0.0;
    for (const auto& atom : atoms_) {
        total += static_cast<double>(atom.multiplicity) * f(atom.location);
    }
    return total;
}

PointMeasure PointMeasure::rescaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw std::invalid_argument("rescaled: factor must be a positive real");
    }
    std::vector<Atom> moved;
    moved.reserve(atoms_.size());
    bool fits = true;
    for (const auto& atom : atoms_) {
        const double loc = atom.location * factor;
        if (!space_.contains(loc)) fits = false;
        moved.push_back({loc, atom.multiplicity});
    }
    if (fits) return PointMeasure(space_, std::move(moved));
    if (!space_.unbounded()) {
        throw std::domain_error("rescaled: atom leaves a bounded space");
    }
    // Unbounded space with a positive inner bound: fall back to the fully
    // punctured variant on the same sides.
    SpaceSpec widened(space_.side(), 0.0, space_.outer());
    return PointMeasure(widened, std::move(moved));
}

PointMeasure PointMeasure::normalized_by_max() const {
    const double top = sup_modulus();  // throws on the null measure
    std::vector<Atom> moved;
    moved.reserve(atoms_.size());
    for (const auto& atom : atoms_) {
        double loc = atom.location / top;
        moved.push_back({loc, atom.multiplicity});
    }
    SpaceSpec target = space_;
    for (const auto& atom : moved) {
        if (!target.contains(atom.location)) {
            if (!space_.unbounded() && space_.outer() < 1.0) {
                throw std::domain_error("normalized_by_max: shape leaves the space");
            }
            target = SpaceSpec(space_.side(), 0.0,
                               std::max(space_.outer(), 1.0));
            break;
        }
    }
    return PointMeasure(target, std::move(moved));
}

bool PointMeasure::is_normalized_shape() const {
    if (atoms_.empty()) return false;
    bool has_unit = false;
    for (const auto& atom : atoms_) {
        const double m = std::abs(atom.location);
        if (m > 1.0) return false;
        if (m == 1.0) has_unit = true;
    }
    return has_unit;
}

PointMeasure superpose(const PointMeasure& a, const PointMeasure& b) {
    if (!(a.space() == b.space())) {
        throw std::invalid_argument("superpose: space mismatch");
    }
    std::vector<PointMeasure::Atom> merged = a.atoms();
    merged.insert(merged.end(), b.atoms().begin(), b.atoms().end());
    return PointMeasure(a.space(), std::move(merged));
}

void PointMeasure::to_json(nlohmann::json& j) const {
    nlohmann::json space;
    space_.to_json(space);
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& atom : atoms_) {
        atoms.push_back(nlohmann::json::array({atom.location, atom.multiplicity}));
    }
    j = nlohmann::json{{"space", space}, {"atoms", atoms}};
}

PointMeasure PointMeasure::from_json(const nlohmann::json& j) {
    SpaceSpec space = SpaceSpec::from_json(j.at("space"));
    std::vector<Atom> atoms;
    for (const auto& entry : j.at("atoms")) {
        atoms.push_back({entry.at(0).get<double>(), entry.at(1).get<std::int64_t>()});
    }
    return PointMeasure(space, std::move(atoms));
}

}  // namespace cluster_limit
