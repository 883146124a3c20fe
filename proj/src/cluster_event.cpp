#include "cluster_limit/cluster_event.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace cluster_limit {

ClusterEvent ClusterEvent::total_count(std::int64_t k) {
    if (k < 0) throw std::invalid_argument("ClusterEvent: total count must be >= 0");
    ClusterEvent e;
    e.total_ = k;
    return e;
}

ClusterEvent ClusterEvent::count_at_least(Interval where, std::int64_t at_least) {
    if (at_least < 1) throw std::invalid_argument("ClusterEvent: count bound must be >= 1");
    if (where.empty()) throw std::invalid_argument("ClusterEvent: empty interval");
    ClusterEvent e;
    e.terms_.push_back({where, at_least});
    return e;
}

ClusterEvent ClusterEvent::and_also(const ClusterEvent& other) const {
    ClusterEvent e = *this;
    if (other.total_) {
        if (e.total_ && *e.total_ != *other.total_) {
            throw std::invalid_argument("ClusterEvent: conflicting total-count terms");
        }
        e.total_ = other.total_;
    }
    e.terms_.insert(e.terms_.end(), other.terms_.begin(), other.terms_.end());
    return e;
}

bool ClusterEvent::contains(const PointMeasure& mu) const {
    if (total_ && mu.total_count() != *total_) return false;
    for (const auto& term : terms_) {
        std::int64_t c = 0;
        for (const auto& atom : mu.atoms()) {
            if (term.where.contains(atom.location)) c += atom.multiplicity;
        }
        if (c < term.at_least) return false;
    }
    return true;
}

bool ClusterEvent::avoids_fixed_atoms(const std::vector<double>& fixed_moduli) const {
    for (const auto& term : terms_) {
        for (double d : fixed_moduli) {
            if (std::abs(term.where.lo) == d || std::abs(term.where.hi) == d) return false;
        }
    }
    return true;
}

std::string ClusterEvent::label() const {
    if (is_always()) return "always";
    std::string out;
    if (total_) out = "count=" + std::to_string(*total_);
    for (const auto& term : terms_) {
        if (!out.empty()) out += " & ";
        out += "count" + term.where.str() + ">=" + std::to_string(term.at_least);
    }
    return out;
}

void ClusterEvent::to_json(nlohmann::json& j) const {
    j = nlohmann::json::object();
    if (total_) j["total"] = *total_;
    if (!terms_.empty()) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& term : terms_) {
            terms.push_back({{"lo", term.where.lo},
                             {"hi", term.where.hi},
                             {"lo_closed", term.where.lo_closed},
                             {"hi_closed", term.where.hi_closed},
                             {"at_least", term.at_least}});
        }
        j["count_at_least"] = terms;
    }
}

ClusterEvent ClusterEvent::from_json(const nlohmann::json& j) {
    ClusterEvent e;
    if (j.contains("total")) e = total_count(j.at("total").get<std::int64_t>());
    if (j.contains("count_at_least")) {
        for (const auto& term : j.at("count_at_least")) {
            Interval where{term.at("lo").get<double>(), term.at("hi").get<double>(),
                           term.value("lo_closed", false), term.value("hi_closed", true)};
            e = e.and_also(count_at_least(where, term.at("at_least").get<std::int64_t>()));
        }
    }
    return e;
}

}  // namespace cluster_limit
