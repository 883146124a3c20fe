#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cluster_limit/interval.hpp"
#include "cluster_limit/point_measure.hpp"

namespace cluster_limit {

/// Decidable event on point measures: a conjunction of "total count equals k"
/// and "count on interval B is at least c" terms. The empty conjunction is
/// the always-true event.
class ClusterEvent {
  public:
    struct CountAtLeast {
        Interval where;
        std::int64_t at_least = 1;
    };

    ClusterEvent() = default;

    static ClusterEvent always() { return {}; }
    static ClusterEvent total_count(std::int64_t k);
    static ClusterEvent count_at_least(Interval where, std::int64_t at_least);

    /// Conjunction with another event.
    ClusterEvent and_also(const ClusterEvent& other) const;

    bool is_always() const { return !total_ && terms_.empty(); }
    const std::optional<std::int64_t>& total() const { return total_; }
    const std::vector<CountAtLeast>& terms() const { return terms_; }

    bool contains(const PointMeasure& mu) const;

    /// True when no interval endpoint coincides with a fixed-atom modulus.
    bool avoids_fixed_atoms(const std::vector<double>& fixed_moduli) const;

    std::string label() const;

    void to_json(nlohmann::json& j) const;
    static ClusterEvent from_json(const nlohmann::json& j);

  private:
    std::optional<std::int64_t> total_;
    std::vector<CountAtLeast> terms_;
};

}  // namespace cluster_limit
