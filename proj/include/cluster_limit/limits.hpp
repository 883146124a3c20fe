#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cluster_limit/cluster_event.hpp"
#include "cluster_limit/point_measure.hpp"
#include "cluster_limit/rng.hpp"
#include "cluster_limit/test_function.hpp"

namespace cluster_limit {

/// Distribution of cluster multiplicities on {1, 2, ...}: either an explicit
/// finite table or geometric(rho) with pmf (1-rho) rho^{k-1}.
class ClusterSizeDist {
  public:
    static ClusterSizeDist dirac(std::int64_t k);
    static ClusterSizeDist finite(std::vector<double> pmf);  // pmf[i] = P(k = i+1)
    static ClusterSizeDist geometric(double rho);

    double pmf(std::int64_t k) const;
    double prob_at_least(std::int64_t k) const;
    /// sum_k pmf(k) z^k for z in [0,1].
    double pgf(double z) const;
    std::int64_t sample(rng::Stream& stream) const;
    /// Smallest K with P(k > K) <= tol (enumeration cutoff).
    std::int64_t enumeration_bound(double tol = 1e-13) const;
    double mean() const;  // +inf possible in principle, finite for built-ins

    void to_json(nlohmann::json& j) const;
    static ClusterSizeDist from_json(const nlohmann::json& j);

  private:
    ClusterSizeDist() = default;
    bool is_geometric_ = false;
    double rho_ = 0.0;
    std::vector<double> table_;  // finite case
};

/// Cluster-shape distribution Q on normalized shapes: synthetic multiplicity
/// shapes k * delta_1 with k ~ sizes, or the empirical distribution of a
/// stored shape sample.
class ClusterShapeDist {
  public:
    static ClusterShapeDist atom_multiplicity(ClusterSizeDist sizes);
    static ClusterShapeDist empirical(std::vector<PointMeasure> shapes);

    bool is_empirical() const { return empirical_; }
    PointMeasure sample(rng::Stream& stream) const;

    /// Enumerates (weight, shape) pairs covering all but <= tol of the mass;
    /// exact expectations over Q reduce to this finite sum.
    void for_each_weighted_shape(const std::function<void(double, const PointMeasure&)>& fn,
                                 double tol = 1e-13) const;

    void to_json(nlohmann::json& j) const;
    static ClusterShapeDist from_json(const nlohmann::json& j);

  private:
    ClusterShapeDist() = default;
    bool empirical_ = false;
    ClusterSizeDist sizes_ = ClusterSizeDist::dirac(1);
    std::vector<PointMeasure> shapes_;
};

/// Value with an optional Monte Carlo half-width (zero when exact).
struct MassEstimate {
    double value = 0.0;
    double ci_half_width = 0.0;
};

/// A sample of the restricted limit process together with its cluster
/// decomposition.
struct SampleDetail {
    PointMeasure process;
    std::vector<PointMeasure> clusters;
    std::vector<double> positions;  // cluster positions y
};

/// Canonical measure of an infinitely divisible limit process, represented
/// through the (nu, K) disintegration:
///   compound_poisson_uniform: nu(dy) = rate * 1_(0,1](y) dy,
///                             K(y, .) = sum_k pi_k delta_{k delta_y};
///   regvar_cluster:           nu(dy) = theta alpha y^{-alpha-1} dy on (0,inf),
///                             K(y, .) = law of the Q-shape rescaled by y.
class CanonicalMeasure {
  public:
    enum class Variant { compound_poisson_uniform, regvar_cluster };

    static CanonicalMeasure compound_poisson_uniform(double rate, ClusterSizeDist sizes);
    static CanonicalMeasure regvar_cluster(double theta, double alpha, ClusterShapeDist shapes);

    Variant variant() const { return variant_; }
    double rate() const { return rate_; }
    double theta() const { return theta_; }
    double alpha() const { return alpha_; }
    const ClusterSizeDist& sizes() const { return sizes_; }
    const ClusterShapeDist& shapes() const { return shapes_; }
    std::string label() const;

    /// Fixed atoms D (empty for both built-ins) and their modulus projection.
    const std::vector<double>& fixed_atoms() const { return fixed_atoms_; }
    std::vector<double> fixed_moduli() const;
    bool is_fixed_modulus(double x) const;

    /// The space the limit process lives on.
    SpaceSpec target_space() const;

    /// nu(x, inf): total canonical mass of clusters with maximum modulus
    /// beyond x. Closed form for both variants.
    double tail_mass(double x) const;

    /// Canonical mass of {cluster in M, maximum modulus > x}; exact for the
    /// built-in kernels (finite enumeration + interval arithmetic).
    MassEstimate cluster_mass(double x, const ClusterEvent& event) const;

    /// Laplace functional value L(f) in (0,1].
    MassEstimate laplace(const TestFunction& f) const;

    /// -log of the Laplace functional restricted to cluster positions
    /// y in (y_lo, y_hi); the full value uses (0, inf).
    MassEstimate neg_log_laplace(const TestFunction& f, double y_lo, double y_hi) const;

    /// P(no point beyond modulus x) = exp(-tail_mass(x)). x must avoid the
    /// fixed-atom moduli.
    double void_probability(double x) const;

    /// Draw from the process restricted to clusters with maximum modulus
    /// beyond eps: Poisson(tail_mass(eps)) many i.i.d. clusters.
    PointMeasure sample(double eps, rng::Stream& stream) const;
    SampleDetail sample_detailed(double eps, rng::Stream& stream) const;

    void to_json(nlohmann::json& j) const;
    static CanonicalMeasure from_json(const nlohmann::json& j);

  private:
    CanonicalMeasure() = default;

    Variant variant_ = Variant::compound_poisson_uniform;
    double rate_ = 1.0;    // compound_poisson_uniform
    double theta_ = 1.0;   // regvar_cluster
    double alpha_ = 1.0;   // regvar_cluster
    ClusterSizeDist sizes_ = ClusterSizeDist::dirac(1);
    ClusterShapeDist shapes_ = ClusterShapeDist::atom_multiplicity(ClusterSizeDist::dirac(1));
    std::vector<double> fixed_atoms_;
};

}  // namespace cluster_limit
