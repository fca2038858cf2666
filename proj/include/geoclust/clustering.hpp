#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoclust/variogram.hpp"

namespace geoclust {

/// Cluster index per curve, 0-based (files use 1-based labels).
struct Partition {
  std::vector<int> assignment;
  int K = 0;

  std::size_t size() const { return assignment.size(); }
  std::vector<int> counts() const;
  std::vector<int> members(int k) const;
  /// Throws invalid_partition on out-of-range labels or an empty cluster.
  void validate() const;
  bool operator==(const Partition&) const = default;
};

enum class HStarRule { max, min, median };

/// Lag weights of the allocation cost.
/// pair_share:  rho = |N^{s_i}_k(h)| / |N_k(h)|
/// lag_profile: rho = |N^{s_i}_k(h)| / sum over h <= h* of |N^{s_i}_k(h)|
enum class RhoRule { pair_share, lag_profile };
std::string_view to_string(HStarRule rule);
HStarRule parse_h_star_rule(std::string_view name);
std::string_view to_string(RhoRule rule);
RhoRule parse_rho_rule(std::string_view name);

struct ClusteringConfig {
  int K = 3;
  VariogramFamily family = VariogramFamily::exponential;
  Weighting weighting = Weighting::ols;
  int n_lags = 15;
  std::optional<double> max_lag;
  int max_iter = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  int n_restarts = 10;
  HStarRule h_star_rule = HStarRule::max;
  RhoRule rho_rule = RhoRule::pair_share;
  int jobs = 1;
  bool stop_on_increase = true;  // end a run, keeping the previous partition, when the criterion rises

  void validate() const;
};

enum class Termination { unchanged, tolerance, criterion_increase, max_iter };
std::string_view to_string(Termination t);

struct ClusteringResult {
  Partition partition;
  std::vector<VariogramModel> prototypes;
  std::vector<EmpiricalVariogram> cluster_variograms;
  std::vector<double> criterion_trace;        // model-free, one entry per iteration
  std::vector<double> model_criterion_trace;  // against the fitted prototypes
  double criterion = 0.0;                     // final model criterion
  int iterations = 0;
  double h_star = 0.0;
  Termination termination = Termination::max_iter;
  int reseeded = 0;             // degenerate clusters rebuilt
  int fallback_allocations = 0; // curves placed by nearest neighbour
  int restart = 0;              // index of the winning restart
  std::vector<double> restart_criteria;

  bool converged() const { return termination != Termination::max_iter; }
};

/// Per-curve, per-cluster, per-lag sums of squared distances and pair counts.
/// Built once per dataset and lag structure; cheap to query per partition.
class PairCache {
 public:
  PairCache(const FunctionalDataset& dataset, const LagStructure& lags);

  const LagStructure& lags() const { return *lags_; }
  const Matrix& coords() const { return coords_; }
  std::size_t n_sites() const { return lags_->n_sites(); }
  std::span<const double> distances(std::size_t site) const { return d2_[site]; }
  /// Spatially closest other site.
  int nearest(std::size_t site) const { return nearest_[site]; }

 private:
  const LagStructure* lags_;
  Matrix coords_;
  std::vector<std::vector<double>> d2_;  // aligned with lags.neighbors(site)
  std::vector<int> nearest_;
};

/// Centered-variogram sums of every curve against every cluster.
struct ClusterStats {
  int K = 0;
  std::size_t n_lags = 0;
  std::vector<double> sum;         // [i][k][h], sum of squared distances
  std::vector<std::size_t> count;  // [i][k][h], |N^{s_i}_k(h)|

  std::size_t at(std::size_t i, int k, std::size_t h) const {
    return (i * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)) * n_lags + h;
  }
  double centered(std::size_t i, int k, std::size_t h) const {
    const auto c = count[at(i, k, h)];
    return c ? sum[at(i, k, h)] / (2.0 * static_cast<double>(c)) : 0.0;
  }
};

ClusterStats cluster_stats(const PairCache& cache, const Partition& partition);

/// Trace variogram of each cluster; pair_counts hold |N_k(h)|.
std::vector<EmpiricalVariogram> cluster_variograms(const PairCache& cache, const ClusterStats& stats,
                                                   const Partition& partition);

/// Sum over clusters, members and lags up to h_star of the squared
/// gap between each member's centered variogram and its cluster prototype.
double criterion(const FunctionalDataset& dataset, const Partition& partition,
                 const std::vector<VariogramModel>& prototypes, const LagStructure& lags,
                 double h_star);

/// As above with the cluster trace variogram in place of the prototype, over
/// every lag. Depends on the partition only.
double model_free_criterion(const PairCache& cache, const ClusterStats& stats,
                            const Partition& partition);

/// Fits one prototype per cluster to the cluster trace variogram.
std::vector<VariogramModel> representation_step(const FunctionalDataset& dataset,
                                                const Partition& partition,
                                                const LagStructure& lags,
                                                const ClusteringConfig& config);

struct Allocation {
  Partition partition;
  Matrix cost;        // n x K weighted mismatch; +inf where ineligible
  int fallback = 0;   // curves with no pairs below h_star in any cluster
};

/// Batch reassignment of every curve to the cluster with the smallest
/// rho-weighted mismatch over lags up to h_star.
Allocation allocation_step(const PairCache& cache, const ClusterStats& stats,
                           const Partition& partition,
                           const std::vector<VariogramModel>& prototypes, double h_star,
                           RhoRule rho = RhoRule::pair_share);

Allocation allocation_step(const FunctionalDataset& dataset, const Partition& partition,
                           const std::vector<VariogramModel>& prototypes, const LagStructure& lags,
                           double h_star, RhoRule rho = RhoRule::pair_share);

/// h* from the prototypes' practical ranges, clamped to the lag grid.
double choose_h_star(const std::vector<VariogramModel>& prototypes, const LagStructure& lags,
                     HStarRule rule);

/// Uniform random partition with every cluster non-empty.
Partition random_partition(std::size_t n, int K, std::uint64_t seed);

/// Seed of restart r derived from the master seed.
std::uint64_t restart_seed(std::uint64_t seed, int restart);

/// One run of the dynamic clustering algorithm from a given partition.
ClusteringResult dc_run(const PairCache& cache, const ClusteringConfig& config, Partition initial);

/// n_restarts seeded runs; the one with the smallest final criterion wins.
ClusteringResult dc_cluster(const FunctionalDataset& dataset, const ClusteringConfig& config);

}  // namespace geoclust
