#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoclust/fda.hpp"

namespace geoclust {

struct SitePair {
  int i = 0;
  int j = 0;
};

struct Neighbor {
  int site = 0;
  int lag = 0;
};

/// Distance classes over site pairs.
///
/// Bin b covers distances (b w, (b+1) w] with w = max_lag / n_lags; its center
/// is (b + 1/2) w and the tolerance is w / 2. Each unordered pair falls in at
/// most one bin. Per-site neighbor lists are directed: pair (i, j) appears in
/// the lists of both i and j, so summing per-site counts gives 2 |N(h)|.
class LagStructure {
 public:
  std::size_t n_lags() const { return centers_.size(); }
  std::size_t n_sites() const { return neighbors_.size(); }
  const std::vector<double>& centers() const { return centers_; }
  double tolerance() const { return tolerance_; }
  double max_lag() const { return max_lag_; }
  double bin_width() const { return 2.0 * tolerance_; }

  const std::vector<SitePair>& pairs(std::size_t lag) const { return pairs_[lag]; }
  std::size_t pair_count(std::size_t lag) const { return pairs_[lag].size(); }

  /// Neighbors of a site within max_lag, ordered by lag then site index.
  std::span<const Neighbor> neighbors(std::size_t site) const { return neighbors_[site]; }

  /// |N^{s_i}(h)|
  std::size_t site_pair_count(std::size_t site, std::size_t lag) const;

  /// Bin index of a distance, or -1 when it is zero or beyond max_lag.
  int lag_of(double distance) const;

 private:
  friend LagStructure build_lag_structure(const Matrix&, int, std::optional<double>);

  std::vector<double> centers_;
  double tolerance_ = 0.0;
  double max_lag_ = 0.0;
  std::vector<std::vector<SitePair>> pairs_;
  std::vector<std::vector<Neighbor>> neighbors_;
};

/// max_lag defaults to half the largest pairwise distance.
LagStructure build_lag_structure(const Matrix& coords, int n_lags,
                                 std::optional<double> max_lag = std::nullopt);

struct EmpiricalVariogram {
  std::vector<double> lag_centers;
  std::vector<double> semivariance;      // 0 where the lag is absent
  std::vector<std::size_t> pair_counts;  // |N(h)|, or |N^{s_i}(h)| for centered ones

  bool present(std::size_t lag) const { return pair_counts[lag] > 0; }
  std::size_t populated() const;
};

/// Site indices restricting both ends of every pair.
using SiteSubset = std::span<const int>;

EmpiricalVariogram empirical_trace_variogram(const FunctionalDataset& dataset,
                                             const LagStructure& lags,
                                             std::optional<SiteSubset> subset = std::nullopt);

EmpiricalVariogram centered_variogram(const FunctionalDataset& dataset, const LagStructure& lags,
                                      int site, std::optional<SiteSubset> subset = std::nullopt);

enum class VariogramFamily { exponential, spherical, gaussian };
enum class Weighting { ols, wls };

std::string_view to_string(VariogramFamily family);
std::string_view to_string(Weighting weighting);
VariogramFamily parse_family(std::string_view name);
Weighting parse_weighting(std::string_view name);

struct VariogramModel {
  VariogramFamily family = VariogramFamily::exponential;
  double nugget = 0.0;
  double partial_sill = 1.0;
  double range = 1.0;

  double sill() const { return nugget + partial_sill; }
};

/// gamma(h); zero at h = 0, nugget + partial sill as h grows.
double eval_model(const VariogramModel& model, double h);

/// Distance at which the model attains 95% of its structured part
/// (exactly the range for the spherical family).
double practical_range(const VariogramModel& model);

struct FitResult {
  VariogramModel model;
  double objective = 0.0;
  bool degenerate = false;
  std::vector<double> start_objectives;  // objective at each multi-start point
};

/// Least-squares fit of a family to the populated lags of `emp`, with
/// nugget >= 0, partial sill and range bounded away from zero. Multi-start
/// Nelder–Mead; the best of the starts is returned.
FitResult fit_model(const EmpiricalVariogram& emp, VariogramFamily family, Weighting weighting);

/// Weighted residual sum of squares of `model` on the populated lags.
double fit_objective(const EmpiricalVariogram& emp, const VariogramModel& model,
                     Weighting weighting);

}  // namespace geoclust
