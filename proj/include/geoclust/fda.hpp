#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "geoclust/basis.hpp"

namespace geoclust {

/// One raw georeferenced time series.
struct SampledSeries {
  std::string site_id;
  std::array<double, 2> coords{0.0, 0.0};
  std::vector<double> times;
  std::vector<double> values;

  /// Throws unless times are strictly increasing, sizes match (>= 2) and
  /// every value is finite.
  void validate() const;
};

/// W_lm = integral of B_l(t) B_m(t) over the basis domain.
struct GramMatrix {
  Matrix W;
};

GramMatrix gram_matrix(const BasisSystem& basis);

/// Smoothed curves in basis-coefficient form: row i of `coefficients` holds a_i.
class FunctionalDataset {
 public:
  FunctionalDataset(BasisSystem basis, GramMatrix gram, Matrix coefficients, Matrix coords,
                    std::vector<std::string> site_ids);

  const BasisSystem& basis() const { return basis_; }
  const GramMatrix& gram() const { return gram_; }
  const Matrix& coefficients() const { return coefficients_; }
  const Matrix& coords() const { return coords_; }
  const std::vector<std::string>& site_ids() const { return site_ids_; }
  Eigen::Index size() const { return coefficients_.rows(); }

  /// Same sites and basis, new coefficient matrix.
  FunctionalDataset with_coefficients(Matrix coefficients) const;

  /// Squared L2 distance between curves i and j.
  double distance_sq(Eigen::Index i, Eigen::Index j) const;

 private:
  BasisSystem basis_;
  GramMatrix gram_;
  Matrix coefficients_;
  Matrix coords_;
  std::vector<std::string> site_ids_;
};

/// Ordinary least-squares coefficients of `series` in `basis`.
Vector smooth_series(const SampledSeries& series, const BasisSystem& basis);

/// Smooths every series in a common basis and assembles the dataset.
FunctionalDataset make_dataset(std::span<const SampledSeries> series, const BasisSystem& basis);

struct BasisSelection {
  int dimension = 0;
  std::vector<int> candidates;
  std::vector<double> cv_scores;  // mean leave-one-out squared error, per candidate
};

/// Leave-one-out cross-validation over time points, averaged over series.
/// Returns the candidate with the lowest score; near-ties go to the smaller Z.
BasisSelection select_basis_dimension(std::span<const SampledSeries> series_set,
                                      std::span<const int> candidates, int order = 4);

/// (a_i - a_j)^T W (a_i - a_j)
double l2_distance_sq(const Vector& a_i, const Vector& a_j, const GramMatrix& gram);

/// Removes the linear spatial trend: each coefficient column is replaced by
/// its OLS residual on [1, x, y].
FunctionalDataset detrend(const FunctionalDataset& dataset);

/// Common time domain of a set of series: [min t, max t].
Interval time_domain(std::span<const SampledSeries> series_set);

}  // namespace geoclust
