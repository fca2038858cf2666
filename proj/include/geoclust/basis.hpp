#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace geoclust {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && t <= hi; }
};

enum class BasisKind { bspline, fourier };

/// A finite basis {B_1..B_Z} on a closed time interval.
///
/// B-splines use a clamped knot vector: `order` copies of each endpoint with
/// Z - order equally spaced interior knots. The Fourier system is the
/// orthonormal one, {1, sqrt(2) sin(2 pi j x), sqrt(2) cos(2 pi j x)} scaled to
/// the domain, with sines and cosines interleaved.
class BasisSystem {
 public:
  static BasisSystem bspline(Interval domain, int dimension, int order);
  static BasisSystem fourier(Interval domain, int dimension);

  BasisKind kind() const { return kind_; }
  int order() const { return order_; }
  int dimension() const { return dimension_; }
  Interval domain() const { return domain_; }

  /// Full knot vector (with repeated boundary knots). For Fourier bases this
  /// is just the two endpoints.
  const std::vector<double>& knots() const { return knots_; }

  /// Distinct knots; the polynomial pieces of a B-spline live between them.
  std::vector<double> breakpoints() const;

  /// Values of all Z basis functions at t. t must lie in the domain.
  Vector evaluate(double t) const;

  /// Rows are evaluate(times[j]).
  Matrix design_matrix(std::span<const double> times) const;

  /// Index of the knot span [k_s, k_{s+1}) holding t, counted over breakpoints.
  int span_index(double t) const;

 private:
  BasisSystem() = default;

  void eval_bspline(double t, double* out) const;
  void eval_fourier(double t, double* out) const;

  BasisKind kind_ = BasisKind::bspline;
  int order_ = 4;
  int dimension_ = 0;
  Interval domain_;
  std::vector<double> knots_;
};

/// B-spline basis with equally spaced interior knots.
BasisSystem build_basis(Interval domain, int dimension, int order = 4);

}  // namespace geoclust
