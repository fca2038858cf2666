#include "geoclust/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geoclust/error.hpp"

namespace geoclust {

namespace {

void check_domain(Interval domain) {
  require(std::isfinite(domain.lo) && std::isfinite(domain.hi) && domain.hi > domain.lo,
          ErrorCode::invalid_domain, "basis domain must be a non-degenerate finite interval");
}

}  // namespace

BasisSystem BasisSystem::bspline(Interval domain, int dimension, int order) {
  check_domain(domain);
  require(order >= 1, ErrorCode::invalid_dimension, "spline order must be >= 1");
  if (dimension < order) {
    std::ostringstream msg;
    msg << "basis dimension " << dimension << " is smaller than spline order " << order;
    fail(ErrorCode::invalid_dimension, msg.str());
  }
  BasisSystem b;
  b.kind_ = BasisKind::bspline;
  b.order_ = order;
  b.dimension_ = dimension;
  b.domain_ = domain;

  const int interior = dimension - order;
  b.knots_.reserve(dimension + order);
  b.knots_.insert(b.knots_.end(), order, domain.lo);
  const double step = domain.length() / (interior + 1);
  for (int k = 1; k <= interior; ++k) b.knots_.push_back(domain.lo + k * step);
  b.knots_.insert(b.knots_.end(), order, domain.hi);
  return b;
}

BasisSystem BasisSystem::fourier(Interval domain, int dimension) {
  check_domain(domain);
  require(dimension >= 1, ErrorCode::invalid_dimension, "Fourier basis needs dimension >= 1");
  BasisSystem b;
  b.kind_ = BasisKind::fourier;
  b.order_ = 0;
  b.dimension_ = dimension;
  b.domain_ = domain;
  b.knots_ = {domain.lo, domain.hi};
  return b;
}

BasisSystem build_basis(Interval domain, int dimension, int order) {
  return BasisSystem::bspline(domain, dimension, order);
}

std::vector<double> BasisSystem::breakpoints() const {
  std::vector<double> out;
  for (double k : knots_)
    if (out.empty() || k > out.back()) out.push_back(k);
  return out;
}

int BasisSystem::span_index(double t) const {
  const auto bp = breakpoints();
  auto it = std::upper_bound(bp.begin(), bp.end(), t);
  int s = static_cast<int>(it - bp.begin()) - 1;
  return std::clamp(s, 0, static_cast<int>(bp.size()) - 2);
}

Vector BasisSystem::evaluate(double t) const {
  Vector out = Vector::Zero(dimension_);
  if (kind_ == BasisKind::bspline)
    eval_bspline(t, out.data());
  else
    eval_fourier(t, out.data());
  return out;
}

Matrix BasisSystem::design_matrix(std::span<const double> times) const {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(times.size()), dimension_);
  Vector row(dimension_);
  for (std::size_t j = 0; j < times.size(); ++j) {
    row.setZero();
    if (kind_ == BasisKind::bspline)
      eval_bspline(times[j], row.data());
    else
      eval_fourier(times[j], row.data());
    x.row(static_cast<Eigen::Index>(j)) = row.transpose();
  }
  return x;
}

// Cox–de Boor, computing only the `order` functions that are nonzero on the
// span containing t (Piegl & Tiller, A2.2).
void BasisSystem::eval_bspline(double t, double* out) const {
  const int p = order_ - 1;  // degree
  const int n = dimension_;
  const auto& u = knots_;
  t = std::clamp(t, domain_.lo, domain_.hi);

  int span;
  if (t >= u[n]) {
    span = n - 1;
  } else {
    auto it = std::upper_bound(u.begin() + p, u.begin() + n + 1, t);
    span = static_cast<int>(it - u.begin()) - 1;
  }

  std::vector<double> left(p + 1), right(p + 1), vals(p + 1);
  vals[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - u[span + 1 - j];
    right[j] = u[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double tmp = denom > 0.0 ? vals[r] / denom : 0.0;
      vals[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    vals[j] = saved;
  }
  for (int r = 0; r <= p; ++r) out[span - p + r] = vals[r];
}

void BasisSystem::eval_fourier(double t, double* out) const {
  const double len = domain_.length();
  const double x = (t - domain_.lo) / len;
  const double scale = 1.0 / std::sqrt(len);
  out[0] = scale;
  for (int l = 1; l < dimension_; ++l) {
    const int freq = (l + 1) / 2;
    const double arg = 2.0 * std::numbers::pi * freq * x;
    out[l] = scale * std::numbers::sqrt2 * ((l % 2 == 1) ? std::sin(arg) : std::cos(arg));
  }
}

}  // namespace geoclust
