#include "geoclust/fda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/QR>

#include "geoclust/error.hpp"
#include "geoclust/quadrature.hpp"

namespace geoclust {

void SampledSeries::validate() const {
  const std::string who = "series '" + site_id + "': ";
  require(times.size() == values.size(), ErrorCode::invalid_argument,
          who + "times and values differ in length");
  require(times.size() >= 2, ErrorCode::invalid_argument, who + "needs at least 2 observations");
  for (std::size_t j = 0; j < times.size(); ++j) {
    require(std::isfinite(times[j]), ErrorCode::invalid_argument, who + "non-finite time stamp");
    require(std::isfinite(values[j]), ErrorCode::invalid_argument, who + "non-finite value");
    if (j > 0)
      require(times[j] > times[j - 1], ErrorCode::invalid_argument,
              who + "times must be strictly increasing");
  }
  require(std::isfinite(coords[0]) && std::isfinite(coords[1]), ErrorCode::invalid_argument,
          who + "non-finite coordinates");
}

GramMatrix gram_matrix(const BasisSystem& basis) {
  const int z = basis.dimension();
  Matrix w = Matrix::Zero(z, z);

  std::vector<double> cuts;
  int points;
  if (basis.kind() == BasisKind::bspline) {
    cuts = basis.breakpoints();
    points = basis.order() + 1;
  } else {
    // trigonometric integrand: composite rule, one panel per basis function
    const Interval d = basis.domain();
    const int panels = z + 1;
    for (int k = 0; k <= panels; ++k) cuts.push_back(d.lo + d.length() * k / panels);
    points = 20;
  }
  const QuadratureRule rule = gauss_legendre(points);

  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s], b = cuts[s + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int q = 0; q < points; ++q) {
      const Vector v = basis.evaluate(mid + half * rule.nodes[q]);
      w.noalias() += (half * rule.weights[q]) * v * v.transpose();
    }
  }
  return GramMatrix{0.5 * (w + w.transpose())};
}

FunctionalDataset::FunctionalDataset(BasisSystem basis, GramMatrix gram, Matrix coefficients,
                                     Matrix coords, std::vector<std::string> site_ids)
    : basis_(std::move(basis)),
      gram_(std::move(gram)),
      coefficients_(std::move(coefficients)),
      coords_(std::move(coords)),
      site_ids_(std::move(site_ids)) {
  const auto n = coefficients_.rows();
  require(n >= 2, ErrorCode::invalid_argument, "a functional dataset needs at least 2 curves");
  require(coefficients_.cols() == basis_.dimension(), ErrorCode::invalid_dimension,
          "coefficient matrix width does not match the basis dimension");
  require(gram_.W.rows() == basis_.dimension() && gram_.W.cols() == basis_.dimension(),
          ErrorCode::invalid_dimension, "Gram matrix does not match the basis dimension");
  require(coords_.rows() == n && coords_.cols() == 2, ErrorCode::invalid_dimension,
          "coordinates must be an n x 2 matrix");
  require(static_cast<Eigen::Index>(site_ids_.size()) == n, ErrorCode::invalid_dimension,
          "one site id per curve is required");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::pair(coords_(a, 0), coords_(a, 1)) < std::pair(coords_(b, 0), coords_(b, 1));
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto a = order[k - 1], b = order[k];
    if (coords_(a, 0) == coords_(b, 0) && coords_(a, 1) == coords_(b, 1))
      fail(ErrorCode::invalid_argument, "sites '" + site_ids_[a] + "' and '" + site_ids_[b] +
                                            "' share the same coordinates");
  }
}

FunctionalDataset FunctionalDataset::with_coefficients(Matrix coefficients) const {
  return FunctionalDataset(basis_, gram_, std::move(coefficients), coords_, site_ids_);
}

double FunctionalDataset::distance_sq(Eigen::Index i, Eigen::Index j) const {
  const Vector d = coefficients_.row(i) - coefficients_.row(j);
  return std::max(0.0, d.dot(gram_.W * d));
}

namespace {

std::string span_name(const BasisSystem& basis, int span) {
  const auto bp = basis.breakpoints();
  std::ostringstream s;
  s << "[" << bp[span] << ", " << bp[span + 1] << "]";
  return s.str();
}

Matrix checked_design(const SampledSeries& series, const BasisSystem& basis) {
  series.validate();
  const auto z = static_cast<std::size_t>(basis.dimension());
  if (series.times.size() < z) {
    std::ostringstream msg;
    msg << "series '" << series.site_id << "' has " << series.times.size()
        << " observations, fewer than the " << z << " basis functions";
    fail(ErrorCode::underdetermined, msg.str());
  }
  const Interval d = basis.domain();
  for (double t : series.times)
    require(d.contains(t), ErrorCode::invalid_argument,
            "series '" + series.site_id + "' has time stamps outside the basis domain");
  return basis.design_matrix(series.times);
}

void rank_failure(const SampledSeries& series, const BasisSystem& basis, Eigen::Index rank) {
  std::ostringstream msg;
  msg << "series '" << series.site_id << "': design matrix has rank " << rank << " < "
      << basis.dimension();
  if (basis.kind() == BasisKind::bspline) {
    const int first = basis.span_index(series.times.front());
    const int last = basis.span_index(series.times.back());
    if (first == last) {
      msg << "; all observation times fall in knot span " << span_name(basis, first);
    } else {
      const auto bp = basis.breakpoints();
      for (int s = 0; s + 1 < static_cast<int>(bp.size()); ++s) {
        const bool hit = std::any_of(series.times.begin(), series.times.end(),
                                     [&](double t) { return basis.span_index(t) == s; });
        if (!hit) {
          msg << "; knot span " << span_name(basis, s) << " holds no observations";
          break;
        }
      }
    }
  }
  fail(ErrorCode::rank_deficient, msg.str());
}

}  // namespace

Vector smooth_series(const SampledSeries& series, const BasisSystem& basis) {
  const Matrix x = checked_design(series, basis);
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-12);
  if (qr.rank() < basis.dimension()) rank_failure(series, basis, qr.rank());
  const Eigen::Map<const Vector> y(series.values.data(),
                                   static_cast<Eigen::Index>(series.values.size()));
  return qr.solve(y);
}

FunctionalDataset make_dataset(std::span<const SampledSeries> series, const BasisSystem& basis) {
  const auto n = static_cast<Eigen::Index>(series.size());
  Matrix a(n, basis.dimension());
  Matrix coords(n, 2);
  std::vector<std::string> ids;
  ids.reserve(series.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = series[static_cast<std::size_t>(i)];
    a.row(i) = smooth_series(s, basis).transpose();
    coords(i, 0) = s.coords[0];
    coords(i, 1) = s.coords[1];
    ids.push_back(s.site_id);
  }
  return FunctionalDataset(basis, gram_matrix(basis), std::move(a), std::move(coords),
                           std::move(ids));
}

Interval time_domain(std::span<const SampledSeries> series_set) {
  require(!series_set.empty(), ErrorCode::invalid_argument, "no series given");
  Interval d{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& s : series_set) {
    require(!s.times.empty(), ErrorCode::invalid_argument, "series '" + s.site_id + "' is empty");
    d.lo = std::min(d.lo, s.times.front());
    d.hi = std::max(d.hi, s.times.back());
  }
  return d;
}

BasisSelection select_basis_dimension(std::span<const SampledSeries> series_set,
                                      std::span<const int> candidates, int order) {
  require(!candidates.empty(), ErrorCode::invalid_argument, "no candidate basis dimensions");
  require(!series_set.empty(), ErrorCode::invalid_argument, "no series given");
  const Interval domain = time_domain(series_set);

  BasisSelection out;
  out.candidates.assign(candidates.begin(), candidates.end());
  double power = 0.0;
  std::size_t count = 0;
  for (const auto& s : series_set)
    for (double v : s.values) {
      power += v * v;
      ++count;
    }
  power /= static_cast<double>(std::max<std::size_t>(count, 1));

  for (int z : candidates) {
    const BasisSystem basis = build_basis(domain, z, order);
    double total = 0.0;
    for (const auto& s : series_set) {
      const Matrix x = checked_design(s, basis);
      Eigen::HouseholderQR<Matrix> qr(x);
      const Matrix q = qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
      const Eigen::Map<const Vector> y(s.values.data(), static_cast<Eigen::Index>(s.values.size()));
      const Vector resid = y - q * (q.transpose() * y);
      double sse = 0.0;
      for (Eigen::Index j = 0; j < x.rows(); ++j) {
        const double lev = q.row(j).squaredNorm();
        if (1.0 - lev < 1e-10) {
          sse = std::numeric_limits<double>::infinity();
          break;
        }
        const double e = resid(j) / (1.0 - lev);
        sse += e * e;
      }
      total += sse / static_cast<double>(x.rows());
    }
    out.cv_scores.push_back(total / static_cast<double>(series_set.size()));
  }

  const double best = *std::min_element(out.cv_scores.begin(), out.cv_scores.end());
  require(std::isfinite(best), ErrorCode::underdetermined,
          "leave-one-out error is undefined for every candidate (too few observations)");
  const double tie = 1e-8 * best + 1e-12 * power;
  int chosen = -1;
  for (std::size_t k = 0; k < out.candidates.size(); ++k)
    if (out.cv_scores[k] <= best + tie && (chosen < 0 || out.candidates[k] < chosen))
      chosen = out.candidates[k];
  out.dimension = chosen;
  return out;
}

double l2_distance_sq(const Vector& a_i, const Vector& a_j, const GramMatrix& gram) {
  require(a_i.size() == a_j.size() && a_i.size() == gram.W.rows(), ErrorCode::invalid_dimension,
          "coefficient vectors and Gram matrix disagree in length");
  const Vector d = a_i - a_j;
  return std::max(0.0, d.dot(gram.W * d));
}

FunctionalDataset detrend(const FunctionalDataset& dataset) {
  const auto n = dataset.size();
  require(n >= 4, ErrorCode::invalid_argument, "detrending needs at least 4 sites");
  Matrix x(n, 3);
  x.col(0).setOnes();
  x.rightCols(2) = dataset.coords();
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-12);
  require(qr.rank() == 3, ErrorCode::rank_deficient,
          "site coordinates are collinear; cannot fit the [1, x, y] trend");
  Eigen::HouseholderQR<Matrix> hqr(x);
  const Matrix q = hqr.householderQ() * Matrix::Identity(n, 3);
  const Matrix& a = dataset.coefficients();
  Matrix resid = a - q * (q.transpose() * a);
  return dataset.with_coefficients(std::move(resid));
}

}  // namespace geoclust
