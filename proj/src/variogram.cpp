#include "geoclust/variogram.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "geoclust/error.hpp"
#include "geoclust/optimize.hpp"

namespace geoclust {

// ---------------------------------------------------------------------------
// lag structure

std::size_t LagStructure::site_pair_count(std::size_t site, std::size_t lag) const {
  const auto nb = neighbors(site);
  const auto lo = std::lower_bound(nb.begin(), nb.end(), static_cast<int>(lag),
                                   [](const Neighbor& a, int l) { return a.lag < l; });
  const auto hi = std::upper_bound(lo, nb.end(), static_cast<int>(lag),
                                   [](int l, const Neighbor& a) { return l < a.lag; });
  return static_cast<std::size_t>(hi - lo);
}

int LagStructure::lag_of(double distance) const {
  if (!(distance > 0.0) || distance > max_lag_) return -1;
  double frac = distance / bin_width();
  const double nearest = std::round(frac);
  if (std::abs(frac - nearest) <= 1e-9 * frac) frac = nearest;
  const int b = static_cast<int>(std::ceil(frac)) - 1;
  if (b < 0 || b >= static_cast<int>(centers_.size())) return -1;
  return b;
}

LagStructure build_lag_structure(const Matrix& coords, int n_lags, std::optional<double> max_lag) {
  const auto n = coords.rows();
  require(coords.cols() == 2, ErrorCode::invalid_dimension, "coordinates must be n x 2");
  require(n >= 2, ErrorCode::invalid_argument, "a lag structure needs at least 2 sites");
  require(n_lags >= 1, ErrorCode::invalid_argument, "n_lags must be >= 1");

  double dmax = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      dmax = std::max(dmax, (coords.row(i) - coords.row(j)).norm());
  require(dmax > 0.0, ErrorCode::no_pairs, "all sites coincide; no pairs at positive distance");

  LagStructure s;
  s.max_lag_ = max_lag.value_or(0.5 * dmax);
  require(std::isfinite(s.max_lag_) && s.max_lag_ > 0.0, ErrorCode::invalid_argument,
          "max_lag must be positive");
  const double w = s.max_lag_ / n_lags;
  s.tolerance_ = 0.5 * w;
  s.centers_.resize(static_cast<std::size_t>(n_lags));
  for (int b = 0; b < n_lags; ++b) s.centers_[static_cast<std::size_t>(b)] = (b + 0.5) * w;
  s.pairs_.assign(static_cast<std::size_t>(n_lags), {});
  s.neighbors_.assign(static_cast<std::size_t>(n), {});

  std::size_t total = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int b = s.lag_of((coords.row(i) - coords.row(j)).norm());
      if (b < 0) continue;
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      s.pairs_[static_cast<std::size_t>(b)].push_back({ii, jj});
      s.neighbors_[static_cast<std::size_t>(i)].push_back({jj, b});
      s.neighbors_[static_cast<std::size_t>(j)].push_back({ii, b});
      ++total;
    }
  require(total > 0, ErrorCode::no_pairs, "no site pair falls within max_lag");
  for (auto& nb : s.neighbors_)
    std::sort(nb.begin(), nb.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.lag != b.lag ? a.lag < b.lag : a.site < b.site;
    });
  return s;
}

// ---------------------------------------------------------------------------
// empirical estimators

std::size_t EmpiricalVariogram::populated() const {
  return static_cast<std::size_t>(
      std::count_if(pair_counts.begin(), pair_counts.end(), [](auto c) { return c > 0; }));
}

namespace {

std::vector<char> membership(Eigen::Index n, std::optional<SiteSubset> subset) {
  std::vector<char> in(static_cast<std::size_t>(n), subset ? 0 : 1);
  if (subset)
    for (int i : *subset) {
      require(i >= 0 && i < n, ErrorCode::invalid_argument, "subset index out of range");
      in[static_cast<std::size_t>(i)] = 1;
    }
  return in;
}

void check_sizes(const FunctionalDataset& dataset, const LagStructure& lags) {
  require(static_cast<Eigen::Index>(lags.n_sites()) == dataset.size(), ErrorCode::invalid_dimension,
          "lag structure and dataset have different numbers of sites");
}

}  // namespace

EmpiricalVariogram empirical_trace_variogram(const FunctionalDataset& dataset,
                                             const LagStructure& lags,
                                             std::optional<SiteSubset> subset) {
  check_sizes(dataset, lags);
  const auto in = membership(dataset.size(), subset);
  EmpiricalVariogram out;
  out.lag_centers = lags.centers();
  out.semivariance.assign(lags.n_lags(), 0.0);
  out.pair_counts.assign(lags.n_lags(), 0);
  for (std::size_t h = 0; h < lags.n_lags(); ++h) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& p : lags.pairs(h)) {
      if (!in[static_cast<std::size_t>(p.i)] || !in[static_cast<std::size_t>(p.j)]) continue;
      sum += dataset.distance_sq(p.i, p.j);
      ++count;
    }
    out.pair_counts[h] = count;
    if (count > 0) out.semivariance[h] = sum / (2.0 * static_cast<double>(count));
  }
  require(out.populated() > 0, ErrorCode::no_pairs, "no site pairs at any lag for this subset");
  return out;
}

EmpiricalVariogram centered_variogram(const FunctionalDataset& dataset, const LagStructure& lags,
                                      int site, std::optional<SiteSubset> subset) {
  check_sizes(dataset, lags);
  require(site >= 0 && site < dataset.size(), ErrorCode::invalid_argument,
          "site index out of range");
  const auto in = membership(dataset.size(), subset);
  require(in[static_cast<std::size_t>(site)] != 0, ErrorCode::invalid_argument,
          "centered variogram site is not part of the subset");
  EmpiricalVariogram out;
  out.lag_centers = lags.centers();
  out.semivariance.assign(lags.n_lags(), 0.0);
  out.pair_counts.assign(lags.n_lags(), 0);
  std::vector<double> sum(lags.n_lags(), 0.0);
  for (const auto& nb : lags.neighbors(static_cast<std::size_t>(site))) {
    if (!in[static_cast<std::size_t>(nb.site)]) continue;
    sum[static_cast<std::size_t>(nb.lag)] += dataset.distance_sq(site, nb.site);
    ++out.pair_counts[static_cast<std::size_t>(nb.lag)];
  }
  for (std::size_t h = 0; h < lags.n_lags(); ++h)
    if (out.pair_counts[h] > 0)
      out.semivariance[h] = sum[h] / (2.0 * static_cast<double>(out.pair_counts[h]));
  return out;
}

// ---------------------------------------------------------------------------
// models

std::string_view to_string(VariogramFamily family) {
  switch (family) {
    case VariogramFamily::exponential: return "exponential";
    case VariogramFamily::spherical: return "spherical";
    case VariogramFamily::gaussian: return "gaussian";
  }
  return "?";
}

std::string_view to_string(Weighting weighting) {
  return weighting == Weighting::ols ? "ols" : "wls";
}

VariogramFamily parse_family(std::string_view name) {
  if (name == "exponential") return VariogramFamily::exponential;
  if (name == "spherical") return VariogramFamily::spherical;
  if (name == "gaussian") return VariogramFamily::gaussian;
  fail(ErrorCode::invalid_argument, "unknown variogram family '" + std::string(name) + "'");
}

Weighting parse_weighting(std::string_view name) {
  if (name == "ols") return Weighting::ols;
  if (name == "wls") return Weighting::wls;
  fail(ErrorCode::invalid_argument, "unknown weighting '" + std::string(name) + "'");
}

namespace {

double shape(VariogramFamily family, double x) {
  switch (family) {
    case VariogramFamily::exponential: return 1.0 - std::exp(-x);
    case VariogramFamily::gaussian: return 1.0 - std::exp(-x * x);
    case VariogramFamily::spherical: return x >= 1.0 ? 1.0 : 1.5 * x - 0.5 * x * x * x;
  }
  return 0.0;
}

double range_scale(VariogramFamily family) {
  switch (family) {
    case VariogramFamily::exponential: return 3.0;
    case VariogramFamily::gaussian: return std::sqrt(3.0);
    case VariogramFamily::spherical: return 1.0;
  }
  return 1.0;
}

}  // namespace

double eval_model(const VariogramModel& model, double h) {
  require(h >= 0.0, ErrorCode::invalid_argument, "variogram lag must be non-negative");
  if (h == 0.0) return 0.0;
  return model.nugget + model.partial_sill * shape(model.family, h / model.range);
}

double practical_range(const VariogramModel& model) {
  return range_scale(model.family) * model.range;
}

double fit_objective(const EmpiricalVariogram& emp, const VariogramModel& model,
                     Weighting weighting) {
  double s = 0.0;
  for (std::size_t h = 0; h < emp.lag_centers.size(); ++h) {
    if (!emp.present(h)) continue;
    const double w = weighting == Weighting::wls ? static_cast<double>(emp.pair_counts[h]) : 1.0;
    const double r = emp.semivariance[h] - eval_model(model, emp.lag_centers[h]);
    s += w * r * r;
  }
  return s;
}

FitResult fit_model(const EmpiricalVariogram& emp, VariogramFamily family, Weighting weighting) {
  const std::size_t populated = emp.populated();
  if (populated < 3) {
    std::ostringstream msg;
    msg << "variogram fit needs at least 3 populated lags, got " << populated;
    fail(ErrorCode::insufficient_data, msg.str());
  }
  double top = 0.0;
  for (std::size_t h = 0; h < emp.lag_centers.size(); ++h)
    if (emp.present(h)) top = std::max(top, emp.semivariance[h]);
  const double span = emp.lag_centers.back();

  const double sill_floor = top > 0.0 ? 1e-10 * top : 1e-12;
  const double range_floor = 1e-6 * span;
  const double range_ceiling = 10.0 * span;
  const double sill_scale = std::max(top, sill_floor);

  auto to_model = [&](const Eigen::VectorXd& x) {
    VariogramModel m;
    m.family = family;
    m.nugget = std::max(0.0, x(0) * sill_scale);
    m.partial_sill = std::max(sill_floor, x(1) * sill_scale);
    m.range = std::clamp(x(2) * span, range_floor, range_ceiling);
    return m;
  };
  auto objective = [&](const Eigen::VectorXd& x) {
    return fit_objective(emp, to_model(x), weighting);
  };

  FitResult best;
  best.objective = std::numeric_limits<double>::infinity();
  constexpr std::array<double, 5> fractions{0.1, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0};
  for (double f : fractions) {
    Eigen::VectorXd x0(3);
    x0 << 0.0, sill_scale / sill_scale, f / range_scale(family);
    const double f0 = objective(x0);
    if (!std::isfinite(f0)) fail(ErrorCode::fit_failure, "variogram objective is not finite");
    best.start_objectives.push_back(f0);
    Eigen::VectorXd step(3);
    step << 0.1, 0.1, 0.1 * x0(2);
    const NelderMeadResult r = nelder_mead(objective, x0, step);
    if (!std::isfinite(r.value)) fail(ErrorCode::fit_failure, "variogram objective is not finite");
    if (r.value < best.objective) {
      best.objective = r.value;
      best.model = to_model(r.x);
    }
  }
  best.objective = fit_objective(emp, best.model, weighting);
  best.degenerate = top <= 0.0 || best.model.partial_sill <= sill_floor * (1.0 + 1e-9);
  return best;
}

}  // namespace geoclust
