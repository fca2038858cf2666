#include <cmath>
#include <random>

#include "doctest.h"
#include "geoclust/error.hpp"
#include "geoclust/simulation.hpp"
#include "geoclust/variogram.hpp"
#include "../support/fixtures.hpp"

using namespace geoclust;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::io_error;
}

EmpiricalVariogram synthetic(const VariogramModel& m, int lags, double width) {
  EmpiricalVariogram e;
  for (int b = 0; b < lags; ++b) {
    const double h = (b + 0.5) * width;
    e.lag_centers.push_back(h);
    e.semivariance.push_back(eval_model(m, h));
    e.pair_counts.push_back(10 + static_cast<std::size_t>(b));
  }
  return e;
}

}  // namespace

TEST_CASE("lag structure on a unit grid") {
  const Matrix coords = grid_coords(10, 10);
  const auto lags = build_lag_structure(coords, 15);
  CHECK(lags.max_lag() == doctest::Approx(4.5 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(lags.n_lags() == 15);
  CHECK(lags.bin_width() == doctest::Approx(lags.max_lag() / 15));
  CHECK(lags.centers()[0] == doctest::Approx(lags.bin_width() / 2));
  // unit distance falls in (2w, 3w]
  CHECK(lags.lag_of(1.0) == 2);
  CHECK(lags.lag_of(0.0) == -1);
  CHECK(lags.lag_of(lags.max_lag()) == 14);
  CHECK(lags.lag_of(lags.max_lag() * 1.001) == -1);
  // a distance exactly on a bin edge belongs to the lower bin
  CHECK(lags.lag_of(3 * lags.bin_width()) == 2);

  // horizontal and vertical unit neighbours: 2 * 10 * 9
  CHECK(lags.pair_count(2) == 180);

  // brute-force pair count per bin
  std::vector<std::size_t> brute(15, 0);
  for (int i = 0; i < 100; ++i)
    for (int j = i + 1; j < 100; ++j) {
      const double d = (coords.row(i) - coords.row(j)).norm();
      if (d > lags.max_lag()) continue;
      const int b = static_cast<int>(std::ceil(d / lags.bin_width() - 1e-12)) - 1;
      ++brute[static_cast<std::size_t>(b)];
    }
  for (std::size_t h = 0; h < 15; ++h) CHECK(lags.pair_count(h) == brute[h]);

  // directed neighbour lists count each pair twice
  for (std::size_t h = 0; h < 15; ++h) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < 100; ++i) s += lags.site_pair_count(i, h);
    CHECK(s == 2 * lags.pair_count(h));
  }
  // corner site: 2 unit neighbours
  CHECK(lags.site_pair_count(0, 2) == 2);
  CHECK(lags.site_pair_count(55, 2) == 4);
}

TEST_CASE("lag structure errors and explicit max_lag") {
  Matrix same(3, 2);
  same.setZero();
  CHECK(code_of([&] { build_lag_structure(same, 5); }) == ErrorCode::no_pairs);
  CHECK(code_of([&] { build_lag_structure(Matrix::Zero(1, 2), 5); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([&] { build_lag_structure(grid_coords(3, 3), 0); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([&] { build_lag_structure(Matrix::Zero(4, 3), 2); }) ==
        ErrorCode::invalid_dimension);
  CHECK(code_of([&] { build_lag_structure(grid_coords(3, 3), 4, 0.5); }) == ErrorCode::no_pairs);
  CHECK(code_of([&] { build_lag_structure(grid_coords(3, 3), 4, -1.0); }) ==
        ErrorCode::invalid_argument);
  const auto lags = build_lag_structure(grid_coords(3, 3), 4, 2.0);
  CHECK(lags.max_lag() == 2.0);
  CHECK(lags.lag_of(1.0) == 1);
}

TEST_CASE("empirical variograms") {
  SUBCASE("identical curves give zero") {
    Matrix a(9, 3);
    a.rowwise() = Eigen::RowVector3d(1, -2, 0.5);
    const auto d = fixture::dataset_from(grid_coords(3, 3), a);
    const auto lags = build_lag_structure(d.coords(), 3);
    const auto g = empirical_trace_variogram(d, lags);
    for (std::size_t h = 0; h < g.semivariance.size(); ++h) CHECK(g.semivariance[h] == 0.0);
  }
  SUBCASE("a single pair gives half the squared distance") {
    Matrix c(2, 2), a(2, 2);
    c << 0, 0, 3, 4;
    a << 1, 0, 0, 2;
    const auto d = fixture::dataset_from(c, a);
    const auto lags = build_lag_structure(c, 4, 10.0);
    const auto g = empirical_trace_variogram(d, lags);
    const int b = lags.lag_of(5.0);
    CHECK(g.pair_counts[static_cast<std::size_t>(b)] == 1);
    CHECK(g.semivariance[static_cast<std::size_t>(b)] == doctest::Approx(2.5));
    CHECK(g.populated() == 1);
    const auto c0 = centered_variogram(d, lags, 0);
    const auto c1 = centered_variogram(d, lags, 1);
    CHECK(c0.semivariance == g.semivariance);
    CHECK(c1.semivariance == g.semivariance);
  }
  SUBCASE("pair-weighted centered variograms average to the trace variogram") {
    for (unsigned seed : {1u, 2u, 3u}) {
      const auto d = fixture::random_dataset(6, 5, 4, seed);
      const auto lags = build_lag_structure(d.coords(), 8);
      const auto g = empirical_trace_variogram(d, lags);
      std::vector<double> acc(8, 0.0);
      for (int i = 0; i < d.size(); ++i) {
        const auto c = centered_variogram(d, lags, i);
        for (std::size_t h = 0; h < 8; ++h)
          acc[h] += static_cast<double>(c.pair_counts[h]) * c.semivariance[h];
      }
      for (std::size_t h = 0; h < 8; ++h) {
        if (!g.present(h)) continue;
        CHECK(acc[h] / (2.0 * static_cast<double>(g.pair_counts[h])) ==
              doctest::Approx(g.semivariance[h]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("subsets restrict both ends of a pair") {
    const auto d = fixture::random_dataset(4, 4, 3, 9);
    const auto lags = build_lag_structure(d.coords(), 5);
    const std::vector<int> sub{0, 1, 4, 5};
    const auto g = empirical_trace_variogram(d, lags, SiteSubset(sub));
    std::vector<double> sum(5, 0.0);
    std::vector<std::size_t> cnt(5, 0);
    for (std::size_t x = 0; x < sub.size(); ++x)
      for (std::size_t y = x + 1; y < sub.size(); ++y) {
        const int b = lags.lag_of((d.coords().row(sub[x]) - d.coords().row(sub[y])).norm());
        if (b < 0) continue;
        const Vector diff = (d.coefficients().row(sub[x]) - d.coefficients().row(sub[y])).transpose();
        sum[static_cast<std::size_t>(b)] += diff.squaredNorm();
        ++cnt[static_cast<std::size_t>(b)];
      }
    for (std::size_t h = 0; h < 5; ++h) {
      CHECK(g.pair_counts[h] == cnt[h]);
      if (cnt[h]) CHECK(g.semivariance[h] == doctest::Approx(sum[h] / (2.0 * cnt[h])));
    }
    CHECK(code_of([&] { centered_variogram(d, lags, 2, SiteSubset(sub)); }) ==
          ErrorCode::invalid_argument);
    CHECK(code_of([&] { centered_variogram(d, lags, 16); }) == ErrorCode::invalid_argument);
  }
}

TEST_CASE("variogram models") {
  VariogramModel m{VariogramFamily::exponential, 0.5, 2.0, 1.0};
  CHECK(eval_model(m, 0.0) == 0.0);
  CHECK(eval_model(m, 1.0) == doctest::Approx(0.5 + 2.0 * (1 - std::exp(-1.0))));
  CHECK(practical_range(m) == doctest::Approx(3.0));
  CHECK(eval_model(m, practical_range(m)) == doctest::Approx(0.5 + 2.0 * (1 - std::exp(-3.0))));

  m.family = VariogramFamily::gaussian;
  CHECK(eval_model(m, 2.0) == doctest::Approx(0.5 + 2.0 * (1 - std::exp(-4.0))));
  CHECK(practical_range(m) == doctest::Approx(std::sqrt(3.0)));

  m.family = VariogramFamily::spherical;
  CHECK(eval_model(m, 0.5) == doctest::Approx(0.5 + 2.0 * (0.75 - 0.0625)));
  CHECK(eval_model(m, 1.0) == doctest::Approx(2.5));
  CHECK(eval_model(m, 7.0) == doctest::Approx(2.5));
  CHECK(practical_range(m) == doctest::Approx(1.0));

  for (auto f : {VariogramFamily::exponential, VariogramFamily::gaussian,
                 VariogramFamily::spherical}) {
    m.family = f;
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double v = eval_model(m, 0.05 * i);
      CHECK(v >= prev);
      CHECK(v <= m.sill() + 1e-15);
      prev = v;
    }
  }
  CHECK(code_of([&] { eval_model(m, -1.0); }) == ErrorCode::invalid_argument);
  CHECK(parse_family("gaussian") == VariogramFamily::gaussian);
  CHECK(code_of([] { parse_family("matern"); }) == ErrorCode::invalid_argument);
  CHECK(parse_weighting("wls") == Weighting::wls);
}

TEST_CASE("model fitting") {
  SUBCASE("recovers exact parameters") {
    const std::vector<VariogramModel> truth{
        {VariogramFamily::exponential, 0.3, 2.0, 1.5},
        {VariogramFamily::gaussian, 0.0, 5.0, 2.0},
        {VariogramFamily::spherical, 0.1, 1.0, 4.0},
    };
    for (const auto& t : truth)
      for (auto w : {Weighting::ols, Weighting::wls}) {
        const auto emp = synthetic(t, 15, 0.5);
        const auto fit = fit_model(emp, t.family, w);
        CAPTURE(to_string(t.family));
        CHECK(fit.model.nugget == doctest::Approx(t.nugget).epsilon(1e-4).scale(1.0));
        CHECK(fit.model.partial_sill == doctest::Approx(t.partial_sill).epsilon(1e-4));
        CHECK(fit.model.range == doctest::Approx(t.range).epsilon(1e-4));
        CHECK(fit.objective < 1e-10);
        CHECK_FALSE(fit.degenerate);
      }
  }
  SUBCASE("objective never exceeds any starting point") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    const auto base = synthetic({VariogramFamily::exponential, 0.2, 1.0, 1.0}, 12, 0.4);
    for (int rep = 0; rep < 5; ++rep) {
      auto emp = base;
      for (auto& v : emp.semivariance) v *= u(rng);
      for (auto f : {VariogramFamily::exponential, VariogramFamily::gaussian,
                     VariogramFamily::spherical}) {
        const auto fit = fit_model(emp, f, Weighting::ols);
        REQUIRE(fit.start_objectives.size() == 5);
        for (double s : fit.start_objectives) CHECK(fit.objective <= s);
        CHECK(fit.model.nugget >= 0.0);
        CHECK(fit.model.partial_sill > 0.0);
        CHECK(fit.model.range > 0.0);
      }
    }
  }
  SUBCASE("scale invariance") {
    const auto emp = synthetic({VariogramFamily::exponential, 0.2, 1.0, 1.0}, 12, 0.4);
    auto scaled = emp;
    for (auto& v : scaled.semivariance) v *= 1000.0;
    for (auto& h : scaled.lag_centers) h *= 10.0;
    const auto a = fit_model(emp, VariogramFamily::exponential, Weighting::ols);
    const auto b = fit_model(scaled, VariogramFamily::exponential, Weighting::ols);
    CHECK(b.model.partial_sill == doctest::Approx(1000.0 * a.model.partial_sill).epsilon(1e-4));
    CHECK(b.model.range == doctest::Approx(10.0 * a.model.range).epsilon(1e-4));
  }
  SUBCASE("degenerate and insufficient input") {
    auto emp = synthetic({VariogramFamily::exponential, 0.0, 1.0, 1.0}, 6, 0.5);
    for (auto& v : emp.semivariance) v = 0.0;
    const auto fit = fit_model(emp, VariogramFamily::exponential, Weighting::ols);
    CHECK(fit.degenerate);
    CHECK(fit.objective < 1e-20);

    auto sparse = synthetic({VariogramFamily::exponential, 0.0, 1.0, 1.0}, 6, 0.5);
    for (std::size_t h = 2; h < 6; ++h) sparse.pair_counts[h] = 0;
    CHECK(code_of([&] { fit_model(sparse, VariogramFamily::exponential, Weighting::ols); }) ==
          ErrorCode::insufficient_data);
  }
  SUBCASE("absent lags do not enter the objective") {
    auto emp = synthetic({VariogramFamily::exponential, 0.0, 1.0, 1.0}, 6, 0.5);
    emp.pair_counts[3] = 0;
    emp.semivariance[3] = 0.0;
    const VariogramModel m{VariogramFamily::exponential, 0.0, 1.0, 1.0};
    CHECK(fit_objective(emp, m, Weighting::ols) == doctest::Approx(0.0));
  }
}
