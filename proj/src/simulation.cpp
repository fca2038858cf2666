#include "geoclust/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Cholesky>

#include "geoclust/error.hpp"

namespace geoclust {

void SeparableCovParams::validate() const {
  require(sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
  require(c > 0.0, ErrorCode::invalid_argument, "spatial decay c must be positive");
  require(nu >= 0.0 && nu <= 1.0, ErrorCode::invalid_argument, "nugget share must lie in [0, 1]");
  require(a > 0.0, ErrorCode::invalid_argument, "temporal scale a must be positive");
  require(alpha > 0.0 && alpha <= 1.0, ErrorCode::invalid_argument, "alpha must lie in (0, 1]");
}

double spatial_cov(double h, const SeparableCovParams& p) {
  require(h >= 0.0, ErrorCode::invalid_argument, "distance must be non-negative");
  return (1.0 - p.nu) * std::exp(-p.c * h) + (h == 0.0 ? p.nu : 0.0);
}

double temporal_cov(double u, const SeparableCovParams& p) {
  require(!p.printed_temporal_form, ErrorCode::invalid_argument,
          "temporal form (u + a|u|^{2 alpha})^-1 is infinite at u = 0 and is not a covariance; "
          "use (1 + a|u|^{2 alpha})^-1");
  require(u >= 0.0, ErrorCode::invalid_argument, "time lag must be non-negative");
  return 1.0 / (1.0 + p.a * std::pow(u, 2.0 * p.alpha));
}

SeparableCovParams BenchmarkSpec::cluster_params(int k) const {
  SeparableCovParams p;
  p.sigma = sigma[static_cast<std::size_t>(k)];
  p.c = c[static_cast<std::size_t>(k)];
  p.nu = nu;
  p.a = a;
  p.alpha = alpha;
  return p;
}

BenchmarkSpec benchmark_spec(int dataset_id, int m) {
  require(dataset_id >= 1 && dataset_id <= 6, ErrorCode::invalid_argument,
          "benchmark dataset id must be in 1..6");
  require(m >= 2, ErrorCode::invalid_argument, "need at least 2 time points");
  static constexpr std::array<std::array<double, 3>, 2> sigmas{{{5, 10, 15}, {7, 10, 13}}};
  static constexpr std::array<std::array<double, 3>, 3> decays{{{3, 7, 10}, {5, 7, 9}, {3, 9, 15}}};
  BenchmarkSpec s;
  s.dataset_id = dataset_id;
  s.sigma = sigmas[static_cast<std::size_t>((dataset_id - 1) / 3)];
  s.c = decays[static_cast<std::size_t>((dataset_id - 1) % 3)];
  s.m = m;
  return s;
}

std::vector<SampledSeries> SimulatedField::series() const {
  std::vector<SampledSeries> out(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    auto& s = out[static_cast<std::size_t>(i)];
    char id[16];
    std::snprintf(id, sizeof id, "s%03d", static_cast<int>(i + 1));
    s.site_id = id;
    s.coords = {coords(i, 0), coords(i, 1)};
    s.times = times;
    s.values.resize(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      s.values[static_cast<std::size_t>(j)] = values(i, j);
  }
  return out;
}

Matrix grid_coords(int nx, int ny, double x0, double y0) {
  require(nx >= 1 && ny >= 1, ErrorCode::invalid_argument, "grid needs positive extents");
  Matrix g(nx * ny, 2);
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) {
      g(ix * ny + iy, 0) = x0 + ix;
      g(ix * ny + iy, 1) = y0 + iy;
    }
  return g;
}

std::vector<double> unit_time_grid(int m) {
  require(m >= 2, ErrorCode::invalid_argument, "need at least 2 time points");
  std::vector<double> t(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) t[static_cast<std::size_t>(j)] = static_cast<double>(j) / (m - 1);
  return t;
}

namespace {

Matrix cholesky(const Matrix& cov, const char* what) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  llt.compute(cov + 1e-10 * Matrix::Identity(cov.rows(), cov.cols()));
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::simulation_failure,
         std::string(what) + " covariance is not positive definite even after jitter");
  return llt.matrixL();
}

}  // namespace

Matrix sample_separable(const SeparableCovParams& params, const Matrix& coords,
                        std::span<const double> times, std::uint64_t seed) {
  params.validate();
  const auto n = coords.rows();
  const auto m = static_cast<Eigen::Index>(times.size());
  Matrix cs(n, n), ct(m, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cs(i, j) = spatial_cov((coords.row(i) - coords.row(j)).norm(), params);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      ct(i, j) = temporal_cov(std::abs(times[static_cast<std::size_t>(i)] -
                                       times[static_cast<std::size_t>(j)]),
                              params);
  const Matrix ls = cholesky(cs, "spatial");
  const Matrix lt = cholesky(ct, "temporal");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix g(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) g(i, j) = normal(rng);
  return params.sigma * ls * g * lt.transpose();
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

SimulatedField simulate_field(const BenchmarkSpec& spec, std::uint64_t seed) {
  const int per = spec.block_nx * spec.block_ny;
  SimulatedField f;
  f.times = unit_time_grid(spec.m);
  f.values.resize(3 * per, spec.m);
  f.coords.resize(3 * per, 2);
  for (int k = 0; k < 3; ++k) {
    const Matrix block = grid_coords(spec.block_nx, spec.block_ny, k * spec.block_nx, 0.0);
    f.coords.middleRows(k * per, per) = block;
    f.values.middleRows(k * per, per) =
        sample_separable(spec.cluster_params(k), block, f.times, stream_seed(seed, k));
    f.labels.insert(f.labels.end(), static_cast<std::size_t>(per), k + 1);
  }
  return f;
}

SimulatedField simulate_field(const SeparableCovParams& params, const Matrix& coords,
                              std::span<const double> times, std::uint64_t seed) {
  SimulatedField f;
  f.times.assign(times.begin(), times.end());
  f.coords = coords;
  f.values = sample_separable(params, coords, times, stream_seed(seed, 0));
  f.labels.assign(static_cast<std::size_t>(coords.rows()), 1);
  return f;
}

SimulatedField make_benchmark(int dataset_id, std::uint64_t seed, int m) {
  return simulate_field(benchmark_spec(dataset_id, m), seed);
}

}  // namespace geoclust
