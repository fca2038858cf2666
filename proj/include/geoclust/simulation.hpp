#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "geoclust/fda.hpp"

namespace geoclust {

/// Parameters of the separable covariance sigma^2 C_s(h) C_T(u).
struct SeparableCovParams {
  double sigma = 1.0;
  double c = 1.0;       // spatial decay, inverse distance units
  double nu = 0.0;      // nugget share in [0, 1]
  double a = 1.0;       // temporal scale
  double alpha = 0.1;   // temporal strength in (0, 1]
  bool printed_temporal_form = false;  // (u + a u^{2 alpha})^-1; infinite at 0, always rejected

  void validate() const;
};

/// (1 - nu) exp(-c h) + nu [h = 0]
double spatial_cov(double h, const SeparableCovParams& params);

/// (1 + a u^{2 alpha})^-1
double temporal_cov(double u, const SeparableCovParams& params);

struct BenchmarkSpec {
  int dataset_id = 1;
  std::array<double, 3> sigma{};
  std::array<double, 3> c{};
  double a = 1.0;
  double alpha = 0.1;
  double nu = 0.0;
  int block_nx = 10;  // blocks are laid side by side along x
  int block_ny = 10;
  int m = 30;         // time points on [0, 1]

  SeparableCovParams cluster_params(int k) const;
};

/// Benchmark parameters for datasets 1..6.
BenchmarkSpec benchmark_spec(int dataset_id, int m = 30);

/// Discrete curves on a shared time grid; labels are 1-based.
struct SimulatedField {
  Matrix values;  // n x m
  std::vector<double> times;
  Matrix coords;  // n x 2
  std::vector<int> labels;

  std::vector<SampledSeries> series() const;
};

/// Unit-spaced nx x ny grid with its lower-left corner at (x0, y0).
Matrix grid_coords(int nx, int ny, double x0 = 0.0, double y0 = 0.0);

/// Equally spaced points on [0, 1].
std::vector<double> unit_time_grid(int m);

/// One matrix-normal draw sigma L_s G L_t^T over the given sites and times.
Matrix sample_separable(const SeparableCovParams& params, const Matrix& coords,
                        std::span<const double> times, std::uint64_t seed);

/// Three independent cluster blocks of a benchmark spec.
SimulatedField simulate_field(const BenchmarkSpec& spec, std::uint64_t seed);

/// Single cluster on an arbitrary site layout, labelled 1.
SimulatedField simulate_field(const SeparableCovParams& params, const Matrix& coords,
                              std::span<const double> times, std::uint64_t seed);

SimulatedField make_benchmark(int dataset_id, std::uint64_t seed, int m = 30);

}  // namespace geoclust
