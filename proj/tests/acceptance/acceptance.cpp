// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "geoclust/clustering.hpp"
#include "geoclust/evaluation.hpp"
#include "geoclust/simulation.hpp"
#include "geoclust/variogram.hpp"
#include "../support/oracles.hpp"

using namespace geoclust;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs f(0..count-1) over a small thread pool; results keep index order.
template <class T>
std::vector<T> parallel_map(int count, const std::function<T(int)>& f) {
  std::vector<T> out(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<unsigned>(workers(), static_cast<unsigned>(count)); ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) out[static_cast<std::size_t>(i)] = f(i);
    });
  for (auto& t : pool) t.join();
  return out;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

FunctionalDataset smoothed(const SimulatedField& field, int z = 8) {
  const auto series = field.series();
  return make_dataset(series, build_basis({0, 1}, z));
}

Matrix random_layout(std::mt19937& rng, int n, int kind) {
  Matrix c(n, 2);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> g(0.0, 0.8);
  for (int i = 0; i < n; ++i) {
    if (kind == 0) {
      c.row(i) << u(rng), u(rng);
    } else if (kind == 1) {
      // a few tight clumps
      const double cx = 2.0 + 3.0 * (i % 3), cy = 2.0 + 3.0 * ((i / 3) % 2);
      c.row(i) << cx + g(rng), cy + g(rng);
    } else {
      // jittered grid
      const int side = static_cast<int>(std::ceil(std::sqrt(n)));
      c.row(i) << (i % side) + 0.3 * g(rng), (i / side) + 0.3 * g(rng);
    }
  }
  return c;
}

FunctionalDataset random_spline_dataset(std::mt19937& rng, const Matrix& coords, int z) {
  std::normal_distribution<double> n;
  Matrix a(coords.rows(), z);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (int l = 0; l < z; ++l) a(i, l) = n(rng);
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < a.rows(); ++i) ids.push_back("s" + std::to_string(i));
  auto basis = build_basis({0, 1}, z);
  auto gram = gram_matrix(basis);
  return {basis, gram, a, coords, ids};
}

// ---------------------------------------------------------------------------

Outcome estimator_equivalence() {
  std::mt19937 rng(101);
  const int z = 8, order = 4, panels = 512;
  const auto knots = oracle::clamped_knots(0, 1, z, order);
  const auto cuts = oracle::distinct(knots);
  // Simpson nodes and weights over each knot span
  std::vector<double> nodes, weights;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double h = (cuts[s + 1] - cuts[s]) / panels;
    for (int i = 0; i <= panels; ++i) {
      nodes.push_back(cuts[s] + i * h);
      weights.push_back(h / 3.0 * (i == 0 || i == panels ? 1.0 : (i % 2 ? 4.0 : 2.0)));
    }
  }
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = random_spline_dataset(rng, random_layout(rng, 25, rep % 3), z);
    const auto lags = build_lag_structure(d.coords(), 10);
    const auto g = empirical_trace_variogram(d, lags);
    // curve values at the nodes by Cox-de Boor
    Matrix values(25, static_cast<Eigen::Index>(nodes.size()));
    for (int i = 0; i < 25; ++i)
      for (std::size_t q = 0; q < nodes.size(); ++q)
        values(i, static_cast<Eigen::Index>(q)) =
            oracle::curve(knots, order, d.coefficients().row(i).transpose(), nodes[q]);
    for (std::size_t h = 0; h < lags.n_lags(); ++h) {
      if (!g.present(h)) continue;
      double sum = 0.0;
      for (const auto& p : lags.pairs(h)) {
        double integral = 0.0;
        for (std::size_t q = 0; q < nodes.size(); ++q) {
          const double diff = values(p.i, static_cast<Eigen::Index>(q)) -
                              values(p.j, static_cast<Eigen::Index>(q));
          integral += weights[q] * diff * diff;
        }
        sum += integral;
      }
      const double ref = sum / (2.0 * static_cast<double>(lags.pair_count(h)));
      worst = std::max(worst, std::abs(g.semivariance[h] - ref) / ref);
    }
  }
  return {worst <= 1e-6, fmt("max relative error %.2e over 20 datasets", worst)};
}

Outcome centered_identity() {
  std::mt19937 rng(202);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 15 + rep % 20;
    const auto d = random_spline_dataset(rng, random_layout(rng, n, rep % 3), 6);
    const auto lags = build_lag_structure(d.coords(), 8);
    const auto g = empirical_trace_variogram(d, lags);
    std::vector<double> acc(lags.n_lags(), 0.0);
    for (int i = 0; i < n; ++i) {
      const auto c = centered_variogram(d, lags, i);
      for (std::size_t h = 0; h < lags.n_lags(); ++h)
        acc[h] += static_cast<double>(c.pair_counts[h]) * c.semivariance[h];
    }
    for (std::size_t h = 0; h < lags.n_lags(); ++h) {
      if (!g.present(h)) continue;
      const double avg = acc[h] / (2.0 * static_cast<double>(g.pair_counts[h]));
      worst = std::max(worst, std::abs(avg - g.semivariance[h]) / g.semivariance[h]);
    }
  }
  return {worst <= 1e-10, fmt("max relative gap %.2e over 50 datasets", worst)};
}

Outcome monotone_criterion() {
  const auto d = smoothed(make_benchmark(1, 1));
  struct Run {
    bool monotone = true;
    bool converged = false;
    int iterations = 0;
  };
  const auto runs = parallel_map<Run>(100, [&](int r) {
    ClusteringConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(r + 1);
    cfg.n_restarts = 1;
    const auto res = dc_cluster(d, cfg);
    Run out;
    for (std::size_t t = 1; t < res.criterion_trace.size(); ++t)
      out.monotone = out.monotone && res.criterion_trace[t] <= res.criterion_trace[t - 1];
    out.converged = res.converged() && res.iterations <= 100;
    out.iterations = res.iterations;
    return out;
  });
  int mono = 0, conv = 0, most = 0;
  for (const auto& r : runs) {
    mono += r.monotone;
    conv += r.converged;
    most = std::max(most, r.iterations);
  }
  return {mono == 100 && conv == 100,
          fmt("%d/100 monotone, %d/100 converged, at most %d iterations", mono, conv, most)};
}

double mean_rand_index(int dataset_id) {
  const auto field = make_benchmark(dataset_id, 1);
  const auto d = smoothed(field);
  std::vector<int> truth(field.labels.begin(), field.labels.end());
  const auto ri = parallel_map<double>(100, [&](int r) {
    ClusteringConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(r + 1);
    cfg.n_restarts = 1;
    return rand_index(dc_cluster(d, cfg).partition.assignment, truth);
  });
  return summarize(ri).mean;
}

Outcome table2() {
  const double r1 = mean_rand_index(1);
  const double r6 = mean_rand_index(6);
  return {r1 >= 0.80 && r6 >= 0.70 && r1 >= r6,
          fmt("mean RI dataset 1 = %.3f (need >= 0.80), dataset 6 = %.3f (need >= 0.70)", r1,
              r6)};
}

Outcome parameter_recovery() {
  const auto spec = benchmark_spec(1);
  const auto params = spec.cluster_params(0);
  const Matrix coords = grid_coords(spec.block_nx, spec.block_ny);
  const auto times = unit_time_grid(spec.m);
  struct Fit {
    double sill = 0.0, range = 0.0;
  };
  const auto fits = parallel_map<Fit>(20, [&](int s) {
    const auto d = smoothed(simulate_field(params, coords, times, static_cast<std::uint64_t>(s + 1)));
    const auto lags = build_lag_structure(d.coords(), 15);
    const auto fit = fit_model(empirical_trace_variogram(d, lags), VariogramFamily::exponential,
                               Weighting::ols);
    return Fit{fit.model.sill(), practical_range(fit.model)};
  });
  std::vector<double> sills, ranges;
  for (const auto& f : fits) {
    sills.push_back(f.sill);
    ranges.push_back(f.range);
  }
  const double sill = summarize(sills).mean, range = summarize(ranges).mean;
  std::sort(ranges.begin(), ranges.end());
  const double target = params.sigma * params.sigma;
  const bool ok = std::abs(sill - target) <= 0.15 * target && std::abs(range - 1.0) <= 0.25;
  return {ok, fmt("mean sill %.2f (target %.0f +-15%%), mean practical range %.3f (target 1 "
                  "+-25%%, median %.3f)",
                  sill, target, range, 0.5 * (ranges[9] + ranges[10]))};
}

Outcome rand_index_oracle() {
  const std::vector<int> a{1, 1, 2, 2}, b{1, 2, 1, 2};
  bool ok = rand_index(a, b) == 2.0 / 6.0;
  std::mt19937 rng(606);
  int agree = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = std::uniform_int_distribution<int>(2, 200)(rng);
    const int kp = std::uniform_int_distribution<int>(1, 8)(rng);
    const int kq = std::uniform_int_distribution<int>(1, 8)(rng);
    std::vector<int> p(static_cast<std::size_t>(n)), q(p.size());
    for (auto& x : p) x = std::uniform_int_distribution<int>(1, kp)(rng);
    for (auto& x : q) x = std::uniform_int_distribution<int>(1, kq)(rng);
    agree += rand_index(p, q) == oracle::rand_index(p, q);
  }
  ok = ok && agree == 100;
  return {ok, fmt("worked example %s, %d/100 exact matches",
                  rand_index(a, b) == 2.0 / 6.0 ? "2/6" : "wrong", agree)};
}

Outcome simulator_validity() {
  const std::vector<double> distances{1.0, 2.0, 4.0};
  Matrix coords(4, 2);
  coords << 0, 0, 1, 0, 2, 0, 4, 0;
  const auto times = unit_time_grid(30);
  std::string detail;
  bool ok = true;
  for (double c : {0.5, 3.0}) {
    SeparableCovParams p;
    p.sigma = 5.0;
    p.c = c;
    const int reps = 200;
    // per-replicate mean over time points of y(0, t) y(h, t)
    std::vector<std::vector<double>> prod(distances.size(), std::vector<double>(reps));
    for (int r = 0; r < reps; ++r) {
      const Matrix y = sample_separable(p, coords, times, static_cast<std::uint64_t>(1000 + r));
      for (std::size_t k = 0; k < distances.size(); ++k)
        prod[k][static_cast<std::size_t>(r)] = (y.row(0).array() * y.row(k + 1).array()).mean();
    }
    for (std::size_t k = 0; k < distances.size(); ++k) {
      const auto s = summarize(prod[k]);
      const double se = s.sd / std::sqrt(static_cast<double>(reps));
      const double expect = p.sigma * p.sigma * spatial_cov(distances[k], p);
      const double z = std::abs(s.mean - expect) / se;
      ok = ok && z <= 3.0;
      detail += fmt("c=%g h=%g z=%.2f; ", c, distances[k], z);
    }
  }
  SeparableCovParams t;
  t.a = 1.0;
  t.alpha = 0.1;
  const bool ct = temporal_cov(0.0, t) == 1.0 && std::abs(temporal_cov(1.0, t) - 0.5) < 1e-15;
  ok = ok && ct;
  detail += ct ? "C_T(0)=1, C_T(1)=0.5" : "temporal covariance values wrong";
  return {ok, detail};
}

Outcome family_selection() {
  const std::vector<VariogramFamily> families{VariogramFamily::exponential,
                                              VariogramFamily::gaussian,
                                              VariogramFamily::spherical};
  const auto chosen = parallel_map<int>(20, [&](int s) {
    const auto d = smoothed(make_benchmark(1, static_cast<std::uint64_t>(s + 1)));
    ClusteringConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s + 1);
    return static_cast<int>(select_family(d, 3, families, cfg).chosen);
  });
  int counts[3] = {0, 0, 0};
  for (int c : chosen) ++counts[c];
  const int expo = counts[static_cast<int>(VariogramFamily::exponential)];
  return {expo >= 12, fmt("exponential %d/20, spherical %d/20, gaussian %d/20", expo,
                          counts[static_cast<int>(VariogramFamily::spherical)],
                          counts[static_cast<int>(VariogramFamily::gaussian)])};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& cmd) {
  return std::system((cmd + " > /dev/null 2>&1").c_str());
}

Outcome determinism() {
  const std::string cli = GEOCLUST_CLI_PATH;
  const fs::path root = fs::temp_directory_path() / "geoclust_acceptance";
  fs::remove_all(root);
  const fs::path sim = root / "sim", clu = root / "cluster", sel = root / "select";
  int rc = run(cli + " simulate --dataset 2 --seed 7 --out " + sim.string());
  rc |= run(cli + " cluster --input " + (sim / "series.csv").string() +
            " --k 3 --seed 5 --restarts 3 --out " + clu.string());
  rc |= run(cli + " select --input " + (sim / "series.csv").string() +
            " --k-range 2..3 --families exponential,spherical --seed 5 --restarts 1 --out " +
            sel.string());
  if (rc != 0) return {false, "a CLI command failed"};
  int files = 0, same = 0;
  for (const auto& dir : {sim, clu, sel}) {
    const fs::path again = root / ("replay_" + dir.filename().string());
    if (run(cli + " replay " + (dir / "manifest.json").string() + " --out " + again.string()) != 0)
      return {false, "replay of " + dir.filename().string() + " failed"};
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().filename() == "manifest.json") continue;
      ++files;
      same += slurp(e.path()) == slurp(again / e.path().filename());
    }
  }
  return {files > 0 && same == files, fmt("%d/%d output files byte-identical", same, files)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {"estimator equivalence", estimator_equivalence},
      {"centered-variogram identity", centered_identity},
      {"criterion monotonicity", monotone_criterion},
      {"benchmark Rand index", table2},
      {"parameter recovery", parameter_recovery},
      {"Rand index oracle", rand_index_oracle},
      {"simulator validity", simulator_validity},
      {"family selection", family_selection},
      {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
