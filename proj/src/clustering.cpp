#include "geoclust/clustering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "geoclust/error.hpp"

namespace geoclust {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// partitions and configuration

std::vector<int> Partition::counts() const {
  std::vector<int> c(static_cast<std::size_t>(std::max(K, 0)), 0);
  for (int a : assignment)
    if (a >= 0 && a < K) ++c[static_cast<std::size_t>(a)];
  return c;
}

std::vector<int> Partition::members(int k) const {
  std::vector<int> m;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == k) m.push_back(static_cast<int>(i));
  return m;
}

void Partition::validate() const {
  require(K >= 1, ErrorCode::invalid_partition, "partition needs K >= 1");
  for (int a : assignment)
    require(a >= 0 && a < K, ErrorCode::invalid_partition, "cluster label out of range");
  const auto c = counts();
  for (int k = 0; k < K; ++k)
    require(c[static_cast<std::size_t>(k)] > 0, ErrorCode::invalid_partition,
            "cluster " + std::to_string(k + 1) + " is empty");
}

std::string_view to_string(HStarRule rule) {
  switch (rule) {
    case HStarRule::max: return "max";
    case HStarRule::min: return "min";
    case HStarRule::median: return "median";
  }
  return "?";
}

HStarRule parse_h_star_rule(std::string_view name) {
  if (name == "max") return HStarRule::max;
  if (name == "min") return HStarRule::min;
  if (name == "median") return HStarRule::median;
  fail(ErrorCode::invalid_argument, "unknown h* rule '" + std::string(name) + "'");
}

std::string_view to_string(RhoRule rule) {
  return rule == RhoRule::pair_share ? "pair-share" : "lag-profile";
}

RhoRule parse_rho_rule(std::string_view name) {
  if (name == "pair-share") return RhoRule::pair_share;
  if (name == "lag-profile") return RhoRule::lag_profile;
  fail(ErrorCode::invalid_argument, "unknown rho rule '" + std::string(name) + "'");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::unchanged: return "unchanged";
    case Termination::tolerance: return "tolerance";
    case Termination::criterion_increase: return "criterion-increase";
    case Termination::max_iter: return "max-iter";
  }
  return "?";
}

void ClusteringConfig::validate() const {
  require(K >= 1, ErrorCode::invalid_argument, "K must be >= 1");
  require(max_iter >= 1, ErrorCode::invalid_argument, "max_iter must be >= 1");
  require(n_lags >= 1, ErrorCode::invalid_argument, "n_lags must be >= 1");
  require(n_restarts >= 1, ErrorCode::invalid_argument, "n_restarts must be >= 1");
  require(tol >= 0.0, ErrorCode::invalid_argument, "tol must be non-negative");
  require(jobs >= 1, ErrorCode::invalid_argument, "jobs must be >= 1");
}

// ---------------------------------------------------------------------------
// pair statistics

PairCache::PairCache(const FunctionalDataset& dataset, const LagStructure& lags)
    : lags_(&lags), coords_(dataset.coords()) {
  require(static_cast<Eigen::Index>(lags.n_sites()) == dataset.size(), ErrorCode::invalid_dimension,
          "lag structure and dataset have different numbers of sites");
  const std::size_t n = lags.n_sites();
  d2_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = lags.neighbors(i);
    d2_[i].resize(nb.size());
    for (std::size_t q = 0; q < nb.size(); ++q)
      d2_[i][q] = dataset.distance_sq(static_cast<Eigen::Index>(i), nb[q].site);
  }
  nearest_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (coords_.row(static_cast<Eigen::Index>(i)) -
                        coords_.row(static_cast<Eigen::Index>(j))).squaredNorm();
      if (d < best) {
        best = d;
        nearest_[i] = static_cast<int>(j);
      }
    }
  }
}

ClusterStats cluster_stats(const PairCache& cache, const Partition& partition) {
  const std::size_t n = cache.n_sites();
  require(partition.size() == n, ErrorCode::invalid_partition,
          "partition length does not match the number of curves");
  ClusterStats s;
  s.K = partition.K;
  s.n_lags = cache.lags().n_lags();
  s.sum.assign(n * static_cast<std::size_t>(s.K) * s.n_lags, 0.0);
  s.count.assign(s.sum.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = cache.lags().neighbors(i);
    const auto d2 = cache.distances(i);
    for (std::size_t q = 0; q < nb.size(); ++q) {
      const int k = partition.assignment[static_cast<std::size_t>(nb[q].site)];
      const auto idx = s.at(i, k, static_cast<std::size_t>(nb[q].lag));
      s.sum[idx] += d2[q];
      ++s.count[idx];
    }
  }
  return s;
}

std::vector<EmpiricalVariogram> cluster_variograms(const PairCache& cache, const ClusterStats& stats,
                                                   const Partition& partition) {
  const std::size_t L = stats.n_lags;
  std::vector<EmpiricalVariogram> out(static_cast<std::size_t>(partition.K));
  std::vector<double> sum(L);
  for (int k = 0; k < partition.K; ++k) {
    auto& v = out[static_cast<std::size_t>(k)];
    v.lag_centers = cache.lags().centers();
    v.semivariance.assign(L, 0.0);
    v.pair_counts.assign(L, 0);
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t i = 0; i < partition.size(); ++i) {
      if (partition.assignment[i] != k) continue;
      for (std::size_t h = 0; h < L; ++h) {
        sum[h] += stats.sum[stats.at(i, k, h)];
        v.pair_counts[h] += stats.count[stats.at(i, k, h)];
      }
    }
    for (std::size_t h = 0; h < L; ++h) {
      if (v.pair_counts[h] == 0) continue;
      v.semivariance[h] = sum[h] / (2.0 * static_cast<double>(v.pair_counts[h]));
      v.pair_counts[h] /= 2;  // directed -> unordered
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// criteria

namespace {

double model_criterion(const PairCache& cache, const ClusterStats& stats,
                       const Partition& partition, const std::vector<VariogramModel>& prototypes,
                       double h_star) {
  const auto& centers = cache.lags().centers();
  double total = 0.0;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const int k = partition.assignment[i];
    const auto& proto = prototypes[static_cast<std::size_t>(k)];
    for (std::size_t h = 0; h < stats.n_lags && centers[h] <= h_star; ++h) {
      if (stats.count[stats.at(i, k, h)] == 0) continue;
      const double r = stats.centered(i, k, h) - eval_model(proto, centers[h]);
      total += r * r;
    }
  }
  return total;
}

// squared gap of each curve's centered variogram to its own cluster's trace variogram
std::vector<double> own_mismatch(const ClusterStats& stats, const Partition& partition,
                                 const std::vector<EmpiricalVariogram>& traces) {
  std::vector<double> m(partition.size(), 0.0);
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const int k = partition.assignment[i];
    const auto& g = traces[static_cast<std::size_t>(k)];
    for (std::size_t h = 0; h < stats.n_lags; ++h) {
      if (stats.count[stats.at(i, k, h)] == 0) continue;
      const double r = stats.centered(i, k, h) - g.semivariance[h];
      m[i] += r * r;
    }
  }
  return m;
}

}  // namespace

double model_free_criterion(const PairCache& cache, const ClusterStats& stats,
                            const Partition& partition) {
  const auto traces = cluster_variograms(cache, stats, partition);
  const auto m = own_mismatch(stats, partition, traces);
  return std::accumulate(m.begin(), m.end(), 0.0);
}

double criterion(const FunctionalDataset& dataset, const Partition& partition,
                 const std::vector<VariogramModel>& prototypes, const LagStructure& lags,
                 double h_star) {
  partition.validate();
  require(prototypes.size() == static_cast<std::size_t>(partition.K), ErrorCode::invalid_argument,
          "one prototype per cluster is required");
  const PairCache cache(dataset, lags);
  return model_criterion(cache, cluster_stats(cache, partition), partition, prototypes, h_star);
}

// ---------------------------------------------------------------------------
// representation and allocation

std::vector<VariogramModel> representation_step(const FunctionalDataset& dataset,
                                                const Partition& partition,
                                                const LagStructure& lags,
                                                const ClusteringConfig& config) {
  partition.validate();
  const PairCache cache(dataset, lags);
  const auto traces = cluster_variograms(cache, cluster_stats(cache, partition), partition);
  std::vector<VariogramModel> protos;
  for (const auto& g : traces) protos.push_back(fit_model(g, config.family, config.weighting).model);
  return protos;
}

double choose_h_star(const std::vector<VariogramModel>& prototypes, const LagStructure& lags,
                     HStarRule rule) {
  require(!prototypes.empty(), ErrorCode::invalid_argument, "no prototypes");
  std::vector<double> r;
  for (const auto& p : prototypes) r.push_back(practical_range(p));
  std::sort(r.begin(), r.end());
  double h = r.back();
  if (rule == HStarRule::min) h = r.front();
  if (rule == HStarRule::median) {
    const std::size_t m = r.size() / 2;
    h = r.size() % 2 ? r[m] : 0.5 * (r[m - 1] + r[m]);
  }
  return std::clamp(h, lags.centers().front(), lags.max_lag());
}

Allocation allocation_step(const PairCache& cache, const ClusterStats& stats,
                           const Partition& partition,
                           const std::vector<VariogramModel>& prototypes, double h_star,
                           RhoRule rho) {
  const int K = partition.K;
  const std::size_t n = partition.size();
  const auto& centers = cache.lags().centers();
  require(prototypes.size() == static_cast<std::size_t>(K), ErrorCode::invalid_argument,
          "one prototype per cluster is required");

  // |N_k(h)| and prototype values on the lag grid
  std::vector<double> nk(static_cast<std::size_t>(K) * stats.n_lags, 0.0);
  std::vector<double> gamma(nk.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = partition.assignment[i];
    for (std::size_t h = 0; h < stats.n_lags; ++h)
      nk[static_cast<std::size_t>(k) * stats.n_lags + h] +=
          0.5 * static_cast<double>(stats.count[stats.at(i, k, h)]);
  }
  for (int k = 0; k < K; ++k)
    for (std::size_t h = 0; h < stats.n_lags; ++h)
      gamma[static_cast<std::size_t>(k) * stats.n_lags + h] =
          eval_model(prototypes[static_cast<std::size_t>(k)], centers[h]);

  Allocation out;
  out.partition = partition;
  out.cost = Matrix::Constant(static_cast<Eigen::Index>(n), K, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    int best_k = -1;
    double best = kInf;
    for (int k = 0; k < K; ++k) {
      double c = 0.0, own = 0.0;
      bool eligible = false;
      for (std::size_t h = 0; h < stats.n_lags && centers[h] <= h_star; ++h) {
        const auto cnt = stats.count[stats.at(i, k, h)];
        const double total = nk[static_cast<std::size_t>(k) * stats.n_lags + h];
        if (cnt == 0 || total <= 0.0) continue;
        const double r =
            stats.centered(i, k, h) - gamma[static_cast<std::size_t>(k) * stats.n_lags + h];
        const double w = static_cast<double>(cnt);
        c += r * r * (rho == RhoRule::pair_share ? w / total : w);
        own += w;
        eligible = true;
      }
      if (!eligible) continue;
      if (rho == RhoRule::lag_profile) c /= own;
      out.cost(static_cast<Eigen::Index>(i), k) = c;
      if (c < best) {
        best = c;
        best_k = k;
      }
    }
    if (best_k < 0) {
      best_k = partition.assignment[static_cast<std::size_t>(cache.nearest(i))];
      ++out.fallback;
    }
    out.partition.assignment[i] = best_k;
  }
  return out;
}

Allocation allocation_step(const FunctionalDataset& dataset, const Partition& partition,
                           const std::vector<VariogramModel>& prototypes, const LagStructure& lags,
                           double h_star, RhoRule rho) {
  partition.validate();
  const PairCache cache(dataset, lags);
  return allocation_step(cache, cluster_stats(cache, partition), partition, prototypes, h_star,
                         rho);
}

// ---------------------------------------------------------------------------
// the algorithm

Partition random_partition(std::size_t n, int K, std::uint64_t seed) {
  require(K >= 1 && static_cast<std::size_t>(K) <= n, ErrorCode::invalid_argument,
          "K must lie in [1, n]");
  std::mt19937_64 rng(seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<int> pick(0, K - 1);
  Partition p;
  p.K = K;
  p.assignment.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r)
    p.assignment[static_cast<std::size_t>(order[r])] = r < static_cast<std::size_t>(K)
                                                           ? static_cast<int>(r)
                                                           : pick(rng);
  return p;
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), 0x5eedu};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

bool fittable(const EmpiricalVariogram& g) { return g.populated() >= 3; }

// Rebuilds clusters too small to carry a variogram: the curve that fits its own
// cluster worst moves in, followed by its nearest neighbours until the cluster
// has three populated lags.
int reseed_degenerate(const PairCache& cache, Partition& p) {
  int rebuilt = 0;
  const std::size_t n = p.size();
  for (int guard = 0; guard < 4 * p.K + 4; ++guard) {
    ClusterStats stats = cluster_stats(cache, p);
    auto traces = cluster_variograms(cache, stats, p);
    int bad = -1;
    for (int k = 0; k < p.K && bad < 0; ++k)
      if (!fittable(traces[static_cast<std::size_t>(k)])) bad = k;
    if (bad < 0) return rebuilt;

    auto counts = p.counts();
    auto donor_ok = [&](std::size_t i) {
      const int k = p.assignment[i];
      return k != bad && counts[static_cast<std::size_t>(k)] > 3 &&
             fittable(traces[static_cast<std::size_t>(k)]);
    };
    const auto mismatch = own_mismatch(stats, p, traces);
    int seed = -1;
    for (std::size_t i = 0; i < n; ++i)
      if (donor_ok(i) && (seed < 0 || mismatch[i] > mismatch[static_cast<std::size_t>(seed)]))
        seed = static_cast<int>(i);
    require(seed >= 0, ErrorCode::invalid_partition,
            "cannot rebuild a degenerate cluster: no cluster can donate curves");

    std::vector<std::pair<double, int>> near;
    for (std::size_t j = 0; j < n; ++j)
      if (j != static_cast<std::size_t>(seed))
        near.emplace_back((cache.coords().row(static_cast<Eigen::Index>(j)) -
                           cache.coords().row(seed)).squaredNorm(),
                          static_cast<int>(j));
    std::sort(near.begin(), near.end());

    auto move = [&](int i) {
      --counts[static_cast<std::size_t>(p.assignment[static_cast<std::size_t>(i)])];
      p.assignment[static_cast<std::size_t>(i)] = bad;
      ++counts[static_cast<std::size_t>(bad)];
    };
    move(seed);
    std::vector<int> mem = p.members(bad);
    std::set<int> lags_hit;
    for (std::size_t a = 0; a < mem.size(); ++a)
      for (std::size_t b = a + 1; b < mem.size(); ++b) {
        const double d = (cache.coords().row(mem[a]) - cache.coords().row(mem[b])).norm();
        if (int l = cache.lags().lag_of(d); l >= 0) lags_hit.insert(l);
      }
    for (const auto& [d2, j] : near) {
      if (lags_hit.size() >= 3) break;
      if (!donor_ok(static_cast<std::size_t>(j))) continue;
      for (int q : mem)
        if (int l = cache.lags().lag_of((cache.coords().row(q) - cache.coords().row(j)).norm());
            l >= 0)
          lags_hit.insert(l);
      move(j);
      mem.push_back(j);
    }
    ++rebuilt;
  }
  fail(ErrorCode::invalid_partition, "degenerate clusters could not be rebuilt");
}

struct State {
  Partition partition;
  std::vector<VariogramModel> prototypes;
  std::vector<EmpiricalVariogram> traces;
  double h_star = 0.0;
  double free_crit = 0.0;
  double model_crit = 0.0;
  ClusterStats stats;
};

}  // namespace

ClusteringResult dc_run(const PairCache& cache, const ClusteringConfig& config, Partition initial) {
  config.validate();
  require(initial.K == config.K, ErrorCode::invalid_argument,
          "initial partition has the wrong number of clusters");
  initial.validate();

  ClusteringResult res;
  std::optional<State> prev;
  Partition p = std::move(initial);
  for (int it = 1;; ++it) {
    res.reseeded += reseed_degenerate(cache, p);
    State s;
    s.partition = p;
    s.stats = cluster_stats(cache, p);
    s.traces = cluster_variograms(cache, s.stats, p);
    for (const auto& g : s.traces)
      s.prototypes.push_back(fit_model(g, config.family, config.weighting).model);
    s.h_star = choose_h_star(s.prototypes, cache.lags(), config.h_star_rule);
    s.free_crit = model_free_criterion(cache, s.stats, p);
    s.model_crit = model_criterion(cache, s.stats, p, s.prototypes, s.h_star);

    bool stop = false;
    if (config.stop_on_increase && prev && s.free_crit > prev->free_crit) {
      res.termination = Termination::criterion_increase;
      s = std::move(*prev);
      stop = true;
    } else {
      res.criterion_trace.push_back(s.free_crit);
      res.model_criterion_trace.push_back(s.model_crit);
      res.iterations = it;
      if (prev && std::abs(prev->free_crit - s.free_crit) <= config.tol * prev->free_crit) {
        res.termination = Termination::tolerance;
        stop = true;
      }
    }
    if (!stop) {
      Allocation a = allocation_step(cache, s.stats, p, s.prototypes, s.h_star, config.rho_rule);
      res.fallback_allocations += a.fallback;
      if (a.partition == p) {
        res.termination = Termination::unchanged;
        stop = true;
      } else if (it >= config.max_iter) {
        res.termination = Termination::max_iter;
        stop = true;
      } else {
        p = std::move(a.partition);
      }
    }
    if (stop) {
      res.partition = std::move(s.partition);
      res.prototypes = std::move(s.prototypes);
      res.cluster_variograms = std::move(s.traces);
      res.h_star = s.h_star;
      res.criterion = s.model_crit;
      return res;
    }
    prev = std::move(s);
  }
}

ClusteringResult dc_cluster(const FunctionalDataset& dataset, const ClusteringConfig& config) {
  config.validate();
  require(static_cast<Eigen::Index>(config.K) <= dataset.size(), ErrorCode::invalid_argument,
          "K exceeds the number of curves");
  const LagStructure lags = build_lag_structure(dataset.coords(), config.n_lags, config.max_lag);
  const PairCache cache(dataset, lags);

  const int R = config.n_restarts;
  std::vector<std::optional<ClusteringResult>> runs(static_cast<std::size_t>(R));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(R));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r; (r = next++) < R;) {
      try {
        runs[static_cast<std::size_t>(r)] = dc_run(
            cache, config,
            random_partition(static_cast<std::size_t>(dataset.size()), config.K,
                             restart_seed(config.seed, r)));
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  const int threads = std::min(config.jobs, R);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  int best = 0;
  std::vector<double> crit;
  for (int r = 0; r < R; ++r) {
    crit.push_back(runs[static_cast<std::size_t>(r)]->criterion);
    if (crit.back() < crit[static_cast<std::size_t>(best)]) best = r;
  }
  ClusteringResult out = std::move(*runs[static_cast<std::size_t>(best)]);
  out.restart = best;
  out.restart_criteria = std::move(crit);
  return out;
}

}  // namespace geoclust
