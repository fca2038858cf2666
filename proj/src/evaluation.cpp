#include "geoclust/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "geoclust/error.hpp"

namespace geoclust {

namespace {

double pairs(double c) { return 0.5 * c * (c - 1.0); }

}  // namespace

double rand_index(std::span<const int> p, std::span<const int> q) {
  require(p.size() == q.size(), ErrorCode::invalid_argument,
          "partitions have different lengths");
  const double n = static_cast<double>(p.size());
  if (p.size() < 2) return 1.0;
  std::map<int, double> row, col;
  std::map<std::pair<int, int>, double> cell;
  for (std::size_t i = 0; i < p.size(); ++i) {
    row[p[i]] += 1.0;
    col[q[i]] += 1.0;
    cell[{p[i], q[i]}] += 1.0;
  }
  double same_both = 0.0, same_p = 0.0, same_q = 0.0;
  for (const auto& [k, c] : cell) same_both += pairs(c);
  for (const auto& [k, c] : row) same_p += pairs(c);
  for (const auto& [k, c] : col) same_q += pairs(c);
  const double total = pairs(n);
  // agreements = together in both + apart in both
  return (total + 2.0 * same_both - same_p - same_q) / total;
}

double rand_index(const Partition& p, const Partition& q) {
  return rand_index(p.assignment, q.assignment);
}

FamilySelection select_family(const FunctionalDataset& dataset, int K,
                              std::span<const VariogramFamily> families,
                              const ClusteringConfig& config) {
  require(!families.empty(), ErrorCode::invalid_argument, "no variogram families given");
  FamilySelection out;
  bool first = true;
  for (VariogramFamily f : families) {
    ClusteringConfig c = config;
    c.K = K;
    c.family = f;
    ClusteringResult r = dc_cluster(dataset, c);
    out.criterion[f] = r.criterion;
    if (first || r.criterion < out.criterion[out.chosen]) out.chosen = f;
    first = false;
    out.runs.emplace(f, std::move(r));
  }
  return out;
}

KSelection select_k(const FunctionalDataset& dataset, std::span<const int> k_range,
                    const ClusteringConfig& config) {
  require(!k_range.empty(), ErrorCode::invalid_argument, "empty K range");
  std::vector<int> ks(k_range.begin(), k_range.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (int k : ks)
    require(k >= 1 && k <= dataset.size(), ErrorCode::invalid_argument,
            "K range must lie within [1, n]");

  KSelection out;
  for (int k : ks) {
    ClusteringConfig c = config;
    c.K = k;
    ClusteringResult r = dc_cluster(dataset, c);
    out.criterion[k] = r.criterion;
    out.runs.emplace(k, std::move(r));
  }
  out.chosen = ks.front();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < ks.size(); ++i) {
    const double d = out.criterion[ks[i - 1]] - out.criterion[ks[i]];
    out.drop[ks[i]] = d;
    if (d < 0.0) out.increases.push_back(ks[i]);
    if (d > best) {
      best = d;
      out.chosen = ks[i];
    }
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace geoclust
