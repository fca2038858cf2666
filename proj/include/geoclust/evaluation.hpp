#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "geoclust/clustering.hpp"

namespace geoclust {

/// Share of curve pairs on which two labelings agree (both together or both
/// apart). Labels are arbitrary integers.
double rand_index(std::span<const int> p, std::span<const int> q);
double rand_index(const Partition& p, const Partition& q);

struct FamilySelection {
  VariogramFamily chosen = VariogramFamily::exponential;
  std::map<VariogramFamily, double> criterion;
  std::map<VariogramFamily, ClusteringResult> runs;
};

/// Runs the algorithm once per family from the same seeds and keeps the
/// family with the smallest final criterion (ties: first listed).
FamilySelection select_family(const FunctionalDataset& dataset, int K,
                              std::span<const VariogramFamily> families,
                              const ClusteringConfig& config);

struct KSelection {
  int chosen = 0;
  std::map<int, double> criterion;
  std::map<int, double> drop;      // criterion(K_prev) - criterion(K)
  std::vector<int> increases;      // K values whose criterion exceeds the previous one
  std::map<int, ClusteringResult> runs;
};

/// Runs the algorithm for each K and picks the K reached by the largest drop
/// in criterion. A single K is returned as is.
KSelection select_k(const FunctionalDataset& dataset, std::span<const int> k_range,
                    const ClusteringConfig& config);

struct EvaluationReport {
  std::optional<double> rand_index;
  std::map<int, double> criterion_by_K;
  std::map<VariogramFamily, double> criterion_by_family;
  std::optional<int> chosen_K;
  std::optional<VariogramFamily> chosen_family;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
};

Summary summarize(std::span<const double> values);

}  // namespace geoclust
