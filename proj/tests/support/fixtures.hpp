#pragma once

#include <random>
#include <string>
#include <vector>

#include "geoclust/fda.hpp"
#include "geoclust/simulation.hpp"

namespace fixture {

// Random coefficients on a jittered grid in a Fourier basis (W = I).
inline geoclust::FunctionalDataset random_dataset(int nx, int ny, int z, unsigned seed,
                                                  double jitter = 0.2) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(-jitter, jitter);
  const int sites = nx * ny;
  geoclust::Matrix coords(sites, 2), a(sites, z);
  std::vector<std::string> ids;
  for (int i = 0; i < sites; ++i) {
    coords(i, 0) = i / ny + u(rng);
    coords(i, 1) = i % ny + u(rng);
    for (int l = 0; l < z; ++l) a(i, l) = n(rng);
    ids.push_back("s" + std::to_string(i));
  }
  auto basis = geoclust::BasisSystem::fourier({0, 1}, z);
  auto gram = geoclust::gram_matrix(basis);
  return {basis, gram, a, coords, ids};
}

// Dataset with the given coordinates and coefficient rows (Fourier basis).
inline geoclust::FunctionalDataset dataset_from(const geoclust::Matrix& coords,
                                                const geoclust::Matrix& a) {
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < coords.rows(); ++i) ids.push_back("s" + std::to_string(i));
  auto basis = geoclust::BasisSystem::fourier({0, 1}, static_cast<int>(a.cols()));
  auto gram = geoclust::gram_matrix(basis);
  return {basis, gram, a, coords, ids};
}

}  // namespace fixture
