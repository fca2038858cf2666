#include "geoclust/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace geoclust {

namespace {

NelderMeadResult run_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             const NelderMeadOptions& opt, int budget) {
  const auto n = start.size();
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
  std::vector<double> val(static_cast<std::size_t>(n + 1));
  for (Eigen::Index k = 0; k < n; ++k) pts[static_cast<std::size_t>(k + 1)](k) += step(k);
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t k = 0; k < pts.size(); ++k) val[k] = eval(pts[k]);

  std::vector<std::size_t> idx(pts.size());
  while (evals < budget) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second = idx[idx.size() - 2];

    double diam = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k)
      diam = std::max(diam, (pts[k] - pts[best]).lpNorm<Eigen::Infinity>());
    const double spread = std::abs(val[worst] - val[best]);
    if (spread <= opt.f_tolerance * (std::abs(val[best]) + 1e-300) && diam <= opt.x_tolerance)
      break;
    if (diam <= opt.x_tolerance * 1e-3) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (k != worst) centroid += pts[k];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < val[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == best) continue;
      pts[k] = pts[best] + 0.5 * (pts[k] - pts[best]);
      val[k] = eval(pts[k]);
    }
  }
  const auto it = std::min_element(val.begin(), val.end());
  const auto b = static_cast<std::size_t>(it - val.begin());
  return {pts[b], val[b], evals};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             const NelderMeadOptions& options) {
  NelderMeadResult best = run_simplex(f, start, step, options, options.max_evaluations);
  int used = best.evaluations;
  for (int r = 0; r < options.restarts && used < options.max_evaluations; ++r) {
    Eigen::VectorXd s = step;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      s(k) = std::max(std::abs(best.x(k)) * 0.05, step(k) * 1e-3);
    NelderMeadResult next = run_simplex(f, best.x, s, options, options.max_evaluations - used);
    used += next.evaluations;
    const bool improved = next.value < best.value;
    const double gain = best.value - next.value;
    if (improved) best = next;
    if (!improved || gain <= options.f_tolerance * std::abs(best.value)) break;
  }
  best.evaluations = used;
  return best;
}

}  // namespace geoclust
