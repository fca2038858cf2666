#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "geoclust/clustering.hpp"
#include "geoclust/error.hpp"
#include "geoclust/evaluation.hpp"
#include "geoclust/simulation.hpp"
#include "geoclust/version.hpp"

namespace py = pybind11;
using namespace geoclust;

namespace {

std::vector<SampledSeries> to_series(const Matrix& coords, const std::vector<double>& times,
                                     const Matrix& values, std::vector<std::string> ids) {
  require(coords.cols() == 2, ErrorCode::invalid_dimension, "coords must be n x 2");
  require(values.rows() == coords.rows(), ErrorCode::invalid_dimension,
          "values and coords disagree in the number of sites");
  require(values.cols() == static_cast<Eigen::Index>(times.size()), ErrorCode::invalid_dimension,
          "values need one column per time point");
  if (ids.empty())
    for (Eigen::Index i = 0; i < coords.rows(); ++i) ids.push_back(std::to_string(i));
  require(ids.size() == static_cast<std::size_t>(coords.rows()), ErrorCode::invalid_dimension,
          "one site id per row is required");
  std::vector<SampledSeries> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out[i].site_id = ids[i];
    out[i].coords = {coords(r, 0), coords(r, 1)};
    out[i].times = times;
    out[i].values.resize(times.size());
    for (std::size_t j = 0; j < times.size(); ++j)
      out[i].values[j] = values(r, static_cast<Eigen::Index>(j));
  }
  return out;
}

ClusteringConfig make_config(int k, const std::string& family, const std::string& weighting,
                             int n_lags, std::optional<double> max_lag, int max_iter, double tol,
                             std::uint64_t seed, int restarts, const std::string& h_star_rule,
                             const std::string& rho, int jobs) {
  ClusteringConfig c;
  c.K = k;
  c.family = parse_family(family);
  c.weighting = parse_weighting(weighting);
  c.n_lags = n_lags;
  c.max_lag = max_lag;
  c.max_iter = max_iter;
  c.tol = tol;
  c.seed = seed;
  c.n_restarts = restarts;
  c.h_star_rule = parse_h_star_rule(h_star_rule);
  c.rho_rule = parse_rho_rule(rho);
  c.jobs = jobs;
  c.validate();
  return c;
}

#define CONFIG_ARGS                                                                      \
  py::arg("k") = 3, py::arg("family") = "exponential", py::arg("weighting") = "ols",     \
  py::arg("n_lags") = 15, py::arg("max_lag") = py::none(), py::arg("max_iter") = 100,    \
  py::arg("tol") = 1e-6, py::arg("seed") = 0, py::arg("restarts") = 10,                  \
  py::arg("h_star_rule") = "max", py::arg("rho") = "pair-share", py::arg("jobs") = 1

}  // namespace

PYBIND11_MODULE(_geoclust, m) {
  m.doc() = "Variogram-based dynamic clustering of spatially dependent functional data";
  m.attr("__version__") = kVersion;
  py::register_exception<Error>(m, "GeoclustError", PyExc_ValueError);

  py::class_<BasisSystem>(m, "BasisSystem")
      .def_property_readonly("dimension", &BasisSystem::dimension)
      .def_property_readonly("order", &BasisSystem::order)
      .def_property_readonly("knots", &BasisSystem::knots)
      .def_property_readonly("domain",
                             [](const BasisSystem& b) {
                               return py::make_tuple(b.domain().lo, b.domain().hi);
                             })
      .def("breakpoints", &BasisSystem::breakpoints)
      .def("evaluate", &BasisSystem::evaluate, py::arg("t"))
      .def("design_matrix", [](const BasisSystem& b, const std::vector<double>& t) {
        return b.design_matrix(t);
      });

  m.def("build_basis",
        [](double lo, double hi, int z, int order) { return build_basis({lo, hi}, z, order); },
        py::arg("t_min"), py::arg("t_max"), py::arg("z"), py::arg("order") = 4);
  m.def("gram_matrix", [](const BasisSystem& b) { return gram_matrix(b).W; });
  m.def("smooth_series",
        [](const std::vector<double>& t, const std::vector<double>& y, const BasisSystem& b) {
          SampledSeries s;
          s.site_id = "series";
          s.times = t;
          s.values = y;
          return smooth_series(s, b);
        },
        py::arg("times"), py::arg("values"), py::arg("basis"));
  m.def("l2_distance_sq",
        [](const Vector& a, const Vector& b, const Matrix& w) {
          return l2_distance_sq(a, b, GramMatrix{w});
        },
        py::arg("a_i"), py::arg("a_j"), py::arg("gram"));
  m.def("select_basis_dimension",
        [](const std::vector<double>& times, const Matrix& values, const std::vector<int>& cands) {
          const Matrix coords = Matrix::Zero(values.rows(), 2);
          const auto series = to_series(coords, times, values, {});
          const auto sel = select_basis_dimension(series, cands);
          return py::make_tuple(sel.dimension, sel.cv_scores);
        },
        py::arg("times"), py::arg("values"), py::arg("candidates"),
        "Returns (chosen Z, CV score per candidate).");

  py::class_<FunctionalDataset>(m, "FunctionalDataset")
      .def_property_readonly("basis", &FunctionalDataset::basis)
      .def_property_readonly("gram", [](const FunctionalDataset& d) { return d.gram().W; })
      .def_property_readonly("coefficients", &FunctionalDataset::coefficients)
      .def_property_readonly("coords", &FunctionalDataset::coords)
      .def_property_readonly("site_ids", &FunctionalDataset::site_ids)
      .def("__len__", &FunctionalDataset::size)
      .def("distance_sq", &FunctionalDataset::distance_sq, py::arg("i"), py::arg("j"));

  m.def("make_dataset",
        [](const Matrix& coords, const std::vector<double>& times, const Matrix& values, int z,
           std::vector<std::string> ids) {
          const auto series = to_series(coords, times, values, std::move(ids));
          return make_dataset(series, build_basis(time_domain(series), z));
        },
        py::arg("coords"), py::arg("times"), py::arg("values"), py::arg("z") = 8,
        py::arg("site_ids") = std::vector<std::string>{},
        "Smooths an n x m value matrix observed at common times into a dataset.");
  m.def("detrend", &detrend, py::arg("dataset"));

  py::class_<LagStructure>(m, "LagStructure")
      .def_property_readonly("centers", &LagStructure::centers)
      .def_property_readonly("max_lag", &LagStructure::max_lag)
      .def_property_readonly("tolerance", &LagStructure::tolerance)
      .def("pair_count", &LagStructure::pair_count)
      .def("site_pair_count", &LagStructure::site_pair_count);
  m.def("build_lag_structure", &build_lag_structure, py::arg("coords"), py::arg("n_lags") = 15,
        py::arg("max_lag") = py::none());

  py::class_<EmpiricalVariogram>(m, "EmpiricalVariogram")
      .def_readonly("lag_centers", &EmpiricalVariogram::lag_centers)
      .def_readonly("semivariance", &EmpiricalVariogram::semivariance)
      .def_readonly("pair_counts", &EmpiricalVariogram::pair_counts);
  m.def("empirical_trace_variogram",
        [](const FunctionalDataset& d, const LagStructure& l, std::optional<std::vector<int>> s) {
          return s ? empirical_trace_variogram(d, l, SiteSubset(*s))
                   : empirical_trace_variogram(d, l);
        },
        py::arg("dataset"), py::arg("lags"), py::arg("subset") = py::none());
  m.def("centered_variogram",
        [](const FunctionalDataset& d, const LagStructure& l, int i,
           std::optional<std::vector<int>> s) {
          return s ? centered_variogram(d, l, i, SiteSubset(*s)) : centered_variogram(d, l, i);
        },
        py::arg("dataset"), py::arg("lags"), py::arg("site"), py::arg("subset") = py::none());

  py::class_<VariogramModel>(m, "VariogramModel")
      .def(py::init([](const std::string& family, double nugget, double psill, double range) {
             return VariogramModel{parse_family(family), nugget, psill, range};
           }),
           py::arg("family"), py::arg("nugget"), py::arg("partial_sill"), py::arg("range"))
      .def_property_readonly("family",
                             [](const VariogramModel& v) { return std::string(to_string(v.family)); })
      .def_readonly("nugget", &VariogramModel::nugget)
      .def_readonly("partial_sill", &VariogramModel::partial_sill)
      .def_readonly("range", &VariogramModel::range)
      .def_property_readonly("sill", &VariogramModel::sill)
      .def("__call__", &eval_model, py::arg("h"))
      .def("__repr__", [](const VariogramModel& v) {
        return "VariogramModel(" + std::string(to_string(v.family)) +
               ", nugget=" + std::to_string(v.nugget) + ", partial_sill=" +
               std::to_string(v.partial_sill) + ", range=" + std::to_string(v.range) + ")";
      });
  m.def("eval_model", &eval_model, py::arg("model"), py::arg("h"));
  m.def("practical_range", &practical_range, py::arg("model"));

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("objective", &FitResult::objective)
      .def_readonly("degenerate", &FitResult::degenerate)
      .def_readonly("start_objectives", &FitResult::start_objectives);
  m.def("fit_model",
        [](const EmpiricalVariogram& e, const std::string& family, const std::string& weighting) {
          return fit_model(e, parse_family(family), parse_weighting(weighting));
        },
        py::arg("emp"), py::arg("family") = "exponential", py::arg("weighting") = "ols");

  py::class_<ClusteringResult>(m, "ClusteringResult")
      .def_property_readonly("labels",
                             [](const ClusteringResult& r) { return r.partition.assignment; })
      .def_readonly("prototypes", &ClusteringResult::prototypes)
      .def_readonly("criterion", &ClusteringResult::criterion)
      .def_readonly("criterion_trace", &ClusteringResult::criterion_trace)
      .def_readonly("model_criterion_trace", &ClusteringResult::model_criterion_trace)
      .def_readonly("iterations", &ClusteringResult::iterations)
      .def_readonly("h_star", &ClusteringResult::h_star)
      .def_readonly("restart_criteria", &ClusteringResult::restart_criteria)
      .def_property_readonly("termination", [](const ClusteringResult& r) {
        return std::string(to_string(r.termination));
      });

  m.def("dc_cluster",
        [](const FunctionalDataset& d, int k, const std::string& family,
           const std::string& weighting, int n_lags, std::optional<double> max_lag, int max_iter,
           double tol, std::uint64_t seed, int restarts, const std::string& h_star_rule,
           const std::string& rho, int jobs) {
          const auto c = make_config(k, family, weighting, n_lags, max_lag, max_iter, tol, seed,
                                     restarts, h_star_rule, rho, jobs);
          py::gil_scoped_release release;
          return dc_cluster(d, c);
        },
        py::arg("dataset"), CONFIG_ARGS, "Labels in the result are 0-based.");

  m.def("rand_index",
        [](const std::vector<int>& p, const std::vector<int>& q) { return rand_index(p, q); },
        py::arg("p"), py::arg("q"));

  m.def("select_family",
        [](const FunctionalDataset& d, const std::vector<std::string>& names, int k,
           const std::string& family, const std::string& weighting, int n_lags,
           std::optional<double> max_lag, int max_iter, double tol, std::uint64_t seed,
           int restarts, const std::string& h_star_rule, const std::string& rho, int jobs) {
          const auto c = make_config(k, family, weighting, n_lags, max_lag, max_iter, tol, seed,
                                     restarts, h_star_rule, rho, jobs);
          std::vector<VariogramFamily> fams;
          for (const auto& n : names) fams.push_back(parse_family(n));
          const auto s = select_family(d, k, fams, c);
          py::dict table;
          for (const auto& [f, v] : s.criterion) table[py::str(std::string(to_string(f)))] = v;
          return py::make_tuple(std::string(to_string(s.chosen)), table);
        },
        py::arg("dataset"), py::arg("families"), CONFIG_ARGS,
        "Returns (chosen family, {family: criterion}).");

  m.def("select_k",
        [](const FunctionalDataset& d, const std::vector<int>& ks, int k,
           const std::string& family, const std::string& weighting, int n_lags,
           std::optional<double> max_lag, int max_iter, double tol, std::uint64_t seed,
           int restarts, const std::string& h_star_rule, const std::string& rho, int jobs) {
          const auto c = make_config(k, family, weighting, n_lags, max_lag, max_iter, tol, seed,
                                     restarts, h_star_rule, rho, jobs);
          const auto s = select_k(d, ks, c);
          return py::make_tuple(s.chosen, s.criterion);
        },
        py::arg("dataset"), py::arg("k_range"), CONFIG_ARGS,
        "Returns (chosen K, {K: criterion}).");

  m.def("spatial_cov",
        [](double h, double c, double nu) {
          SeparableCovParams p;
          p.c = c;
          p.nu = nu;
          return spatial_cov(h, p);
        },
        py::arg("h"), py::arg("c"), py::arg("nu") = 0.0);
  m.def("temporal_cov",
        [](double u, double a, double alpha) {
          SeparableCovParams p;
          p.a = a;
          p.alpha = alpha;
          return temporal_cov(u, p);
        },
        py::arg("u"), py::arg("a") = 1.0, py::arg("alpha") = 0.1);
  m.def("make_benchmark",
        [](int id, std::uint64_t seed, int m_points) {
          const auto f = make_benchmark(id, seed, m_points);
          py::dict out;
          out["values"] = f.values;
          out["times"] = f.times;
          out["coords"] = f.coords;
          out["labels"] = f.labels;
          return out;
        },
        py::arg("dataset_id"), py::arg("seed"), py::arg("m") = 30,
        "Dict with values (n x m), times, coords (n x 2) and 1-based labels.");
}
