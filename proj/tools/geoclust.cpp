// geoclust: command-line front end.
//
//   geoclust simulate --dataset 1 --seed 7 --out sim/
//   geoclust cluster  --input sim/series.csv --k 3 --out run/
//   geoclust evaluate --assignments run/assignments.csv --labels sim/labels.csv
//   geoclust replay   run/manifest.json --out again/

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geoclust/clustering.hpp"
#include "geoclust/error.hpp"
#include "geoclust/evaluation.hpp"
#include "geoclust/io.hpp"
#include "geoclust/simulation.hpp"
#include "geoclust/version.hpp"

namespace fs = std::filesystem;
using geoclust::ErrorCode;
using geoclust::io::format_double;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kAlgorithm = 3;
constexpr const char* kOutEnv = "GEOCLUST_OUT_DIR";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resolved option values of one command, all kept as text so that the exact
// inputs can be written to and replayed from the manifest.
using Options = std::map<std::string, std::string>;

const std::map<std::string, std::vector<std::string>>& command_keys() {
  static const std::vector<std::string> basis{"basis-z", "basis-cv", "detrend"};
  static const std::vector<std::string> algo{"family", "weighting", "n-lags",  "max-lag",
                                             "h-star-rule", "rho", "max-iter", "tol",
                                             "restarts", "seed", "jobs"};
  auto cat = [](std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  static const std::map<std::string, std::vector<std::string>> keys{
      {"simulate", {"dataset", "seed", "m"}},
      {"smooth", cat({{"input"}, basis})},
      {"cluster", cat({{"input", "k"}, basis, algo})},
      {"evaluate", {"assignments", "labels"}},
      {"select", cat({{"input", "k", "k-range", "families"}, basis, algo})},
  };
  return keys;
}

const Options& defaults() {
  static const Options d{
      {"dataset", "1"},       {"seed", "1"},        {"m", "30"},
      {"input", ""},          {"basis-z", "8"},     {"basis-cv", ""},
      {"detrend", "false"},   {"k", "3"},           {"k-range", "2..6"},
      {"families", "exponential,gaussian,spherical"},
      {"family", "exponential"}, {"weighting", "ols"}, {"n-lags", "15"},
      {"max-lag", "auto"},    {"h-star-rule", "max"}, {"rho", "pair-share"},
      {"max-iter", "100"},    {"tol", "1e-6"},      {"restarts", "10"},
      {"jobs", "1"},          {"assignments", ""},  {"labels", ""},
  };
  return d;
}

// ---------------------------------------------------------------------------
// value parsing

long long to_int(const Options& o, const std::string& key) {
  const std::string& s = o.at(key);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw UsageError("--" + key + " expects an integer, got '" + s + "'");
  return v;
}

double to_real(const Options& o, const std::string& key) {
  const std::string& s = o.at(key);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw UsageError("--" + key + " expects a number, got '" + s + "'");
  return v;
}

bool to_bool(const Options& o, const std::string& key) {
  const std::string& s = o.at(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError("--" + key + " expects true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& f : geoclust::io::split_csv_line(s))
    if (!f.empty()) out.push_back(f);
  return out;
}

// "2..6" or "2,3,5"
std::vector<int> to_int_list(const Options& o, const std::string& key) {
  const std::string& s = o.at(key);
  std::vector<int> out;
  try {
    if (const auto dots = s.find(".."); dots != std::string::npos) {
      const int a = std::stoi(s.substr(0, dots)), b = std::stoi(s.substr(dots + 2));
      for (int k = a; k <= b; ++k) out.push_back(k);
    } else {
      for (const auto& f : split_list(s)) out.push_back(std::stoi(f));
    }
  } catch (const std::exception&) {
    throw UsageError("--" + key + " expects a list such as '2..6' or '4,6,8', got '" + s + "'");
  }
  if (out.empty()) throw UsageError("--" + key + " is empty");
  return out;
}

template <class F>
auto checked(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const geoclust::Error& e) {
    throw UsageError("--" + key + ": " + e.what());
  }
}

geoclust::ClusteringConfig clustering_config(const Options& o) {
  geoclust::ClusteringConfig c;
  c.K = static_cast<int>(to_int(o, "k"));
  c.family = checked("family", [&] { return geoclust::parse_family(o.at("family")); });
  c.weighting = checked("weighting", [&] { return geoclust::parse_weighting(o.at("weighting")); });
  c.n_lags = static_cast<int>(to_int(o, "n-lags"));
  if (o.at("max-lag") != "auto") c.max_lag = to_real(o, "max-lag");
  c.h_star_rule =
      checked("h-star-rule", [&] { return geoclust::parse_h_star_rule(o.at("h-star-rule")); });
  c.rho_rule = checked("rho", [&] { return geoclust::parse_rho_rule(o.at("rho")); });
  c.max_iter = static_cast<int>(to_int(o, "max-iter"));
  c.tol = to_real(o, "tol");
  c.n_restarts = static_cast<int>(to_int(o, "restarts"));
  c.seed = static_cast<std::uint64_t>(to_int(o, "seed"));
  c.jobs = static_cast<int>(to_int(o, "jobs"));
  checked("k", [&] { c.validate(); return 0; });
  return c;
}

// ---------------------------------------------------------------------------
// output helpers

class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& header) : out_(path, std::ios::binary) {
    if (!out_) geoclust::fail(ErrorCode::io_error, "cannot write '" + path.string() + "'");
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << text(fields), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string text(double v) { return format_double(v); }
  static std::string text(const std::string& s) { return s; }
  static std::string text(std::string_view s) { return std::string(s); }
  static std::string text(const char* s) { return s; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string text(I v) { return std::to_string(v); }

  std::ofstream out_;
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, const Options& o,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "geoclust";
  m["version"] = geoclust::kVersion;
  m["command"] = command;
  json opts = json::object();
  for (const auto& key : command_keys().at(command)) {
    const bool path = key == "input" || key == "assignments" || key == "labels";
    opts[key] = path && !o.at(key).empty()
                    ? fs::absolute(o.at(key)).lexically_normal().string()
                    : o.at(key);
  }
  m["options"] = opts;
  if (o.count("seed")) m["seed"] = o.at("seed");
  m["out_dir"] = fs::absolute(dir).lexically_normal().string();
  m["outputs"] = outputs;
  m["created_utc"] = utc_now();
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  if (!f) geoclust::fail(ErrorCode::io_error, "cannot write manifest in '" + dir.string() + "'");
  f << m.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// data preparation shared by smooth / cluster / select

struct Prepared {
  geoclust::FunctionalDataset dataset;
  std::optional<geoclust::BasisSelection> selection;
};

Prepared prepare(const Options& o) {
  if (o.at("input").empty()) throw UsageError("--input is required");
  const auto series = geoclust::io::read_series_csv(o.at("input"));
  const auto domain = geoclust::time_domain(series);
  int z = static_cast<int>(to_int(o, "basis-z"));
  std::optional<geoclust::BasisSelection> sel;
  if (!o.at("basis-cv").empty()) {
    const auto candidates = to_int_list(o, "basis-cv");
    sel = geoclust::select_basis_dimension(series, candidates);
    z = sel->dimension;
  }
  auto dataset = geoclust::make_dataset(series, geoclust::build_basis(domain, z));
  if (to_bool(o, "detrend")) dataset = geoclust::detrend(dataset);
  return {std::move(dataset), std::move(sel)};
}

void write_cv(const fs::path& dir, const geoclust::BasisSelection& sel,
              std::vector<std::string>& outputs) {
  CsvFile f(dir / "basis_cv.csv", "Z,cv_score");
  for (std::size_t k = 0; k < sel.candidates.size(); ++k)
    f.row(sel.candidates[k], sel.cv_scores[k]);
  outputs.push_back("basis_cv.csv");
}

// ---------------------------------------------------------------------------
// commands

int cmd_simulate(const Options& o, const fs::path& dir) {
  const auto id = to_int(o, "dataset");
  if (id < 1 || id > 6) throw UsageError("--dataset must be between 1 and 6");
  const auto m = to_int(o, "m");
  if (m < 2) throw UsageError("--m must be at least 2");
  const auto field = geoclust::make_benchmark(static_cast<int>(id),
                                              static_cast<std::uint64_t>(to_int(o, "seed")),
                                              static_cast<int>(m));
  const auto series = field.series();
  geoclust::io::write_series_csv(dir / "series.csv", series);
  std::vector<std::string> ids;
  for (const auto& s : series) ids.push_back(s.site_id);
  geoclust::io::write_labels_csv(dir / "labels.csv", ids, field.labels);
  write_manifest(dir, "simulate", o, {"series.csv", "labels.csv"});
  std::cout << "simulated dataset " << id << ": " << series.size() << " series x " << m
            << " time points -> " << dir.string() << '\n';
  return kOk;
}

int cmd_smooth(const Options& o, const fs::path& dir) {
  const Prepared p = prepare(o);
  const auto& d = p.dataset;
  std::vector<std::string> outputs{"coefficients.csv", "basis.csv"};
  std::string header = "site_id,x,y";
  for (int l = 1; l <= d.basis().dimension(); ++l) header += ",a" + std::to_string(l);
  {
    std::ofstream f(dir / "coefficients.csv", std::ios::binary);
    if (!f) geoclust::fail(ErrorCode::io_error, "cannot write coefficients.csv");
    f << header << '\n';
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      f << d.site_ids()[static_cast<std::size_t>(i)] << ',' << format_double(d.coords()(i, 0))
        << ',' << format_double(d.coords()(i, 1));
      for (Eigen::Index l = 0; l < d.coefficients().cols(); ++l)
        f << ',' << format_double(d.coefficients()(i, l));
      f << '\n';
    }
  }
  {
    CsvFile f(dir / "basis.csv", "key,value");
    f.row("kind", "bspline");
    f.row("order", d.basis().order());
    f.row("dimension", d.basis().dimension());
    f.row("t_min", d.basis().domain().lo);
    f.row("t_max", d.basis().domain().hi);
    for (double k : d.basis().breakpoints()) f.row("breakpoint", k);
  }
  if (p.selection) write_cv(dir, *p.selection, outputs);
  write_manifest(dir, "smooth", o, outputs);
  std::cout << "smoothed " << d.size() << " series with Z = " << d.basis().dimension() << '\n';
  return kOk;
}

void write_clustering(const fs::path& dir, const geoclust::FunctionalDataset& d,
                      const geoclust::ClusteringResult& r, std::vector<std::string>& outputs) {
  std::vector<int> labels;
  for (int a : r.partition.assignment) labels.push_back(a + 1);
  geoclust::io::write_labels_csv(dir / "assignments.csv", d.site_ids(), labels);
  {
    CsvFile f(dir / "prototypes.csv", "cluster,family,nugget,sill,range,practical_range");
    for (std::size_t k = 0; k < r.prototypes.size(); ++k) {
      const auto& p = r.prototypes[k];
      f.row(k + 1, geoclust::to_string(p.family), p.nugget, p.sill(), p.range,
            geoclust::practical_range(p));
    }
  }
  {
    CsvFile f(dir / "empirical_variograms.csv", "cluster,lag,semivariance,pairs");
    for (std::size_t k = 0; k < r.cluster_variograms.size(); ++k) {
      const auto& g = r.cluster_variograms[k];
      for (std::size_t h = 0; h < g.lag_centers.size(); ++h)
        if (g.present(h)) f.row(k + 1, g.lag_centers[h], g.semivariance[h], g.pair_counts[h]);
    }
  }
  {
    CsvFile f(dir / "criterion.csv", "iteration,value,model_value");
    for (std::size_t t = 0; t < r.criterion_trace.size(); ++t)
      f.row(t + 1, r.criterion_trace[t], r.model_criterion_trace[t]);
  }
  {
    CsvFile f(dir / "restarts.csv", "restart,criterion");
    for (std::size_t q = 0; q < r.restart_criteria.size(); ++q)
      f.row(q + 1, r.restart_criteria[q]);
  }
  outputs.insert(outputs.end(), {"assignments.csv", "prototypes.csv", "empirical_variograms.csv",
                                 "criterion.csv", "restarts.csv"});
}

int cmd_cluster(const Options& o, const fs::path& dir) {
  const auto config = clustering_config(o);
  const Prepared p = prepare(o);
  if (config.K > p.dataset.size()) throw UsageError("--k exceeds the number of series");
  const auto r = geoclust::dc_cluster(p.dataset, config);
  std::vector<std::string> outputs;
  write_clustering(dir, p.dataset, r, outputs);
  if (p.selection) write_cv(dir, *p.selection, outputs);
  write_manifest(dir, "cluster", o, outputs);
  std::cout << "K = " << config.K << ", criterion " << format_double(r.criterion) << ", "
            << r.iterations << " iterations (" << geoclust::to_string(r.termination)
            << "), h* = " << format_double(r.h_star) << '\n';
  if (r.fallback_allocations > 0)
    std::cout << r.fallback_allocations
              << " allocations fell back to the nearest neighbour's cluster\n";
  if (r.reseeded > 0) std::cout << r.reseeded << " degenerate clusters were rebuilt\n";
  return kOk;
}

int cmd_evaluate(const Options& o, const fs::path& dir) {
  if (o.at("assignments").empty() || o.at("labels").empty())
    throw UsageError("--assignments and --labels are required");
  const auto a = geoclust::io::read_labels_csv(o.at("assignments"));
  const auto b = geoclust::io::read_labels_csv(o.at("labels"));
  std::map<std::string, int> truth;
  for (const auto& [id, l] : b)
    if (!truth.emplace(id, l).second)
      geoclust::fail(ErrorCode::parse_error, "duplicate site '" + id + "' in " + o.at("labels"));
  std::vector<int> p, q;
  std::set<std::string> seen;
  for (const auto& [id, l] : a) {
    const auto it = truth.find(id);
    if (it == truth.end())
      geoclust::fail(ErrorCode::parse_error,
                     "cannot join: site '" + id + "' is missing from " + o.at("labels"));
    if (!seen.insert(id).second)
      geoclust::fail(ErrorCode::parse_error,
                     "duplicate site '" + id + "' in " + o.at("assignments"));
    p.push_back(l);
    q.push_back(it->second);
  }
  if (seen.size() != truth.size())
    geoclust::fail(ErrorCode::parse_error, "cannot join: " + o.at("labels") +
                                               " lists sites absent from " + o.at("assignments"));
  const double ri = geoclust::rand_index(p, q);
  {
    CsvFile f(dir / "evaluation.csv", "metric,value");
    f.row("rand_index", ri);
    f.row("n_sites", p.size());
  }
  write_manifest(dir, "evaluate", o, {"evaluation.csv"});
  std::cout << "Rand index: " << format_double(ri) << " over " << p.size() << " sites\n";
  return kOk;
}

int cmd_select(const Options& o, const fs::path& dir) {
  const auto config = clustering_config(o);
  const auto ks = to_int_list(o, "k-range");
  std::vector<geoclust::VariogramFamily> families;
  for (const auto& f : split_list(o.at("families")))
    families.push_back(checked("families", [&] { return geoclust::parse_family(f); }));
  if (families.empty()) throw UsageError("--families is empty");
  const Prepared p = prepare(o);
  for (int k : ks)
    if (k < 1 || k > p.dataset.size()) throw UsageError("--k-range must lie within [1, n]");

  const auto fam = geoclust::select_family(p.dataset, config.K, families, config);
  const auto ksel = geoclust::select_k(p.dataset, ks, config);
  std::vector<std::string> outputs{"select_family.csv", "select_k.csv"};
  {
    CsvFile f(dir / "select_family.csv", "family,criterion,chosen");
    for (auto fm : families)
      f.row(geoclust::to_string(fm), fam.criterion.at(fm), fm == fam.chosen ? 1 : 0);
  }
  {
    CsvFile f(dir / "select_k.csv", "K,criterion,drop,chosen");
    for (const auto& [k, c] : ksel.criterion) {
      const auto d = ksel.drop.find(k);
      if (d == ksel.drop.end())
        f.row(k, c, "", k == ksel.chosen ? 1 : 0);
      else
        f.row(k, c, d->second, k == ksel.chosen ? 1 : 0);
    }
  }
  if (p.selection) write_cv(dir, *p.selection, outputs);
  write_manifest(dir, "select", o, outputs);

  std::cout << "family       criterion\n";
  for (auto fm : families)
    std::cout << std::left << std::setw(12) << geoclust::to_string(fm) << ' '
              << format_double(fam.criterion.at(fm)) << (fm == fam.chosen ? "  <- chosen" : "")
              << '\n';
  std::cout << "K  criterion\n";
  for (const auto& [k, c] : ksel.criterion)
    std::cout << std::left << std::setw(2) << k << ' ' << format_double(c)
              << (k == ksel.chosen ? "  <- chosen" : "") << '\n';
  if (!ksel.increases.empty()) {
    std::cout << "criterion rose at K =";
    for (int k : ksel.increases) std::cout << ' ' << k;
    std::cout << '\n';
  }
  return kOk;
}

using Command = std::function<int(const Options&, const fs::path&)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> c{
      {"simulate", cmd_simulate}, {"smooth", cmd_smooth},   {"cluster", cmd_cluster},
      {"evaluate", cmd_evaluate}, {"select", cmd_select},
  };
  return c;
}

fs::path output_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv(kOutEnv);
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    geoclust::fail(ErrorCode::io_error, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

int run(const std::string& command, const Options& o, const std::string& out) {
  return commands().at(command)(o, output_dir(out));
}

// flags > config file > defaults
Options resolve(const std::string& command, const std::map<std::string, std::string>& flags,
                const std::string& config_path) {
  Options o;
  const auto& keys = command_keys().at(command);
  for (const auto& k : keys) o[k] = defaults().at(k);
  if (!config_path.empty()) {
    for (const auto& [k, v] : geoclust::io::read_key_values(config_path)) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw UsageError("config file: '" + k + "' is not an option of '" + command + "'");
      o[k] = v;
    }
  }
  for (const auto& [k, v] : flags) o[k] = v;
  return o;
}

int replay(const std::string& manifest_path, const std::string& out) {
  std::ifstream f(manifest_path);
  if (!f) geoclust::fail(ErrorCode::io_error, "cannot open manifest '" + manifest_path + "'");
  json m;
  try {
    m = json::parse(f);
  } catch (const json::exception& e) {
    geoclust::fail(ErrorCode::parse_error, manifest_path + ": " + e.what());
  }
  const std::string command = m.value("command", "");
  if (!commands().count(command))
    geoclust::fail(ErrorCode::parse_error, manifest_path + ": unknown command '" + command + "'");
  if (m.value("version", "") != std::string(geoclust::kVersion))
    std::cerr << "warning: manifest written by version " << m.value("version", "?")
              << ", replaying with " << geoclust::kVersion << '\n';
  std::map<std::string, std::string> flags;
  for (const auto& [k, v] : m.at("options").items()) flags[k] = v.get<std::string>();
  const Options o = resolve(command, flags, "");
  return run(command, o, out.empty() ? m.value("out_dir", "") : out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variogram-based dynamic clustering of georeferenced curves"};
  app.set_version_flag("--version", geoclust::kVersion);
  app.require_subcommand(1);

  struct Spec {
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> opts;
    std::string config, out;
    bool detrend = false;
    CLI::Option* detrend_opt = nullptr;
  };
  static const std::map<std::string, std::string> help{
      {"dataset", "benchmark dataset id, 1..6"},
      {"seed", "master random seed"},
      {"m", "time points per simulated curve"},
      {"input", "long-form series CSV (site_id,lon,lat,t,value)"},
      {"basis-z", "number of cubic B-spline basis functions"},
      {"basis-cv", "candidate Z values chosen by leave-one-out CV, e.g. \"6,8,10\""},
      {"k", "number of clusters"},
      {"k-range", "K values for selection, e.g. 2..6"},
      {"families", "variogram families compared by select"},
      {"family", "exponential, gaussian or spherical"},
      {"weighting", "ols or wls"},
      {"n-lags", "number of lag bins"},
      {"max-lag", "largest lag, or auto for half the largest distance"},
      {"h-star-rule", "max, min or median of the prototype practical ranges"},
      {"rho", "allocation lag weights: pair-share or lag-profile"},
      {"max-iter", "iterations per restart"},
      {"tol", "relative criterion decrease that ends a restart"},
      {"restarts", "number of random initial partitions"},
      {"jobs", "worker threads for restarts"},
      {"assignments", "assignments.csv from cluster"},
      {"labels", "reference labels (site_id,cluster)"},
  };
  std::map<std::string, Spec> specs;
  for (const auto& [name, keys] : command_keys()) {
    Spec& s = specs[name];
    s.sub = app.add_subcommand(name);
    for (const auto& k : keys) {
      if (k == "detrend") {
        s.detrend_opt = s.sub->add_flag("--detrend", s.detrend, "remove the linear trend in x, y");
        continue;
      }
      s.opts[k] = s.sub->add_option("--" + k, s.values[k], help.at(k));
    }
    s.sub->add_option("--config", s.config, "flat key = value file; flags take precedence");
    s.sub->add_option("--out", s.out,
                      std::string("output directory (default: $") + kOutEnv + " or .)");
  }
  specs.at("simulate").sub->description("generate a simulated benchmark dataset");
  specs.at("smooth").sub->description("smooth series into basis coefficients");
  specs.at("cluster").sub->description("run the dynamic clustering algorithm");
  specs.at("evaluate").sub->description("Rand index between two labelings");
  specs.at("select").sub->description("compare variogram families and numbers of clusters");

  std::string manifest, replay_out;
  auto* rep = app.add_subcommand("replay", "re-run a command from its manifest.json");
  rep->add_option("manifest", manifest, "manifest.json written by an earlier run")->required();
  rep->add_option("--out", replay_out, "output directory (default: the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (rep->parsed()) return replay(manifest, replay_out);
    for (auto& [name, s] : specs) {
      if (!s.sub->parsed()) continue;
      std::map<std::string, std::string> flags;
      for (const auto& [k, opt] : s.opts)
        if (opt->count() > 0) flags[k] = s.values[k];
      if (s.detrend_opt && s.detrend_opt->count() > 0) flags["detrend"] = "true";
      return run(name, resolve(name, flags, s.config), s.out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const geoclust::Error& e) {
    std::cerr << "error (" << geoclust::to_string(e.code()) << "): " << e.what() << '\n';
    const bool input = e.code() == ErrorCode::parse_error || e.code() == ErrorCode::io_error;
    return input ? kUsage : kAlgorithm;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAlgorithm;
  }
  return kUsage;
}
