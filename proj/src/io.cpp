#include "geoclust/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "geoclust/error.hpp"

namespace geoclust::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path.string() + "' for writing");
  return out;
}

[[noreturn]] void parse_fail(const fs::path& path, std::size_t line, const std::string& what) {
  fail(ErrorCode::parse_error, path.string() + ":" + std::to_string(line) + ": " + what);
}

double to_double(const std::string& s, const fs::path& path, std::size_t line, const char* col) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    parse_fail(path, line, std::string("column '") + col + "' is not a number: '" + s + "'");
  return v;
}

void check_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                  const fs::path& path) {
  if (got != want) {
    std::string w;
    for (const auto& c : want) w += (w.empty() ? "" : ",") + c;
    parse_fail(path, 1, "expected header '" + w + "'");
  }
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<SampledSeries> read_series_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++lineno;
  check_header(split_csv_line(line), {"site_id", "lon", "lat", "t", "value"}, path);

  struct Rows {
    SampledSeries series;
    std::vector<std::pair<double, double>> obs;
  };
  std::vector<Rows> sites;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5)
      parse_fail(path, lineno, "expected 5 fields, found " + std::to_string(f.size()));
    if (f[0].empty()) parse_fail(path, lineno, "empty site_id");
    const double lon = to_double(f[1], path, lineno, "lon");
    const double lat = to_double(f[2], path, lineno, "lat");
    const double t = to_double(f[3], path, lineno, "t");
    const double v = to_double(f[4], path, lineno, "value");
    auto [it, fresh] = index.emplace(f[0], sites.size());
    if (fresh) {
      sites.emplace_back();
      sites.back().series.site_id = f[0];
      sites.back().series.coords = {lon, lat};
    }
    auto& s = sites[it->second];
    if (s.series.coords[0] != lon || s.series.coords[1] != lat)
      parse_fail(path, lineno, "site '" + f[0] + "' changes coordinates");
    s.obs.emplace_back(t, v);
  }
  if (sites.empty()) parse_fail(path, lineno, "no data rows");

  std::vector<SampledSeries> out;
  out.reserve(sites.size());
  for (auto& r : sites) {
    std::sort(r.obs.begin(), r.obs.end());
    for (std::size_t j = 1; j < r.obs.size(); ++j)
      if (r.obs[j].first == r.obs[j - 1].first)
        fail(ErrorCode::parse_error, path.string() + ": site '" + r.series.site_id +
                                         "' has two rows at t = " + format_double(r.obs[j].first));
    for (const auto& [t, v] : r.obs) {
      r.series.times.push_back(t);
      r.series.values.push_back(v);
    }
    out.push_back(std::move(r.series));
  }
  return out;
}

void write_series_csv(const fs::path& path, const std::vector<SampledSeries>& series) {
  auto out = open_out(path);
  out << "site_id,lon,lat,t,value\n";
  for (const auto& s : series)
    for (std::size_t j = 0; j < s.times.size(); ++j)
      out << s.site_id << ',' << format_double(s.coords[0]) << ',' << format_double(s.coords[1])
          << ',' << format_double(s.times[j]) << ',' << format_double(s.values[j]) << '\n';
}

std::vector<std::pair<std::string, int>> read_labels_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  check_header(split_csv_line(line), {"site_id", "cluster"}, path);
  std::vector<std::pair<std::string, int>> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) parse_fail(path, lineno, "expected 2 fields");
    int label = 0;
    const auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), label);
    if (ec != std::errc() || p != f[1].data() + f[1].size() || f[1].empty())
      parse_fail(path, lineno, "cluster label is not an integer: '" + f[1] + "'");
    out.emplace_back(f[0], label);
  }
  if (out.empty()) parse_fail(path, lineno, "no data rows");
  return out;
}

void write_labels_csv(const fs::path& path, const std::vector<std::string>& site_ids,
                      const std::vector<int>& labels) {
  require(site_ids.size() == labels.size(), ErrorCode::invalid_argument,
          "one label per site is required");
  auto out = open_out(path);
  out << "site_id,cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << site_ids[i] << ',' << labels[i] << '\n';
}

std::vector<std::pair<std::string, std::string>> read_key_values(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(path, lineno, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty()) parse_fail(path, lineno, "empty key");
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace geoclust::io
