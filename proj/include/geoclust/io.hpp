#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "geoclust/fda.hpp"

namespace geoclust::io {

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double x);

/// Long-form series table with header `site_id,lon,lat,t,value`.
/// Rows of a site may come in any order; sites keep their first-seen order.
std::vector<SampledSeries> read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const std::vector<SampledSeries>& series);

/// Two-column table `site_id,cluster`.
std::vector<std::pair<std::string, int>> read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const std::vector<std::string>& site_ids,
                      const std::vector<int>& labels);

/// Splits one CSV line on commas; fields are trimmed of surrounding blanks.
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a flat `key = value` file; `#` starts a comment.
std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::filesystem::path& path);

}  // namespace geoclust::io
