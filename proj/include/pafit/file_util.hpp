#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pafit {

/// Writes `data` to a sibling temp file, then renames it over `path`, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::string& path, std::string_view data);

std::string read_file(const std::string& path);

/// Splits one CSV line on commas (no quoting; ids in this library never contain commas).
std::vector<std::string_view> split_csv_line(std::string_view line);

/// printf "%.17g": shortest fixed format that round-trips every double.
std::string format_real(double x);

}  // namespace pafit
