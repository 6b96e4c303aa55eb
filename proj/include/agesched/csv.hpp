#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace agesched::csv {

/// Locale-independent numeric formatting: 12 significant digits, '%g' style
/// (decimal point, no thousands separators). Every CSV and JSON number the
/// project emits goes through this so reruns are byte-identical.
std::string format_number(double value);

/// Joins already-formatted cells with commas and a trailing newline.
std::string join_row(const std::vector<std::string>& cells);

/// Writes `content` to a temporary file next to `path` and renames it into
/// place, so partially written outputs are never observed.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

} // namespace agesched::csv
