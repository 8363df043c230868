#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dnflow
{
/// Writes `content` to a sibling temp file, then renames it over `path`.
/// Throws IoError; no partial file is left behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Whole file as a string; IoError when it cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Shortest of %.15g/%.16g/%.17g that reads back exactly; inf and nan spelled out.
std::string format_real(double v);

/// Comma-joined format_real values.
std::string csv_join(const std::vector<double>& values);

}  // namespace dnflow
