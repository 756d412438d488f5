#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qsw::csv {

/// Shortest decimal text that round-trips to the same double.
std::string format(double value);

/// Splits one CSV line on commas. Quoted fields are not supported (none of our schemas need them).
std::vector<std::string_view> split(std::string_view line);

/// Removes commas and line breaks so free text fits in one unquoted cell.
std::string sanitize(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes `content`, creating parent directories. Throws qsw::Error when the path is unwritable.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace qsw::csv
