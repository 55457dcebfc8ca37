#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace carvelab {

inline constexpr std::string_view kToolVersion = "0.3.0";

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Shortest form that round-trips ("%.17g").
std::string format_double(double v);

/// CSV text: "# carve-lab <version>", "# config-hash <fnv1a of config>",
/// then the header row and the data rows. Cells are written verbatim.
std::string csv_document(std::string_view config, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

/// Parses CSV text, dropping '#' comment lines. No quoting support.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes: truncate then write. Throws Error on failure.
void write_file(const std::string& path, std::string_view content);

}  // namespace carvelab
