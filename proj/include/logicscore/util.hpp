#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace logicscore {

// ---------------------------------------------------------------------------
// string helpers
// ---------------------------------------------------------------------------

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split_on(std::string_view text, char sep);

// FNV-1a 64-bit. Used for the lexical embedder buckets and for cache digests;
// must stay byte-for-byte identical across platforms.
std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value);

// Round to 6 decimal places (the serialization precision of every score file).
double round6(double x);
// Fixed-point decimal rendering, no locale involvement.
std::string format_fixed(double x, int precision);

std::string iso8601_utc_now();

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
// write-then-rename so interrupted runs never leave partial outputs behind
void atomic_write_file(const std::filesystem::path& path, std::string_view content);
std::string file_digest(const std::filesystem::path& path);

} // namespace logicscore
