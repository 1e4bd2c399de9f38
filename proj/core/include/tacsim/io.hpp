#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tacsim {

// Throws MissingFileError when the path does not exist.
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t seed = 1469598103934665603ull);
std::uint64_t fnv1a64(std::string_view text);
std::string to_hex(std::uint64_t value);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Minimal CSV: comma separated, no quoting. Blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws SchemaError if absent.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, bool has_header = true);
double parse_double(std::string_view text, std::string_view field);
long long parse_integer(std::string_view text, std::string_view field);

}  // namespace tacsim
