#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace litmine {

/// FNV-1a 64-bit hash, used for artifact checksums and vocabulary binding.
std::uint64_t fnv1a64(std::string_view data);

/// Shortest decimal representation that round-trips a double ("%.17g").
std::string format_double(double value);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Collapses every whitespace run to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split(std::string_view s, char sep);

/// Minimal CSV writer. Fields containing separators or quotes are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(std::vector<std::string> fields);
  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses a CSV produced by CsvWriter (quoted fields supported).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace litmine
