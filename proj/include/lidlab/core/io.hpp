#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lidlab/core/types.hpp"

namespace lidlab::io {

/// Writes a matrix as a one-line ASCII header followed by raw little-endian
/// float64 values in row-major order.
void write_matrix(const std::filesystem::path& path, const Mat& m);
Mat read_matrix(const std::filesystem::path& path);

/// CSV table with an accompanying `<name>.schema.json` documenting columns.
class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path,
            std::vector<std::pair<std::string, std::string>> columns);
  void row(const std::vector<std::string>& cells);
  void close();
  ~CsvWriter();

 private:
  std::filesystem::path path_;
  std::vector<std::pair<std::string, std::string>> columns_;
  std::string buffer_;
  bool closed_ = false;
};

std::string format_double(double v);

/// FNV-1a over a string; used for stable config hashes.
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

} // namespace lidlab::io
