#include "lidlab/core/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; big-endian hosts are unsupported");

namespace lidlab::io {

void write_matrix(const std::filesystem::path& path, const Mat& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_matrix: cannot open " + path.string());
  out << "lidlab-matrix v1 " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
  if (!out) throw std::runtime_error("write_matrix: write failed for " + path.string());
}

Mat read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_matrix: cannot open " + path.string());
  std::string magic, version;
  Eigen::Index rows = 0, cols = 0;
  in >> magic >> version >> rows >> cols;
  if (magic != "lidlab-matrix" || version != "v1" || rows < 0 || cols < 0)
    throw std::runtime_error("read_matrix: bad header in " + path.string());
  in.get(); // newline
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      if (!in) throw std::runtime_error("read_matrix: truncated file " + path.string());
      m(i, j) = v;
    }
  }
  return m;
}

CsvWriter::CsvWriter(std::filesystem::path path,
                     std::vector<std::pair<std::string, std::string>> columns)
    : path_(std::move(path)), columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns_[i].first;
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("CsvWriter: row width does not match declared columns");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvWriter::close() {
  if (closed_) return;
  closed_ = true;
  std::ofstream out(path_);
  if (!out) throw std::runtime_error("CsvWriter: cannot open " + path_.string());
  out << buffer_;

  nlohmann::json schema;
  schema["file"] = path_.filename().string();
  auto cols = nlohmann::json::array();
  for (const auto& [name, desc] : columns_) {
    cols.push_back({{"name", name}, {"description", desc}});
  }
  schema["columns"] = cols;
  std::filesystem::path spath = path_;
  spath += ".schema.json";
  std::ofstream sout(spath);
  sout << schema.dump(2) << "\n";
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw; close() explicitly to observe errors
  }
}

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

} // namespace lidlab::io
