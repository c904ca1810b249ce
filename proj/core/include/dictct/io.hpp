#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dictct/image.hpp"
#include "dictct/sparse.hpp"

namespace dictct::io {

namespace fs = std::filesystem;

// Dense matrix file (all integers and floats little-endian):
//   offset  0  char[8]   "DCTDENSE"
//   offset  8  uint32    format version (1)
//   offset 12  uint32    reserved (0)
//   offset 16  uint64    rows
//   offset 24  uint64    cols
//   offset 32  float64[rows * cols], row-major
//
// Sparse (CSR) matrix file:
//   offset  0  char[8]   "DCTSPCSR"
//   offset  8  uint32    format version (1)
//   offset 12  uint32    reserved (0)
//   offset 16  uint64    rows
//   offset 24  uint64    cols
//   offset 32  uint64    nnz
//   then uint64[rows + 1] row offsets, uint64[nnz] column indices,
//   float64[nnz] values.
//
// Either file may have a sidecar "<file>.meta" of key=value lines.

inline constexpr std::uint32_t kFormatVersion = 1;

void write_dense(const fs::path& path, const Eigen::MatrixXd& matrix);
Eigen::MatrixXd read_dense(const fs::path& path);
/// Serialized bytes of write_dense, for hashing.
std::string encode_dense(const Eigen::MatrixXd& matrix);

void write_sparse(const fs::path& path, const SparseMatrix& matrix);
SparseMatrix read_sparse(const fs::path& path);

/// Ordered key=value metadata. Keys are unique; set() replaces in place.
class KeyValues {
 public:
  void set(std::string key, std::string value);
  void set(std::string key, double value);
  void set(std::string key, std::int64_t value);
  void set(std::string key, bool value);
  void set(std::string key, const char* value) { set(std::move(key), std::string(value)); }

  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  /// Throws ConsistencyError when missing.
  std::string require(std::string_view key) const;
  double require_double(std::string_view key) const;
  std::int64_t require_int(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string to_string() const;
  static KeyValues parse(std::string_view text, std::string_view origin = "<text>");

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

void write_text(const fs::path& path, std::string_view text);
std::string read_text(const fs::path& path);

fs::path sidecar_path(const fs::path& data_file);
void write_meta(const fs::path& data_file, const KeyValues& meta);
KeyValues read_meta(const fs::path& data_file);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

/// Binary (P5) PGM with maxval up to 65535. Pixels are mapped to [0, 1] by
/// dividing by maxval.
GrayImage read_pgm(const fs::path& path);
/// Values are clamped to [0, 1] and quantised to maxval (255 or 65535).
void write_pgm(const fs::path& path, const GrayImage& image, int maxval = 65535);

/// FNV-1a digest of a file's bytes, as hex.
std::string file_hash(const fs::path& path);

}  // namespace dictct::io
