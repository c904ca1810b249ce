#include "dictct/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dictct/errors.hpp"
#include "dictct/hash.hpp"

namespace dictct::io {

namespace {

constexpr std::string_view kDenseMagic = "DCTDENSE";
constexpr std::string_view kSparseMagic = "DCTSPCSR";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(std::string bytes, fs::path origin) : bytes_(std::move(bytes)), origin_(std::move(origin)) {}

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw IoError(origin_.string() + ": truncated file");
    std::string_view out(bytes_.data() + pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t u64() { return unpack(take(8)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(unpack(take(4))); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  static std::uint64_t unpack(std::string_view raw) {
    std::uint64_t v = 0;
    for (std::size_t i = raw.size(); i-- > 0;) v = (v << 8) | static_cast<unsigned char>(raw[i]);
    return v;
  }
  std::string bytes_;
  fs::path origin_;
  std::size_t pos_ = 0;
};

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void check_header(Reader& r, std::string_view magic, const fs::path& path) {
  if (r.take(8) != magic) throw IoError(path.string() + ": bad magic, expected " + std::string(magic));
  const auto version = r.u32();
  if (version != kFormatVersion) throw IoError(path.string() + ": unsupported format version " + std::to_string(version));
  r.u32();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string encode_dense(const Eigen::MatrixXd& matrix) {
  std::string out;
  out.reserve(32 + 8 * static_cast<std::size_t>(matrix.size()));
  out.append(kDenseMagic);
  put_u32(out, kFormatVersion);
  put_u32(out, 0);
  put_u64(out, static_cast<std::uint64_t>(matrix.rows()));
  put_u64(out, static_cast<std::uint64_t>(matrix.cols()));
  for (Index r = 0; r < matrix.rows(); ++r) {
    for (Index c = 0; c < matrix.cols(); ++c) put_f64(out, matrix(r, c));
  }
  return out;
}

void write_dense(const fs::path& path, const Eigen::MatrixXd& matrix) { write_bytes(path, encode_dense(matrix)); }

Eigen::MatrixXd read_dense(const fs::path& path) {
  Reader r(read_bytes(path), path);
  check_header(r, kDenseMagic, path);
  const auto rows = static_cast<Index>(r.u64());
  const auto cols = static_cast<Index>(r.u64());
  if (rows < 0 || cols < 0) throw IoError(path.string() + ": bad shape");
  Eigen::MatrixXd out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = r.f64();
  }
  if (!r.done()) throw IoError(path.string() + ": trailing bytes");
  return out;
}

void write_sparse(const fs::path& path, const SparseMatrix& matrix) {
  SparseMatrix m = matrix;
  m.makeCompressed();
  std::string out;
  out.append(kSparseMagic);
  put_u32(out, kFormatVersion);
  put_u32(out, 0);
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  put_u64(out, static_cast<std::uint64_t>(m.nonZeros()));
  for (Index i = 0; i <= m.rows(); ++i) put_u64(out, static_cast<std::uint64_t>(m.outerIndexPtr()[i]));
  for (Index k = 0; k < m.nonZeros(); ++k) put_u64(out, static_cast<std::uint64_t>(m.innerIndexPtr()[k]));
  for (Index k = 0; k < m.nonZeros(); ++k) put_f64(out, m.valuePtr()[k]);
  write_bytes(path, out);
}

SparseMatrix read_sparse(const fs::path& path) {
  Reader r(read_bytes(path), path);
  check_header(r, kSparseMagic, path);
  const auto rows = static_cast<Index>(r.u64());
  const auto cols = static_cast<Index>(r.u64());
  const auto nnz = static_cast<Index>(r.u64());
  std::vector<std::uint64_t> offsets(static_cast<std::size_t>(rows + 1));
  for (auto& o : offsets) o = r.u64();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  std::vector<std::uint64_t> columns(static_cast<std::size_t>(nnz));
  for (auto& c : columns) c = r.u64();
  Index row = 0;
  for (Index k = 0; k < nnz; ++k) {
    while (row < rows && offsets[static_cast<std::size_t>(row + 1)] <= static_cast<std::uint64_t>(k)) ++row;
    const auto col = static_cast<Index>(columns[static_cast<std::size_t>(k)]);
    if (row >= rows || col >= cols) throw IoError(path.string() + ": index out of range");
    entries.emplace_back(row, col, r.f64());
  }
  if (!r.done()) throw IoError(path.string() + ": trailing bytes");
  SparseMatrix out(rows, cols);
  out.setFromTriplets(entries.begin(), entries.end());
  out.makeCompressed();
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    if (t == "nan") return std::nan("");
    throw ConfigError(std::string(what) + ": expected a number, got '" + t + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  std::int64_t value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(std::string(what) + ": expected an integer, got '" + t + "'");
  }
  return value;
}

void KeyValues::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}
void KeyValues::set(std::string key, double value) { set(std::move(key), format_double(value)); }
void KeyValues::set(std::string key, std::int64_t value) { set(std::move(key), std::to_string(value)); }
void KeyValues::set(std::string key, bool value) { set(std::move(key), std::string(value ? "true" : "false")); }

bool KeyValues::contains(std::string_view key) const { return get(key).has_value(); }

std::optional<std::string> KeyValues::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string KeyValues::require(std::string_view key) const {
  auto v = get(key);
  if (!v) throw ConsistencyError("missing metadata key '" + std::string(key) + "'");
  return *v;
}
double KeyValues::require_double(std::string_view key) const { return parse_double(require(key), key); }
std::int64_t KeyValues::require_int(std::string_view key) const { return parse_int(require(key), key); }

std::string KeyValues::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

KeyValues KeyValues::parse(std::string_view text, std::string_view origin) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    if (kv.contains(key)) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    kv.set(std::move(key), trim(std::string_view(t).substr(eq + 1)));
  }
  return kv;
}

void write_text(const fs::path& path, std::string_view text) { write_bytes(path, text); }
std::string read_text(const fs::path& path) { return read_bytes(path); }

fs::path sidecar_path(const fs::path& data_file) {
  fs::path meta = data_file;
  meta += ".meta";
  return meta;
}

void write_meta(const fs::path& data_file, const KeyValues& meta) {
  write_text(sidecar_path(data_file), meta.to_string());
}

KeyValues read_meta(const fs::path& data_file) {
  const auto path = sidecar_path(data_file);
  return KeyValues::parse(read_text(path), path.string());
}

namespace {

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(Reader& r) {
  std::string tok;
  for (;;) {
    const char c = r.take(1)[0];
    if (c == '#') {
      while (r.take(1)[0] != '\n') {
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
  }
}

}  // namespace

GrayImage read_pgm(const fs::path& path) {
  Reader r(read_bytes(path), path);
  if (r.take(2) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  const auto width = parse_int(pgm_token(r), "PGM width");
  const auto height = parse_int(pgm_token(r), "PGM height");
  const auto maxval = parse_int(pgm_token(r), "PGM maxval");
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) throw IoError(path.string() + ": bad PGM header");
  GrayImage img(height, width);
  const bool wide = maxval > 255;
  for (Index row = 0; row < height; ++row) {
    for (Index col = 0; col < width; ++col) {
      unsigned value = 0;
      if (wide) {
        const auto raw = r.take(2);
        value = (static_cast<unsigned char>(raw[0]) << 8) | static_cast<unsigned char>(raw[1]);
      } else {
        value = static_cast<unsigned char>(r.take(1)[0]);
      }
      img(row, col) = static_cast<double>(value) / static_cast<double>(maxval);
    }
  }
  return img;
}

void write_pgm(const fs::path& path, const GrayImage& image, int maxval) {
  if (maxval != 255 && maxval != 65535) throw ConfigError("PGM maxval must be 255 or 65535");
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n" +
                    std::to_string(maxval) + "\n";
  for (Index row = 0; row < image.rows(); ++row) {
    for (Index col = 0; col < image.cols(); ++col) {
      const double v = std::clamp(image(row, col), 0.0, 1.0);
      const auto q = static_cast<unsigned>(std::lround(v * maxval));
      if (maxval > 255) out.push_back(static_cast<char>((q >> 8) & 0xffU));
      out.push_back(static_cast<char>(q & 0xffU));
    }
  }
  write_bytes(path, out);
}

std::string file_hash(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  return Fnv1a().update(std::as_bytes(std::span(bytes.data(), bytes.size()))).hex();
}

}  // namespace dictct::io
