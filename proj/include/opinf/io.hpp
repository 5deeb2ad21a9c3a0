#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "opinf/core.hpp"

namespace opinf {

static_assert(std::numeric_limits<double>::is_iec559, "IEEE-754 doubles required");
static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; big-endian hosts unsupported");

namespace io {

inline constexpr std::uint16_t kMatrixFormatVersion = 1;

/// Binary matrix container: magic "OIMX", u16 format version, u64 rows,
/// u64 cols, then rows*cols binary64 values column-major, all little-endian.
/// An optional trailer (u64 byte length + UTF-8 text) follows the payload.
inline void write_matrix(const std::filesystem::path& path, const Matrix& m,
                         const std::string& trailer = {}) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MissingInputError("cannot open for write: " + path.string());
  out.write("OIMX", 4);
  const std::uint16_t version = kMatrixFormatVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!trailer.empty()) {
    const std::uint64_t len = trailer.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
  }
  if (!out) throw NumericalError("short write: " + path.string());
}

inline Matrix read_matrix(const std::filesystem::path& path, std::string* trailer = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("missing input file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "OIMX", 4) != 0)
    throw ConfigError("not an OIMX matrix file: " + path.string());
  std::uint16_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != kMatrixFormatVersion)
    throw ConfigError("unsupported OIMX version in " + path.string());
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in) throw ConfigError("truncated OIMX header: " + path.string());
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw ConfigError("truncated OIMX payload: " + path.string());
  if (trailer) {
    trailer->clear();
    std::uint64_t len = 0;
    if (in.read(reinterpret_cast<char*>(&len), sizeof len)) {
      trailer->resize(len);
      in.read(trailer->data(), static_cast<std::streamsize>(len));
      if (!in) throw ConfigError("truncated OIMX trailer: " + path.string());
    }
  }
  return m;
}

/// FNV-1a 64-bit; stable across platforms, used for manifest checksums and
/// config hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t h = 14695981039346656037ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s) { return fnv1a(s.data(), s.size()); }

inline std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("missing file for checksum: " + path.string());
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  return h;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("missing input file: " + path.string());
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

/// Floating values in result tables carry 17 significant digits, enough to
/// round-trip binary64 exactly.
inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_value(Index v) { return std::to_string(v); }

/// CSV with a header row; cells are preformatted strings.
inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MissingInputError("cannot open for write: " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << "\n";
  }
  if (!out) throw NumericalError("short write: " + path.string());
}

}  // namespace io
}  // namespace opinf
