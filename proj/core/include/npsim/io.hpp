#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "npsim/grid.hpp"

namespace npsim {

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

/// "%.17g", with non-finite values rendered as JSON null.
std::string format_number(double v);

/// Append-only little-endian encoder.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> values);
  void str(const std::string& s);
  void raw(std::span<const unsigned char> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

  const std::vector<unsigned char>& bytes() const noexcept { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

/// Little-endian decoder; throws Error("io", ...) on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s(std::size_t count);
  std::string str();
  std::span<const unsigned char> take(std::size_t n);
  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::string& path);
/// Writes via a temporary file and rename, so readers never see a torn file.
void write_file_atomic(const std::string& path, std::span<const unsigned char> bytes);

/// Flat little-endian f64 dump `<dir>/<name>.bin` plus `<dir>/<name>.json`
/// describing grid, shape, time, field name and checksum. `shape` is the
/// per-axis extent of the array, x fastest.
void write_field_dump(const std::string& dir, const std::string& name, const Grid& grid,
                      std::span<const int> shape, double t, std::uint64_t step, std::span<const double> values);

/// Reads a dump back; verifies the sidecar checksum.
std::vector<double> read_field_dump(const std::string& dir, const std::string& name);

/// One parsed diagnostics line: numeric keys only (null becomes NaN).
using FlatRecord = std::map<std::string, double>;

/// Reads every data record (header records are skipped).
std::vector<FlatRecord> read_diagnostics(const std::string& path);

}  // namespace npsim
