#include "npsim/io.hpp"

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "npsim/errors.hpp"

namespace npsim {
namespace {

template <class T>
T to_little(T v) noexcept {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    T out = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out = (out << 8) | ((v >> (8 * i)) & 0xff);
    }
    return out;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ByteWriter::u32(std::uint32_t v) {
  const auto le = to_little(v);
  unsigned char b[4];
  std::memcpy(b, &le, 4);
  bytes_.insert(bytes_.end(), b, b + 4);
}

void ByteWriter::u64(std::uint64_t v) {
  const auto le = to_little(v);
  unsigned char b[8];
  std::memcpy(b, &le, 8);
  bytes_.insert(bytes_.end(), b, b + 8);
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::f64s(std::span<const double> values) {
  bytes_.reserve(bytes_.size() + 8 * values.size());
  for (double v : values) f64(v);
}

void ByteWriter::str(const std::string& s) {
  u64(s.size());
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

std::span<const unsigned char> ByteReader::take(std::size_t n) {
  if (remaining() < n) throw Error("io", "truncated binary data");
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  std::uint32_t v;
  std::memcpy(&v, take(4).data(), 4);
  return to_little(v);
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v;
  std::memcpy(&v, take(8).data(), 8);
  return to_little(v);
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> ByteReader::f64s(std::size_t count) {
  if (remaining() / 8 < count) throw Error("io", "truncated binary data");
  std::vector<double> out(count);
  for (auto& v : out) v = f64();
  return out;
}

std::string ByteReader::str() {
  const auto n = u64();
  const auto s = take(n);
  return std::string(s.begin(), s.end());
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::string& path, std::span<const unsigned char> bytes) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("io", "short write to '" + tmp + "'");
  }
  std::filesystem::rename(tmp, target);
}

void write_field_dump(const std::string& dir, const std::string& name, const Grid& grid,
                      std::span<const int> shape, double t, std::uint64_t step, std::span<const double> values) {
  ByteWriter w;
  w.f64s(values);
  write_file_atomic(dir + "/" + name + ".bin", w.bytes());
  nlohmann::json side;
  side["field"] = name;
  std::vector<int> cells;
  std::vector<double> lengths;
  for (int a = 0; a < grid.dim(); ++a) {
    cells.push_back(grid.cells(a));
    lengths.push_back(grid.length(a));
  }
  side["grid"] = {{"dim", grid.dim()}, {"cells", cells}, {"lengths", lengths}};
  side["shape"] = std::vector<int>(shape.begin(), shape.end());
  side["count"] = values.size();
  side["time"] = t;
  side["step"] = step;
  side["dtype"] = "float64";
  side["byte_order"] = "little";
  side["layout"] = "axis-major, x fastest";
  side["checksum"] = "fnv1a64:" + hex64(fnv1a64(w.bytes()));
  const auto text = side.dump(2) + "\n";
  write_file_atomic(dir + "/" + name + ".json",
                    std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

std::vector<double> read_field_dump(const std::string& dir, const std::string& name) {
  const auto bytes = read_file(dir + "/" + name + ".bin");
  const auto side_bytes = read_file(dir + "/" + name + ".json");
  const auto side = nlohmann::json::parse(side_bytes.begin(), side_bytes.end());
  const std::string expected = side.at("checksum").get<std::string>();
  if (expected != "fnv1a64:" + hex64(fnv1a64(bytes))) {
    throw InvariantViolation("io", "field dump '" + name + "' fails its checksum");
  }
  ByteReader r(bytes);
  return r.f64s(bytes.size() / 8);
}

std::vector<FlatRecord> read_diagnostics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  std::vector<FlatRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (j.contains("record")) continue;
    FlatRecord rec;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_number()) {
        rec[it.key()] = it->get<double>();
      } else if (it->is_null()) {
        rec[it.key()] = std::numeric_limits<double>::quiet_NaN();
      } else if (it->is_boolean()) {
        rec[it.key()] = it->get<bool>() ? 1.0 : 0.0;
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace npsim
