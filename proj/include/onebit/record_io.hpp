#pragma once

// Binary dump of a OneBitRecord for experiment replay.
//
// Layout (all integers and floats little-endian):
//   offset  size      field
//   0       8         magic "ONEBITRC"
//   8       4         u32 format version (1)
//   12      4         u32 reserved, 0
//   16      8         u64 n (measurements)
//   24      8         u64 m (threshold sequences)
//   32      n*m       i8 signs, +1 / -1, column-major (sequence outer, measurement inner)
//   32+n*m  8*n*m     f64 thresholds, IEEE-754 binary64, same order

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "onebit/error.hpp"
#include "onebit/quantizer.hpp"

namespace onebit {

inline constexpr std::array<char, 8> kRecordMagic = {'O', 'N', 'E', 'B', 'I', 'T', 'R', 'C'};
inline constexpr std::uint32_t kRecordVersion = 1;

namespace detail {

inline void put_le(std::ostream& os, std::uint64_t value, int bytes) {
  for (int b = 0; b < bytes; ++b) {
    os.put(static_cast<char>((value >> (8 * b)) & 0xffU));
  }
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
  std::uint64_t value = 0;
  for (int b = 0; b < bytes; ++b) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw IoError("read_record: truncated input");
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return value;
}

}  // namespace detail

inline void write_record(std::ostream& os, const OneBitRecord& rec) {
  os.write(kRecordMagic.data(), kRecordMagic.size());
  detail::put_le(os, kRecordVersion, 4);
  detail::put_le(os, 0, 4);
  detail::put_le(os, static_cast<std::uint64_t>(rec.n()), 8);
  detail::put_le(os, static_cast<std::uint64_t>(rec.m()), 8);
  for (Index k = 0; k < rec.signs.size(); ++k) os.put(static_cast<char>(rec.signs.data()[k]));
  for (Index k = 0; k < rec.thresholds.size(); ++k) {
    detail::put_le(os, std::bit_cast<std::uint64_t>(rec.thresholds.data()[k]), 8);
  }
  if (!os) throw IoError("write_record: stream error");
}

inline OneBitRecord read_record(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kRecordMagic) throw IoError("read_record: bad magic header");
  const auto version = detail::get_le(is, 4);
  if (version != kRecordVersion) {
    throw IoError("read_record: unsupported version " + std::to_string(version));
  }
  detail::get_le(is, 4);
  const auto n = detail::get_le(is, 8);
  const auto m = detail::get_le(is, 8);
  if (n == 0 || m == 0 || n > (1ULL << 40) / m) throw IoError("read_record: bad dimensions");

  OneBitRecord rec;
  rec.signs.resize(static_cast<Index>(n), static_cast<Index>(m));
  rec.thresholds.resize(static_cast<Index>(n), static_cast<Index>(m));
  for (Index k = 0; k < rec.signs.size(); ++k) {
    const auto s = static_cast<std::int8_t>(detail::get_le(is, 1));
    if (s != 1 && s != -1) throw IoError("read_record: sign entry is not +1/-1");
    rec.signs.data()[k] = s;
  }
  for (Index k = 0; k < rec.thresholds.size(); ++k) {
    rec.thresholds.data()[k] = std::bit_cast<double>(detail::get_le(is, 8));
  }
  return rec;
}

}  // namespace onebit
