#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>

#include "statmodel/error.hpp"

namespace statmodel::binary::detail {

// Bounds-checked cursor over a byte buffer. Reads past the end throw `code`
// with the offending offset.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, bool big_endian, ErrorCode code)
      : data_(data), big_(big_endian), code_(code) {}

  std::size_t offset() const { return pos_; }
  std::size_t size() const { return data_.size(); }
  bool at_end() const { return pos_ >= data_.size(); }
  void seek(std::size_t off) {
    if (off > data_.size()) fail(off, "offset out of range");
    pos_ = off;
  }
  void skip(std::uint64_t n) {
    if (n > data_.size() - pos_) fail(pos_, "unexpected end of data");
    pos_ += static_cast<std::size_t>(n);
  }

  std::uint64_t uint(std::size_t width) {
    if (width > data_.size() - pos_) fail(pos_, "unexpected end of data");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      std::uint64_t b = data_[pos_ + i];
      v |= big_ ? b << (8 * (width - 1 - i)) : b << (8 * i);
    }
    pos_ += width;
    return v;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  std::int8_t s8() { return static_cast<std::int8_t>(u8()); }

  std::uint64_t uleb() {
    std::uint64_t v = 0;
    unsigned shift = 0;
    std::size_t start = pos_;
    while (true) {
      std::uint8_t b = u8();
      if (shift < 64) v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      shift += 7;
      if (!(b & 0x80)) break;
      if (shift > 70) fail(start, "LEB128 value too long");
    }
    return v;
  }

  std::int64_t sleb() {
    std::int64_t v = 0;
    unsigned shift = 0;
    std::size_t start = pos_;
    std::uint8_t b = 0;
    do {
      b = u8();
      if (shift < 64) v |= static_cast<std::int64_t>(static_cast<std::uint64_t>(b & 0x7f) << shift);
      shift += 7;
      if (shift > 70) fail(start, "LEB128 value too long");
    } while (b & 0x80);
    if (shift < 64 && (b & 0x40)) v |= -(static_cast<std::int64_t>(1) << shift);
    return v;
  }

  std::string cstr() {
    std::size_t start = pos_;
    while (pos_ < data_.size() && data_[pos_] != 0) ++pos_;
    if (pos_ >= data_.size()) fail(start, "unterminated string");
    std::string s(reinterpret_cast<const char*>(data_.data() + start), pos_ - start);
    ++pos_;
    return s;
  }

  [[noreturn]] void fail(std::size_t off, const std::string& what) const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%zx", off);
    throw Error(code_, what + " at offset " + buf);
  }

 private:
  std::span<const std::uint8_t> data_;
  bool big_;
  ErrorCode code_;
  std::size_t pos_ = 0;
};

// NUL-terminated string at `off` inside a string table, or "" when out of range.
inline std::string string_at(std::span<const std::uint8_t> table, std::uint64_t off) {
  if (off >= table.size()) return {};
  std::size_t end = static_cast<std::size_t>(off);
  while (end < table.size() && table[end] != 0) ++end;
  return std::string(reinterpret_cast<const char*>(table.data() + off), end - static_cast<std::size_t>(off));
}

}  // namespace statmodel::binary::detail
