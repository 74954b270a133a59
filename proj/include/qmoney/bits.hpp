#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmoney/error.hpp"

namespace qmoney {

// Arbitrary-length bit string. Bit i lives in bytes[i / 8] at position i % 8
// (LSB first); bits past size() are always zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t nbits) : bytes_((nbits + 7) / 8, 0), size_(nbits) {}

  static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    if (bytes.size() * 8 < nbits) throw FormatError("bit string: not enough bytes");
    BitString out(nbits);
    std::copy_n(bytes.begin(), out.bytes_.size(), out.bytes_.begin());
    out.mask_tail();
    return out;
  }

  // Parses a string of '0'/'1' characters, first character is bit 0.
  static BitString from_string(std::string_view s) {
    BitString out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') {
        out.set(i, true);
      } else if (s[i] != '0') {
        throw FormatError("bit string: expected only '0' and '1'");
      }
    }
    return out;
  }

  static BitString from_uint(std::uint64_t value, std::size_t nbits) {
    BitString out(nbits);
    for (std::size_t i = 0; i < nbits && i < 64; ++i) out.set(i, (value >> i) & 1U);
    return out;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

  bool bit(std::size_t i) const { return (bytes_[i / 8] >> (i % 8)) & 1U; }
  void set(std::size_t i, bool v) {
    auto mask = static_cast<std::uint8_t>(1U << (i % 8));
    if (v) {
      bytes_[i / 8] |= mask;
    } else {
      bytes_[i / 8] &= static_cast<std::uint8_t>(~mask);
    }
  }

  // Low 64 bits as an integer (bit 0 is the least significant).
  std::uint64_t to_uint() const {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < size_ && i < 64; ++i) v |= static_cast<std::uint64_t>(bit(i)) << i;
    return v;
  }

  BitString slice(std::size_t offset, std::size_t len) const {
    if (offset + len > size_) throw FormatError("bit string: slice out of range");
    BitString out(len);
    if (offset % 8 == 0) {
      std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(offset / 8), out.bytes_.size(),
                  out.bytes_.begin());
      out.mask_tail();
      return out;
    }
    for (std::size_t i = 0; i < len; ++i) out.set(i, bit(offset + i));
    return out;
  }

  BitString prefix(std::size_t len) const { return slice(0, len); }

  friend BitString concat(const BitString& a, const BitString& b) {
    BitString out(a.size_ + b.size_);
    std::copy(a.bytes_.begin(), a.bytes_.end(), out.bytes_.begin());
    for (std::size_t i = 0; i < b.size_; ++i) out.set(a.size_ + i, b.bit(i));
    return out;
  }

  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) s[i] = bit(i) ? '1' : '0';
    return s;
  }

  bool operator==(const BitString&) const = default;
  auto operator<=>(const BitString&) const = default;

 private:
  void mask_tail() {
    if (size_ % 8 != 0 && !bytes_.empty()) {
      bytes_.back() &= static_cast<std::uint8_t>((1U << (size_ % 8)) - 1U);
    }
  }

  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

inline std::vector<std::uint8_t> from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw FormatError("hex: odd length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw FormatError("hex: invalid digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

inline std::string to_base64(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                          static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

inline std::vector<std::uint8_t> from_base64(std::string_view text) {
  if (text.size() % 4 != 0) throw FormatError("base64: length not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw FormatError("base64: invalid input");
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

// Length-prefixed little-endian encoder used for program descriptors.
class ByteWriter {
 public:
  ByteWriter& u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  ByteWriter& u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  ByteWriter& bytes(std::span<const std::uint8_t> b) {
    u64(b.size());
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
  }
  ByteWriter& words(std::span<const std::uint32_t> w) {
    u64(w.size());
    for (auto v : w) u32(v);
    return *this;
  }
  ByteWriter& str(std::string_view s) {
    return bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  }
  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::vector<std::uint8_t> bytes() {
    auto n = u64();
    need(n);
    std::vector<std::uint8_t> out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  std::vector<std::uint32_t> words() {
    auto n = u64();
    need(4 * n);
    std::vector<std::uint32_t> out(n);
    for (auto& w : out) w = u32();
    return out;
  }
  std::string str() {
    auto b = bytes();
    return {b.begin(), b.end()};
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw FormatError("descriptor truncated");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace qmoney
