#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"

namespace qmoney {

using Seed = std::array<std::uint8_t, 32>;

namespace detail {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

inline Seed sha256(std::span<const std::uint8_t> data) {
  Seed out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  return out;
}

}  // namespace detail

// Labeled seed derivation: SHA-256("qmoney/derive" || parent || label).
inline Seed derive_seed(const Seed& parent, std::string_view label) {
  std::vector<std::uint8_t> buf;
  constexpr std::string_view kDomain = "qmoney/derive";
  buf.insert(buf.end(), kDomain.begin(), kDomain.end());
  buf.insert(buf.end(), parent.begin(), parent.end());
  buf.insert(buf.end(), label.begin(), label.end());
  return detail::sha256(buf);
}

inline Seed seed_from_u64(std::uint64_t root) {
  Seed s{};
  for (int i = 0; i < 8; ++i) s[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(root >> (8 * i));
  return derive_seed(s, "root");
}

inline Seed derive_seed(std::uint64_t root, std::string_view label) {
  return derive_seed(seed_from_u64(root), label);
}

// Deterministic unbounded randomness: the AES-256-CTR keystream under the seed.
class RandomStream {
 public:
  explicit RandomStream(const Seed& seed) : seed_(seed), ctx_(EVP_CIPHER_CTX_new()) {
    static constexpr std::array<std::uint8_t, 16> kIv{};
    if (!ctx_ || EVP_EncryptInit_ex(ctx_.get(), EVP_aes_256_ctr(), nullptr, seed.data(), kIv.data()) != 1) {
      throw Error("RandomStream: cipher init failed");
    }
  }
  RandomStream(std::uint64_t root, std::string_view label) : RandomStream(derive_seed(root, label)) {}

  RandomStream(RandomStream&&) noexcept = default;
  RandomStream& operator=(RandomStream&&) noexcept = default;
  RandomStream(const RandomStream&) = delete;
  RandomStream& operator=(const RandomStream&) = delete;

  void fill(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
      if (pos_ == buffer_.size()) refill();
      std::size_t n = std::min(out.size() - done, buffer_.size() - pos_);
      std::memcpy(out.data() + done, buffer_.data() + pos_, n);
      pos_ += n;
      done += n;
    }
  }

  std::uint64_t next_u64() {
    std::array<std::uint8_t, 8> b{};
    fill(b);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64()); }

  bool next_bit() {
    if (bits_left_ == 0) {
      bit_pool_ = next_u64();
      bits_left_ = 64;
    }
    bool b = bit_pool_ & 1U;
    bit_pool_ >>= 1;
    --bits_left_;
    return b;
  }

  BitString next_bits(std::size_t n) {
    std::vector<std::uint8_t> bytes((n + 7) / 8);
    fill(bytes);
    return BitString::from_bytes(bytes, n);
  }

  // Uniform in [0, bound) by rejection; bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw InvalidParameters("uniform_below: zero bound");
    if ((bound & (bound - 1)) == 0) return next_u64() & (bound - 1);
    std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  Seed next_seed() {
    Seed s{};
    fill(s);
    return s;
  }

  // Independent child stream bound to a label; advances this stream by one seed.
  RandomStream fork(std::string_view label) { return RandomStream(derive_seed(next_seed(), label)); }

  const Seed& seed() const { return seed_; }

 private:
  void refill() {
    static const std::array<std::uint8_t, 4096> kZeros{};
    int len = 0;
    if (EVP_EncryptUpdate(ctx_.get(), buffer_.data(), &len, kZeros.data(), static_cast<int>(kZeros.size())) != 1 ||
        len != static_cast<int>(buffer_.size())) {
      throw Error("RandomStream: keystream generation failed");
    }
    pos_ = 0;
  }

  Seed seed_;
  detail::CipherCtx ctx_;
  std::array<std::uint8_t, 4096> buffer_{};
  std::size_t pos_ = 4096;
  std::uint64_t bit_pool_ = 0;
  int bits_left_ = 0;
};

}  // namespace qmoney
