#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"
#include "qmoney/obf_oracle.hpp"
#include "qmoney/random.hpp"

// Rerandomizable public-key encryption: Regev encryption whose decryption
// thresholds carry secret shifts L_i, with public testing through
// compute-and-compare handles. q is a power of two, arithmetic is uint32
// with a mask.
namespace qmoney::rpke {

struct RpkeParams {
  std::string preset;
  std::size_t n_lwe = 0;
  std::size_t m = 0;
  unsigned log_q = 0;
  std::uint32_t noise_bound = 0;  // B; noise is uniform on [-B, B]
  std::size_t ell = 0;

  std::uint64_t q() const { return std::uint64_t{1} << log_q; }
  std::uint32_t mask() const { return static_cast<std::uint32_t>(q() - 1); }
  std::uint32_t quarter() const { return static_cast<std::uint32_t>(q() / 4); }
  std::uint32_t half() const { return static_cast<std::uint32_t>(q() / 2); }
  std::uint32_t sixteenth() const { return static_cast<std::uint32_t>(q() / 16); }
  std::uint64_t max_offset() const { return static_cast<std::uint64_t>(m) * noise_bound; }  // mB

  std::size_t component_words() const { return n_lwe + 1; }
  std::size_t ciphertext_words() const { return ell * component_words(); }
  std::size_t ciphertext_bits() const { return ciphertext_words() * 32; }
  std::size_t public_key_bits() const { return component_words() * m * log_q; }
  std::size_t tape_bits() const { return ell * m; }

  // Enough samples for the leftover-hash argument behind statistical rerandomization.
  bool leftover_hash_slack() const { return m >= component_words() * log_q + 128; }

  void validate() const {
    if (n_lwe == 0 || m == 0 || ell == 0) throw InvalidParameters("rpke: dimensions must be positive");
    if (log_q < 4 || log_q > 32) throw InvalidParameters("rpke: log2 q must lie in [4, 32]");
    if (q() < 64 * max_offset()) throw InvalidParameters("rpke: q must be at least 64 m B");
  }

  bool operator==(const RpkeParams&) const = default;
};

// "default": desk-scale. "exhaustive": small enough to enumerate every
// ciphertext. "statistical": small q with leftover-hash slack, for
// distribution tests.
inline RpkeParams preset(std::string_view name, std::size_t ell) {
  RpkeParams p;
  p.preset = std::string(name);
  p.ell = ell;
  if (name == "default") {
    p.n_lwe = 64, p.m = 2208, p.log_q = 32, p.noise_bound = 4;
  } else if (name == "exhaustive") {
    p.n_lwe = 2, p.m = 4, p.log_q = 8, p.noise_bound = 1;
  } else if (name == "statistical") {
    p.n_lwe = 2, p.m = 176, p.log_q = 16, p.noise_bound = 1;
  } else {
    throw InvalidParameters("rpke: unknown preset '" + std::string(name) + "' (valid: default, exhaustive, statistical)");
  }
  p.validate();
  return p;
}

// Column j of the key is stored as A[0..n)(j) followed by y_j.
struct RpkePublicKey {
  RpkeParams params;
  std::vector<std::uint32_t> columns;

  std::span<const std::uint32_t> column(std::size_t j) const {
    return std::span(columns).subspan(j * params.component_words(), params.component_words());
  }
  bool operator==(const RpkePublicKey&) const = default;
};

struct RpkeSecretKey {
  RpkeParams params;
  std::vector<std::uint32_t> s;
  std::vector<std::uint32_t> shifts;  // L_i in [0, q/16]
  bool operator==(const RpkeSecretKey&) const = default;
};

struct RpkeTestKey {
  std::vector<obf::CompareHandle> handles;
};

// Component i is a_i[0..n) followed by c_i.
struct RpkeCiphertext {
  std::size_t n_lwe = 0;
  std::size_t ell = 0;
  std::vector<std::uint32_t> words;

  std::span<const std::uint32_t> a(std::size_t i) const { return std::span(words).subspan(i * (n_lwe + 1), n_lwe); }
  std::uint32_t c(std::size_t i) const { return words[i * (n_lwe + 1) + n_lwe]; }

  bool operator==(const RpkeCiphertext&) const = default;
  auto operator<=>(const RpkeCiphertext&) const = default;
};

struct RpkeKeys {
  RpkePublicKey pk;
  RpkeTestKey tk;
  RpkeSecretKey sk;
};

inline void check_shape(const RpkeParams& p, const RpkeCiphertext& ct) {
  if (ct.n_lwe != p.n_lwe || ct.ell != p.ell || ct.words.size() != p.ciphertext_words()) {
    throw ShapeMismatch("rpke: ciphertext shape does not match parameters");
  }
}

inline RpkeKeys rpke_setup(const RpkeParams& params, RandomStream& stream, obf::ObfRegistry& registry) {
  params.validate();
  const auto mask = params.mask();
  const std::size_t n = params.n_lwe;
  RpkeKeys keys;
  keys.pk.params = keys.sk.params = params;
  keys.sk.s.resize(n);
  for (auto& v : keys.sk.s) v = stream.next_u32() & mask;
  keys.pk.columns.resize(params.m * (n + 1));
  for (std::size_t j = 0; j < params.m; ++j) {
    std::uint32_t* col = keys.pk.columns.data() + j * (n + 1);
    std::uint32_t y = 0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = stream.next_u32() & mask;
      y += keys.sk.s[i] * col[i];
    }
    auto e = static_cast<std::int64_t>(stream.uniform_below(2 * params.noise_bound + 1)) - params.noise_bound;
    col[n] = (y + static_cast<std::uint32_t>(e)) & mask;
  }
  keys.sk.shifts.resize(params.ell);
  for (auto& l : keys.sk.shifts) {
    l = static_cast<std::uint32_t>(stream.uniform_below(params.sixteenth() + 1));
    keys.tk.handles.push_back(obf::cc_obfuscate(registry, keys.sk.s, params.quarter() + l, mask));
  }
  return keys;
}

// All-zero test key of the right shape: Test reports GOOD on everything.
inline RpkeTestKey rpke_simulate_test_key(const RpkeParams& params, obf::ObfRegistry& registry) {
  RpkeTestKey tk;
  for (std::size_t i = 0; i < params.ell; ++i) {
    tk.handles.push_back(obf::cc_simulate(registry, params.n_lwe, params.mask()));
  }
  return tk;
}

// Bit (i * m + j) of the tape selects column j for component i.
inline RpkeCiphertext rpke_enc_with_tape(const RpkePublicKey& pk, const BitString& mu, const BitString& tape) {
  const auto& p = pk.params;
  if (mu.size() != p.ell) throw ShapeMismatch("rpke: plaintext length differs from ell");
  if (tape.size() != p.tape_bits()) throw ShapeMismatch("rpke: encryption tape has wrong length");
  const std::size_t w = p.component_words();
  RpkeCiphertext ct{p.n_lwe, p.ell, std::vector<std::uint32_t>(p.ciphertext_words(), 0)};
  for (std::size_t i = 0; i < p.ell; ++i) {
    std::uint32_t* acc = ct.words.data() + i * w;
    for (std::size_t j = 0; j < p.m; ++j) {
      if (!tape.bit(i * p.m + j)) continue;
      const std::uint32_t* col = pk.columns.data() + j * w;
      for (std::size_t k = 0; k < w; ++k) acc[k] += col[k];
    }
    if (mu.bit(i)) acc[w - 1] += p.half();
    for (std::size_t k = 0; k < w; ++k) acc[k] &= p.mask();
  }
  return ct;
}

inline RpkeCiphertext rpke_enc(const RpkePublicKey& pk, const BitString& mu, RandomStream& stream) {
  return rpke_enc_with_tape(pk, mu, stream.next_bits(pk.params.tape_bits()));
}

// ct + Enc(pk, 0; tape).
inline RpkeCiphertext rpke_rerand_with_tape(const RpkePublicKey& pk, const RpkeCiphertext& ct, const BitString& tape) {
  check_shape(pk.params, ct);
  auto zero = rpke_enc_with_tape(pk, BitString(pk.params.ell), tape);
  for (std::size_t k = 0; k < zero.words.size(); ++k) zero.words[k] = (zero.words[k] + ct.words[k]) & pk.params.mask();
  return zero;
}

inline RpkeCiphertext rpke_rerand(const RpkePublicKey& pk, const RpkeCiphertext& ct, RandomStream& stream) {
  return rpke_rerand_with_tape(pk, ct, stream.next_bits(pk.params.tape_bits()));
}

enum class TestResult { kGood, kBad };

// Shifts sh for which a handle firing on (a, c + sh) means c - <s,a> sits
// within mB of a decryption threshold.
inline std::vector<obf::OffsetRange> bad_shift_ranges(const RpkeParams& p) {
  auto mb = static_cast<std::int64_t>(p.max_offset());
  auto q4 = static_cast<std::int64_t>(p.quarter());
  return {{-mb + 1, mb}, {2 * q4 - mb, 2 * q4 - 1 + mb}};
}

inline TestResult rpke_test(const RpkeParams& params, const RpkeTestKey& tk, const RpkeCiphertext& ct) {
  check_shape(params, ct);
  if (tk.handles.size() != params.ell) throw ShapeMismatch("rpke: test key has wrong number of handles");
  auto ranges = bad_shift_ranges(params);
  for (std::size_t i = 0; i < params.ell; ++i) {
    if (tk.handles[i].fires_in_window(ct.a(i), ct.c(i), ranges)) return TestResult::kBad;
  }
  return TestResult::kGood;
}

// Same result as rpke_test, by evaluating every shift one at a time.
inline TestResult rpke_test_pointwise(const RpkeParams& params, const RpkeTestKey& tk, const RpkeCiphertext& ct) {
  check_shape(params, ct);
  if (tk.handles.size() != params.ell) throw ShapeMismatch("rpke: test key has wrong number of handles");
  for (std::size_t i = 0; i < params.ell; ++i) {
    for (const auto& r : bad_shift_ranges(params)) {
      for (std::int64_t sh = r.lo; sh <= r.hi; ++sh) {
        auto c = static_cast<std::uint32_t>((static_cast<std::int64_t>(ct.c(i)) + sh)) & params.mask();
        if (tk.handles[i](ct.a(i), c)) return TestResult::kBad;
      }
    }
  }
  return TestResult::kGood;
}

// Representative of x mod q in (-q/2, q/2].
inline std::int64_t centered(std::uint32_t x, const RpkeParams& p) {
  x &= p.mask();
  return x > p.half() ? static_cast<std::int64_t>(x) - static_cast<std::int64_t>(p.q()) : static_cast<std::int64_t>(x);
}

// c_i - <s, a_i> - L_i mod q, the value whose position decides bit i.
inline std::uint32_t phase(const RpkeSecretKey& sk, const RpkeCiphertext& ct, std::size_t i) {
  auto a = ct.a(i);
  std::uint32_t dot = 0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += sk.s[k] * a[k];
  return (ct.c(i) - dot - sk.shifts[i]) & sk.params.mask();
}

inline BitString rpke_dec(const RpkeSecretKey& sk, const RpkeCiphertext& ct) {
  const auto& p = sk.params;
  check_shape(p, ct);
  BitString out(p.ell);
  const auto q4 = static_cast<std::int64_t>(p.quarter());
  for (std::size_t i = 0; i < p.ell; ++i) {
    auto x = centered(phase(sk, ct, i), p);
    out.set(i, !(x > -q4 && x < q4));
  }
  return out;
}

// Entry-wise canonical encoding: for each column j, A(0..n)(j) then y_j, each
// log2 q bits, least significant bit first.
inline BitString rpke_pk_to_bits(const RpkePublicKey& pk) {
  const auto& p = pk.params;
  BitString out(p.public_key_bits());
  std::size_t pos = 0;
  for (auto v : pk.columns)
    for (unsigned b = 0; b < p.log_q; ++b) out.set(pos++, (v >> b) & 1U);
  return out;
}

inline RpkePublicKey rpke_pk_from_random_string(const RpkeParams& params, const BitString& bits) {
  params.validate();
  if (bits.size() != params.public_key_bits()) throw FormatError("rpke: public key string has wrong length");
  RpkePublicKey pk{params, std::vector<std::uint32_t>(params.m * params.component_words(), 0)};
  std::size_t pos = 0;
  for (auto& v : pk.columns)
    for (unsigned b = 0; b < params.log_q; ++b) v |= static_cast<std::uint32_t>(bits.bit(pos++)) << b;
  return pk;
}

// Serial-number encoding: every word as a 32-bit little-endian limb.
inline BitString ciphertext_bits(const RpkeCiphertext& ct) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(ct.words.size() * 4);
  for (auto w : ct.words)
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  return BitString::from_bytes(bytes, bytes.size() * 8);
}

}  // namespace qmoney::rpke
