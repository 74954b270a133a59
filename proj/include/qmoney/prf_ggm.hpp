#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"
#include "qmoney/random.hpp"

// GGM puncturable PRF. Node seeds are 128 bits. The length-doubling generator
// is G(s) = (E_0(s) ^ s, E_1(s) ^ s) and the output block i of a leaf is
// E_2(s ^ i) ^ s ^ i, where E_j is AES-128 under fixed public key j.
namespace qmoney::prf {

using NodeSeed = std::array<std::uint8_t, 16>;

namespace detail {

class FixedKeyAes {
 public:
  explicit FixedKeyAes(std::uint8_t key_id) : ctx_(EVP_CIPHER_CTX_new()) {
    std::array<std::uint8_t, 16> key{};
    for (std::size_t i = 0; i < key.size(); ++i) key[i] = static_cast<std::uint8_t>(0xA5 ^ (key_id * 16 + i));
    if (!ctx_ || EVP_EncryptInit_ex(ctx_.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1) {
      throw Error("prf: cipher init failed");
    }
    EVP_CIPHER_CTX_set_padding(ctx_.get(), 0);
  }

  // Davies-Meyer style block: E(x) ^ x.
  NodeSeed mix(const NodeSeed& x) const {
    NodeSeed out{};
    int len = 0;
    if (EVP_EncryptUpdate(ctx_.get(), out.data(), &len, x.data(), 16) != 1 || len != 16) {
      throw Error("prf: block encryption failed");
    }
    for (std::size_t i = 0; i < 16; ++i) out[i] ^= x[i];
    return out;
  }

 private:
  qmoney::detail::CipherCtx ctx_;
};

inline const FixedKeyAes& generator(int which) {
  thread_local const FixedKeyAes g0(0), g1(1), g2(2);
  switch (which) {
    case 0:
      return g0;
    case 1:
      return g1;
    default:
      return g2;
  }
}

inline NodeSeed child(const NodeSeed& s, bool bit) { return generator(bit ? 1 : 0).mix(s); }

inline BitString expand(const NodeSeed& leaf, std::size_t output_len) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve((output_len + 127) / 128 * 16);
  for (std::uint64_t block = 0; bytes.size() * 8 < output_len; ++block) {
    NodeSeed x = leaf;
    for (int i = 0; i < 8; ++i) x[static_cast<std::size_t>(i)] ^= static_cast<std::uint8_t>(block >> (8 * i));
    auto y = generator(2).mix(x);
    bytes.insert(bytes.end(), y.begin(), y.end());
  }
  return BitString::from_bytes(bytes, output_len);
}

inline NodeSeed descend(NodeSeed s, const BitString& x, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) s = child(s, x.bit(i));
  return s;
}

}  // namespace detail

struct PrfKey {
  NodeSeed root{};
  std::size_t input_len = 0;
  std::size_t output_len = 0;

  bool operator==(const PrfKey&) const = default;
};

inline PrfKey prf_keygen(RandomStream& stream, std::size_t input_len, std::size_t output_len) {
  if (input_len == 0 || output_len == 0) throw InvalidParameters("prf: lengths must be positive");
  PrfKey k;
  stream.fill(k.root);
  k.input_len = input_len;
  k.output_len = output_len;
  return k;
}

inline BitString prf_eval(const PrfKey& k, const BitString& x) {
  if (x.size() != k.input_len) throw FormatError("prf: wrong input length");
  return detail::expand(detail::descend(k.root, x, 0, x.size()), k.output_len);
}

// Key punctured at a set S: holds the seed of every sibling hanging off a path
// to a point of S, except siblings that are themselves on such a path.
class PuncturedPrfKey {
 public:
  std::size_t input_len() const { return input_len_; }
  std::size_t output_len() const { return output_len_; }
  const std::vector<BitString>& punctured_set() const { return points_; }

  // Each entry: depth (prefix length) and the prefix bits, mapped to the node seed.
  const std::map<std::pair<std::size_t, BitString>, NodeSeed>& copath_seeds() const { return seeds_; }

  // nullopt exactly on punctured points.
  std::optional<BitString> try_eval(const BitString& x) const {
    if (x.size() != input_len_) throw FormatError("prf: wrong input length");
    // The deepest divergence from any punctured point locates the stored node.
    std::size_t deepest = 0;
    for (const auto& p : points_) {
      std::size_t lcp = common_prefix(p, x);
      if (lcp == input_len_) return std::nullopt;
      deepest = std::max(deepest, lcp);
    }
    auto it = seeds_.find({deepest + 1, x.prefix(deepest + 1)});
    if (it == seeds_.end()) throw Error("prf: punctured key is missing a co-path seed");
    return detail::expand(detail::descend(it->second, x, deepest + 1, input_len_), output_len_);
  }

  static PuncturedPrfKey from_parts(std::size_t input_len, std::size_t output_len, std::vector<BitString> points,
                                    std::map<std::pair<std::size_t, BitString>, NodeSeed> seeds) {
    PuncturedPrfKey k;
    k.input_len_ = input_len;
    k.output_len_ = output_len;
    k.points_ = std::move(points);
    k.seeds_ = std::move(seeds);
    return k;
  }

  static std::size_t common_prefix(const BitString& a, const BitString& b) {
    auto ab = a.bytes();
    auto bb = b.bytes();
    std::size_t i = 0;
    while (i < ab.size() && ab[i] == bb[i]) ++i;
    std::size_t bit = i * 8;
    while (bit < a.size() && a.bit(bit) == b.bit(bit)) ++bit;
    return std::min(bit, a.size());
  }

 private:
  std::size_t input_len_ = 0;
  std::size_t output_len_ = 0;
  std::vector<BitString> points_;
  std::map<std::pair<std::size_t, BitString>, NodeSeed> seeds_;
};

inline PuncturedPrfKey prf_puncture(const PrfKey& k, std::span<const BitString> set) {
  if (set.empty()) throw InvalidParameters("prf: puncture set is empty");
  std::vector<BitString> points;
  for (const auto& x : set) {
    if (x.size() != k.input_len) throw FormatError("prf: punctured input has wrong length");
    if (std::find(points.begin(), points.end(), x) == points.end()) points.push_back(x);
  }
  std::map<std::pair<std::size_t, BitString>, NodeSeed> seeds;
  for (const auto& p : points) {
    // The sibling at depth d lies on the path of q exactly when p and q first
    // differ at bit d.
    std::vector<bool> blocked(k.input_len, false);
    for (const auto& q : points)
      if (&q != &p) blocked[PuncturedPrfKey::common_prefix(p, q)] = true;
    NodeSeed node = k.root;
    for (std::size_t d = 0; d < k.input_len; ++d) {
      if (!blocked[d]) {
        BitString sibling = p.prefix(d + 1);
        sibling.set(d, !p.bit(d));
        seeds.emplace(std::pair{d + 1, std::move(sibling)}, detail::child(node, !p.bit(d)));
      }
      node = detail::child(node, p.bit(d));
    }
  }
  return PuncturedPrfKey::from_parts(k.input_len, k.output_len, std::move(points), std::move(seeds));
}

}  // namespace qmoney::prf
