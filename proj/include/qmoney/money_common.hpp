#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/codec.hpp"
#include "qmoney/error.hpp"
#include "qmoney/gf2.hpp"
#include "qmoney/obf_oracle.hpp"
#include "qmoney/prf_ggm.hpp"
#include "qmoney/qsim.hpp"
#include "qmoney/random.hpp"
#include "qmoney/rpke.hpp"

// Pieces shared by the money and voting schemes: per-serial subspace maps,
// the membership and rerandomization programs, and the dual-basis check.
namespace qmoney::money {

using Maps = std::vector<gf2::LinearMap>;

// How the membership and rerandomization programs turn a serial into PRF input.
//   kSerial:    F(K, id), the real construction.
//   kPlaintext: F(K, Dec(sk, id)); rerandomization then leaves the state alone.
enum class Keying : std::uint32_t { kSerial = 0, kPlaintext = 1 };

inline constexpr std::size_t kSeedBitsPerRegister = 256;

// T_1..T_k = SampleFullRank(F(K, x)), one 256-bit PRF block per register, with
// a small LRU cache so repeated evaluations on one serial stay cheap.
class MapDeriver {
 public:
  MapDeriver(prf::PrfKey key, int n_q, std::size_t registers, std::size_t capacity = 64)
      : key_(std::move(key)), n_q_(n_q), registers_(registers), capacity_(capacity) {
    if (key_.output_len != registers * kSeedBitsPerRegister) throw InvalidParameters("map deriver: PRF output length");
  }

  const prf::PrfKey& key() const { return key_; }
  int n_q() const { return n_q_; }
  std::size_t registers() const { return registers_; }

  std::shared_ptr<const Maps> maps(const BitString& input) const {
    ByteWriter w;
    codec::put(w, input);
    auto tag = qmoney::detail::sha256(w.data());
    {
      std::lock_guard lock(mu_);
      if (auto it = index_.find(tag); it != index_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second);
        return it->second->second;
      }
    }
    auto bits = prf::prf_eval(key_, input);
    auto out = std::make_shared<Maps>();
    out->reserve(registers_);
    for (std::size_t i = 0; i < registers_; ++i) {
      auto block = bits.slice(i * kSeedBitsPerRegister, kSeedBitsPerRegister);
      Seed seed{};
      std::copy_n(block.bytes().begin(), seed.size(), seed.begin());
      RandomStream rs(seed);
      out->push_back(gf2::sample_full_rank(n_q_, rs));
    }
    std::lock_guard lock(mu_);
    if (!index_.count(tag)) {
      lru_.emplace_front(tag, out);
      index_[tag] = lru_.begin();
      if (lru_.size() > capacity_) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
      }
    }
    return out;
  }

 private:
  prf::PrfKey key_;
  int n_q_;
  std::size_t registers_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  mutable std::list<std::pair<Seed, std::shared_ptr<const Maps>>> lru_;
  mutable std::map<Seed, decltype(lru_)::iterator> index_;
};

inline std::uint64_t low_half(int n_q) { return gf2::low_mask(n_q / 2); }
inline std::uint64_t high_half(int n_q) { return gf2::low_mask(n_q) & ~low_half(n_q); }

// Coordinate-wise check for one register: basis bit 0 asks T^-1 v in A_Can,
// basis bit 1 asks T^T v in A_Can^perp.
inline bool member(const gf2::LinearMap& t, int n_q, bool hadamard, std::uint64_t v) {
  if (!hadamard) return (t.inverse_matrix().apply_word(v) & high_half(n_q)) == 0;
  return (t.transpose_matrix().apply_word(v) & low_half(n_q)) == 0;
}

// The membership program with its classical input (id, basis) fixed: what a
// coherent evaluation on the registers needs.
class MembershipPredicate {
 public:
  MembershipPredicate(std::shared_ptr<const Maps> maps, int n_q, BitString basis)
      : maps_(std::move(maps)), n_q_(n_q), basis_(std::move(basis)) {}

  std::size_t registers() const { return maps_->size(); }
  bool operator()(std::size_t reg, std::uint64_t v) const { return member((*maps_)[reg], n_q_, basis_.bit(reg), v); }
  bool operator()(std::size_t reg, const gf2::BitVector& v) const { return (*this)(reg, v.word()); }

 private:
  std::shared_ptr<const Maps> maps_;
  int n_q_;
  BitString basis_;
};

inline BitString uniform_basis(std::size_t registers, bool hadamard) {
  BitString b(registers);
  for (std::size_t i = 0; i < registers; ++i) b.set(i, hadamard);
  return b;
}

// PMem(id, (v_i), b) = AND_i [v_i in T_i A_Can if b_i = 0, v_i in (T_i A_Can)^perp if b_i = 1].
class MembershipProgram final : public obf::SealedProgram {
 public:
  static constexpr const char* kKind = "pmem";

  MembershipProgram(prf::PrfKey key, int n_q, std::size_t registers, Keying keying,
                    std::optional<rpke::RpkeSecretKey> sk = std::nullopt)
      : deriver_(std::move(key), n_q, registers), keying_(keying), sk_(std::move(sk)) {
    if (keying_ == Keying::kPlaintext && !sk_) throw InvalidParameters("pmem: plaintext keying needs a secret key");
  }

  std::string kind() const override { return kKind; }
  std::vector<std::uint8_t> descriptor() const override {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(deriver_.n_q())).u64(deriver_.registers());
    codec::put(w, deriver_.key());
    w.u32(static_cast<std::uint32_t>(keying_));
    if (sk_) codec::put(w, *sk_);
    return w.take();
  }
  static std::shared_ptr<const obf::SealedProgram> from_descriptor(std::span<const std::uint8_t> d) {
    ByteReader r(d);
    int n_q = static_cast<int>(r.u32());
    auto registers = r.u64();
    auto key = codec::get_prf_key(r);
    auto keying = static_cast<Keying>(r.u32());
    std::optional<rpke::RpkeSecretKey> sk;
    if (keying == Keying::kPlaintext) sk = codec::get_secret_key(r);
    if (!r.done()) throw FormatError("pmem descriptor has trailing bytes");
    return std::make_shared<MembershipProgram>(std::move(key), n_q, registers, keying, std::move(sk));
  }

  int n_q() const { return deriver_.n_q(); }
  std::size_t registers() const { return deriver_.registers(); }

  MembershipPredicate bind(const rpke::RpkeCiphertext& id, const BitString& basis) const {
    if (basis.size() != registers()) throw ShapeMismatch("pmem: basis string length differs from register count");
    return {maps_for(id), n_q(), basis};
  }

  bool evaluate(const rpke::RpkeCiphertext& id, std::span<const gf2::BitVector> v, const BitString& basis) const {
    if (v.size() != registers()) throw ShapeMismatch("pmem: vector count differs from register count");
    auto pred = bind(id, basis);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].dim() != n_q()) throw ShapeMismatch("pmem: vector of wrong dimension");
      if (!pred(i, v[i])) return false;
    }
    return true;
  }

 private:
  std::shared_ptr<const Maps> maps_for(const rpke::RpkeCiphertext& id) const {
    if (keying_ == Keying::kPlaintext) return deriver_.maps(rpke::rpke_dec(*sk_, id));
    if (id.words.size() * 32 != deriver_.key().input_len) throw ShapeMismatch("pmem: serial of wrong size");
    return deriver_.maps(rpke::ciphertext_bits(id));
  }

  MapDeriver deriver_;
  Keying keying_;
  std::optional<rpke::RpkeSecretKey> sk_;
};

using MembershipHandle = obf::ProgramHandle<MembershipProgram>;

struct RerandOutput {
  rpke::RpkeCiphertext serial;
  Maps maps;  // T_{id'} T_{id}^-1 per register
};

// PReRand(id, s): bottom unless Test(id) is GOOD, else (id', T_{id'} T_{id}^-1).
// Test handles are referenced by id so the program does not keep its own
// registry alive.
class RerandProgram final : public obf::SealedProgram {
 public:
  static constexpr const char* kKind = "prerand";

  RerandProgram(std::weak_ptr<obf::ObfRegistry> world, prf::PrfKey key, int n_q, std::size_t registers, Keying keying,
                rpke::RpkePublicKey pk, std::vector<obf::HandleId> test_ids)
      : world_(std::move(world)),
        deriver_(std::move(key), n_q, registers),
        keying_(keying),
        pk_(std::move(pk)),
        test_ids_(std::move(test_ids)) {
    if (test_ids_.size() != pk_.params.ell) throw InvalidParameters("prerand: one test handle per component");
  }

  std::string kind() const override { return kKind; }
  std::vector<std::uint8_t> descriptor() const override {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(deriver_.n_q())).u64(deriver_.registers());
    codec::put(w, deriver_.key());
    w.u32(static_cast<std::uint32_t>(keying_));
    codec::put(w, pk_);
    w.u64(test_ids_.size());
    for (const auto& id : test_ids_) w.bytes(id);
    return w.take();
  }
  static std::shared_ptr<const obf::SealedProgram> from_descriptor(const std::shared_ptr<obf::ObfRegistry>& world,
                                                                   std::span<const std::uint8_t> d) {
    ByteReader r(d);
    int n_q = static_cast<int>(r.u32());
    auto registers = r.u64();
    auto key = codec::get_prf_key(r);
    auto keying = static_cast<Keying>(r.u32());
    auto pk = codec::get_public_key(r);
    std::vector<obf::HandleId> ids(r.u64());
    for (auto& id : ids) {
      auto b = r.bytes();
      if (b.size() != id.size()) throw FormatError("prerand: bad test handle id");
      std::copy(b.begin(), b.end(), id.begin());
    }
    if (!r.done()) throw FormatError("prerand descriptor has trailing bytes");
    return std::make_shared<RerandProgram>(world, std::move(key), n_q, registers, keying, std::move(pk),
                                           std::move(ids));
  }

  const rpke::RpkeParams& params() const { return pk_.params; }

  std::optional<RerandOutput> evaluate(const rpke::RpkeCiphertext& id, const BitString& tape) const {
    rpke::check_shape(pk_.params, id);
    if (tape.size() != pk_.params.tape_bits()) throw ShapeMismatch("prerand: tape of wrong length");
    if (rpke::rpke_test(pk_.params, test_key(), id) == rpke::TestResult::kBad) return std::nullopt;
    RerandOutput out{rpke::rpke_rerand_with_tape(pk_, id, tape), {}};
    if (keying_ == Keying::kPlaintext) {
      out.maps.assign(deriver_.registers(), gf2::LinearMap::identity(deriver_.n_q()));
      return out;
    }
    auto before = deriver_.maps(rpke::ciphertext_bits(id));
    auto after = deriver_.maps(rpke::ciphertext_bits(out.serial));
    for (std::size_t i = 0; i < before->size(); ++i) {
      out.maps.push_back(gf2::compose((*after)[i], (*before)[i].inverted()));
    }
    return out;
  }

 private:
  rpke::RpkeTestKey test_key() const {
    auto world = world_.lock();
    if (!world) throw UnknownHandle("prerand: registry is gone");
    rpke::RpkeTestKey tk;
    for (const auto& id : test_ids_) tk.handles.push_back(world->handle<obf::CompareProgram>(id));
    return tk;
  }

  std::weak_ptr<obf::ObfRegistry> world_;
  MapDeriver deriver_;
  Keying keying_;
  rpke::RpkePublicKey pk_;
  std::vector<obf::HandleId> test_ids_;
};

using RerandHandle = obf::ProgramHandle<RerandProgram>;

namespace detail {
inline const bool kMoneyKindsRegistered =
    obf::register_program_kind(MembershipProgram::kKind,
                               [](const std::shared_ptr<obf::ObfRegistry>&, std::span<const std::uint8_t> d) {
                                 return MembershipProgram::from_descriptor(d);
                               }) &&
    obf::register_program_kind(RerandProgram::kKind, [](const std::shared_ptr<obf::ObfRegistry>& world,
                                                        std::span<const std::uint8_t> d) {
      return RerandProgram::from_descriptor(world, d);
    });
}  // namespace detail

inline MembershipHandle obfuscate_membership(obf::ObfRegistry& world, prf::PrfKey key, int n_q, std::size_t registers,
                                             Keying keying, std::optional<rpke::RpkeSecretKey> sk = std::nullopt,
                                             std::span<const std::uint8_t> tape = {}) {
  auto p = std::make_shared<const MembershipProgram>(std::move(key), n_q, registers, keying, std::move(sk));
  return world.obfuscate(p, tape);
}

inline RerandHandle obfuscate_rerand(obf::ObfRegistry& world, prf::PrfKey key, int n_q, std::size_t registers,
                                     Keying keying, rpke::RpkePublicKey pk, const rpke::RpkeTestKey& tk) {
  std::vector<obf::HandleId> ids;
  for (const auto& h : tk.handles) ids.push_back(h.id());
  auto p = std::make_shared<const RerandProgram>(world.weak_from_this(), std::move(key), n_q, registers, keying,
                                                 std::move(pk), std::move(ids));
  return world.obfuscate(p);
}

// The subspace state |T A_Can>.
inline qsim::QState subspace_state(const gf2::LinearMap& t) {
  return qsim::prepare_subspace_state(gf2::subspace_image(t, gf2::canonical_subspace(t.dim())));
}

// Projective check of every register against the states of id: project onto
// the basis-0 memberships, Fourier transform, project onto the basis-1
// memberships, transform back. Registers are checked one after another and
// the first rejection ends the check.
inline bool dual_basis_check(const MembershipHandle& pmem, const rpke::RpkeCiphertext& id,
                             std::span<qsim::Register> registers, RandomStream& stream) {
  auto comp = pmem.bind(id, uniform_basis(registers.size(), false));
  auto had = pmem.bind(id, uniform_basis(registers.size(), true));
  for (std::size_t i = 0; i < registers.size(); ++i) {
    auto state = registers[i].release();
    auto first = qsim::project_predicate(state, [&](const gf2::BitVector& v) { return comp(i, v); }, stream);
    if (!first.accepted) {
      registers[i] = qsim::Register(std::move(first.post_state));
      return false;
    }
    auto second = qsim::project_predicate(qsim::hadamard_all(first.post_state),
                                          [&](const gf2::BitVector& v) { return had(i, v); }, stream);
    registers[i] = qsim::Register(qsim::hadamard_all(second.post_state));
    if (!second.accepted) return false;
  }
  return true;
}

// Applies per-register maps coherently.
inline void apply_maps(std::span<qsim::Register> registers, const Maps& maps) {
  if (maps.size() != registers.size()) throw ShapeMismatch("map count differs from register count");
  for (std::size_t i = 0; i < registers.size(); ++i) {
    registers[i] = qsim::Register(qsim::apply_linear_map(registers[i].release(), maps[i]));
  }
}

}  // namespace qmoney::money
