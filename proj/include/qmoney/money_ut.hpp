#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"
#include "qmoney/money_at.hpp"
#include "qmoney/money_common.hpp"
#include "qmoney/obf_oracle.hpp"
#include "qmoney/prf_ggm.hpp"
#include "qmoney/qsim.hpp"
#include "qmoney/random.hpp"
#include "qmoney/rpke.hpp"

// Untraceable quantum money in the common random string model. The public key
// is read off the CRS, the test key is the all-accept simulation, and verify
// rerandomizes every note it accepts.
namespace qmoney::money {

struct UtParams {
  std::string rpke_preset = "default";
  int n_q = 8;
  std::size_t lambda = 16;  // plaintext length
  std::size_t nizk_bytes = 32;

  rpke::RpkeParams rpke() const { return rpke::preset(rpke_preset, lambda); }
  std::size_t crs_bits() const { return nizk_bytes * 8 + rpke().public_key_bits(); }

  void validate() const {
    if (n_q <= 0 || n_q % 2 != 0 || n_q > qsim::kDefaultMaxQubits) {
      throw InvalidParameters("money: n_q must be even and at most 16");
    }
    if (nizk_bytes == 0) throw InvalidParameters("money: empty NIZK string");
    rpke();
  }

  bool operator==(const UtParams&) const = default;
};

// crs = crs_nizk || pk.
class Crs {
 public:
  static Crs from_bits(const UtParams& params, BitString bits) {
    params.validate();
    if (bits.size() != params.crs_bits()) throw FormatError("crs has wrong length");
    Crs c;
    c.params_ = params;
    auto nizk = bits.prefix(params.nizk_bytes * 8);
    c.nizk_.assign(nizk.bytes().begin(), nizk.bytes().end());
    c.pk_ = std::make_shared<const rpke::RpkePublicKey>(rpke::rpke_pk_from_random_string(
        params.rpke(), bits.slice(params.nizk_bytes * 8, bits.size() - params.nizk_bytes * 8)));
    c.bits_ = std::move(bits);
    return c;
  }

  const UtParams& params() const { return params_; }
  const BitString& bits() const { return bits_; }
  std::span<const std::uint8_t> nizk() const { return nizk_; }
  const rpke::RpkePublicKey& public_key() const { return *pk_; }

 private:
  UtParams params_;
  BitString bits_;
  std::vector<std::uint8_t> nizk_;
  std::shared_ptr<const rpke::RpkePublicKey> pk_;
};

inline Crs ut_crs_gen(const UtParams& params, const Seed& seed) {
  params.validate();
  RandomStream rs(derive_seed(seed, "crs"));
  return Crs::from_bits(params, rs.next_bits(params.crs_bits()));
}

struct CrsVerificationKey {
  rpke::RpkeParams rpke;
  int n_q = 0;
  std::size_t registers = 0;
  MembershipHandle pmem;
  RerandHandle prerand;
  obf::NizkProof proof{};
};

struct CrsMintKey {
  rpke::RpkeParams rpke;
  std::shared_ptr<const MapDeriver> deriver;
  rpke::RpkePublicKey pk;
};

struct CrsKeys {
  CrsVerificationKey vk;
  CrsMintKey mk;
  std::shared_ptr<obf::ObfRegistry> world;
};

using UtKeys = CrsKeys;

enum class Reject { kNone, kProof, kFirstCheck, kRefused, kSecondCheck };

inline const char* to_string(Reject r) {
  switch (r) {
    case Reject::kNone:
      return "accepted";
    case Reject::kProof:
      return "invalid membership proof";
    case Reject::kFirstCheck:
      return "failed check under the received serial";
    case Reject::kRefused:
      return "rerandomization refused";
    case Reject::kSecondCheck:
      return "failed check under the rerandomized serial";
  }
  return "unknown";
}

namespace detail {

// Shared by the money and voting setups. A null world means a fresh one
// derived from the seed.
inline CrsKeys crs_setup(const Crs& crs, std::size_t registers, const Seed& seed,
                         std::shared_ptr<obf::ObfRegistry> world) {
  const auto& params = crs.params();
  CrsKeys keys;
  keys.world = world ? std::move(world) : obf::ObfRegistry::create(derive_seed(seed, "world"));
  RandomStream rs(derive_seed(seed, "setup"));
  auto rp = params.rpke();
  const auto& pk = crs.public_key();
  auto tk = rpke::rpke_simulate_test_key(rp, *keys.world);
  auto key = prf::prf_keygen(rs, rp.ciphertext_bits(), registers * kSeedBitsPerRegister);
  std::vector<std::uint8_t> tape(32);
  rs.fill(tape);

  keys.vk.rpke = rp;
  keys.vk.n_q = params.n_q;
  keys.vk.registers = registers;
  keys.vk.pmem = obfuscate_membership(*keys.world, key, params.n_q, registers, Keying::kSerial, std::nullopt, tape);
  keys.vk.prerand = obfuscate_rerand(*keys.world, key, params.n_q, registers, Keying::kSerial, pk, tk);
  MembershipProgram witness(key, params.n_q, registers, Keying::kSerial);
  keys.vk.proof = keys.world->nizk_prove(crs.nizk(), keys.vk.pmem.id(), witness, tape);
  keys.mk = {rp, std::make_shared<const MapDeriver>(key, params.n_q, registers), pk};
  return keys;
}

struct CrsVerifyResult {
  bool accepted = false;
  Reject reason = Reject::kNone;
  rpke::RpkeCiphertext serial;
};

// Proof check, dual-basis check under id, rerandomize with the verifier's own
// id' = ReRand(pk, id; s), dual-basis check under id'.
inline CrsVerifyResult crs_verify(const Crs& crs, const CrsVerificationKey& vk, const rpke::RpkeCiphertext& id,
                                  std::span<qsim::Register> registers, RandomStream& stream) {
  if (registers.size() != vk.registers) throw ShapeMismatch("money: wrong number of registers");
  for (auto& r : registers)
    if (r.n_qubits() != vk.n_q) throw ShapeMismatch("money: register has wrong qubit count");
  rpke::check_shape(vk.rpke, id);
  if (!vk.pmem || !vk.pmem.oracle()->nizk_verify(crs.nizk(), vk.pmem.id(), vk.proof)) {
    return {false, Reject::kProof, id};
  }
  if (!dual_basis_check(vk.pmem, id, registers, stream)) return {false, Reject::kFirstCheck, id};
  auto tape = stream.next_bits(vk.rpke.tape_bits());
  auto fresh = rpke::rpke_rerand_with_tape(crs.public_key(), id, tape);
  auto out = vk.prerand(id, tape);
  if (!out) return {false, Reject::kRefused, id};
  apply_maps(registers, out->maps);
  if (!dual_basis_check(vk.pmem, fresh, registers, stream)) return {false, Reject::kSecondCheck, fresh};
  return {true, Reject::kNone, std::move(fresh)};
}

}  // namespace detail

inline UtKeys ut_setup(const Crs& crs, const Seed& seed, std::shared_ptr<obf::ObfRegistry> world = nullptr) {
  return detail::crs_setup(crs, 1, seed, std::move(world));
}

inline Banknote ut_gen_banknote(const CrsMintKey& mk, RandomStream& stream) {
  auto serial = rpke::rpke_enc(mk.pk, BitString(mk.rpke.ell), stream);
  auto maps = mk.deriver->maps(rpke::ciphertext_bits(serial));
  return {std::move(serial), qsim::Register(subspace_state(maps->front()))};
}

struct UtVerifyResult {
  bool accepted = false;
  Reject reason = Reject::kNone;
  Banknote note;  // carries the new serial once the first check passed
};

inline UtVerifyResult ut_verify(const Crs& crs, const CrsVerificationKey& vk, Banknote note, RandomStream& stream) {
  auto r = detail::crs_verify(crs, vk, note.serial, std::span(&note.reg, 1), stream);
  return {r.accepted, r.reason, {std::move(r.serial), std::move(note.reg)}};
}

}  // namespace qmoney::money
