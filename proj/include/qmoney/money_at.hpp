#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"
#include "qmoney/money_common.hpp"
#include "qmoney/obf_oracle.hpp"
#include "qmoney/prf_ggm.hpp"
#include "qmoney/qsim.hpp"
#include "qmoney/random.hpp"
#include "qmoney/rpke.hpp"

// Anonymous and traceable public-key quantum money. A banknote is an RPKE
// serial encrypting tag || ict together with the subspace state |T_id A_Can>.
namespace qmoney::money {

struct AtParams {
  std::string rpke_preset = "default";
  int n_q = 8;
  std::size_t tag_bits = 8;
  std::size_t ict_bits = 16;

  std::size_t ell() const { return tag_bits + ict_bits; }
  rpke::RpkeParams rpke() const { return rpke::preset(rpke_preset, ell()); }

  void validate() const {
    if (n_q <= 0 || n_q % 2 != 0 || n_q > qsim::kDefaultMaxQubits) {
      throw InvalidParameters("money: n_q must be even and at most 16");
    }
    if (tag_bits == 0) throw InvalidParameters("money: tag length must be positive");
    rpke();
  }
};

// kStrawman keys the subspace on the plaintext, so rerandomization refreshes
// the serial but hands back the very same state.
enum class AtVariant { kStandard, kStrawman };

struct Banknote {
  rpke::RpkeCiphertext serial;
  qsim::Register reg;
};

struct AtVerificationKey {
  rpke::RpkeParams rpke;
  int n_q = 0;
  MembershipHandle pmem;
  RerandHandle prerand;
};

struct AtMintKey {
  AtParams params;
  Keying keying = Keying::kSerial;
  std::shared_ptr<const MapDeriver> deriver;
  rpke::RpkePublicKey pk;
};

struct AtTracingKey {
  rpke::RpkeSecretKey sk;
  std::size_t tag_bits = 0;
};

struct AtKeys {
  AtParams params;
  AtVariant variant = AtVariant::kStandard;
  AtVerificationKey vk;
  AtMintKey mk;
  AtTracingKey tk;
  std::shared_ptr<obf::ObfRegistry> world;
};

struct AtVerifyResult {
  bool accepted = false;
  Banknote note;
};

inline AtKeys at_setup(const AtParams& params, const Seed& seed, AtVariant variant = AtVariant::kStandard) {
  params.validate();
  AtKeys keys;
  keys.params = params;
  keys.variant = variant;
  keys.world = obf::ObfRegistry::create(derive_seed(seed, "world"));
  RandomStream rs(derive_seed(seed, "setup"));
  auto rp = params.rpke();
  auto rk = rpke::rpke_setup(rp, rs, *keys.world);
  const Keying keying = variant == AtVariant::kStandard ? Keying::kSerial : Keying::kPlaintext;
  auto key = prf::prf_keygen(rs, keying == Keying::kSerial ? rp.ciphertext_bits() : rp.ell, kSeedBitsPerRegister);

  std::optional<rpke::RpkeSecretKey> straw_sk;
  if (keying == Keying::kPlaintext) straw_sk = rk.sk;
  keys.vk.rpke = rp;
  keys.vk.n_q = params.n_q;
  keys.vk.pmem = obfuscate_membership(*keys.world, key, params.n_q, 1, keying, straw_sk);
  keys.vk.prerand = obfuscate_rerand(*keys.world, key, params.n_q, 1, keying, rk.pk, rk.tk);
  keys.mk = {params, keying, std::make_shared<const MapDeriver>(key, params.n_q, 1), rk.pk};
  keys.tk = {rk.sk, params.tag_bits};
  return keys;
}

inline Banknote at_gen_banknote(const AtMintKey& mk, const BitString& tag, RandomStream& stream) {
  if (tag.size() != mk.params.tag_bits) throw ShapeMismatch("money: tag has wrong length");
  auto plaintext = concat(tag, stream.next_bits(mk.params.ict_bits));
  auto serial = rpke::rpke_enc(mk.pk, plaintext, stream);
  auto maps = mk.deriver->maps(mk.keying == Keying::kSerial ? rpke::ciphertext_bits(serial) : plaintext);
  return {std::move(serial), qsim::Register(subspace_state(maps->front()))};
}

inline AtVerifyResult at_verify(const AtVerificationKey& vk, Banknote note, RandomStream& stream) {
  if (note.reg.n_qubits() != vk.n_q) throw ShapeMismatch("money: register has wrong qubit count");
  rpke::check_shape(vk.rpke, note.serial);
  bool ok = dual_basis_check(vk.pmem, note.serial, std::span(&note.reg, 1), stream);
  return {ok, std::move(note)};
}

// Throws RerandomizationRefused when the serial fails the test gate.
inline Banknote at_rerandomize(const AtVerificationKey& vk, Banknote note, RandomStream& stream) {
  if (!note.reg.alive()) throw ConsumedRegister();
  rpke::check_shape(vk.rpke, note.serial);
  auto out = vk.prerand(note.serial, stream.next_bits(vk.rpke.tape_bits()));
  if (!out) throw RerandomizationRefused();
  apply_maps(std::span(&note.reg, 1), out->maps);
  return {std::move(out->serial), std::move(note.reg)};
}

inline BitString at_trace(const AtTracingKey& tk, const Banknote& note) {
  return rpke::rpke_dec(tk.sk, note.serial).prefix(tk.tag_bits);
}

}  // namespace qmoney::money
