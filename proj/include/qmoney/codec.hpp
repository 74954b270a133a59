#pragma once

#include <cstdint>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"
#include "qmoney/prf_ggm.hpp"
#include "qmoney/rpke.hpp"

// Binary encodings of key material, shared by program descriptors and files.
namespace qmoney::codec {

inline void put(ByteWriter& w, const BitString& b) { w.u64(b.size()).bytes(b.bytes()); }

inline BitString get_bits(ByteReader& r) {
  auto n = r.u64();
  auto bytes = r.bytes();
  if (bytes.size() != (n + 7) / 8) throw FormatError("bit string length does not match its bytes");
  return BitString::from_bytes(bytes, n);
}

inline void put(ByteWriter& w, const rpke::RpkeParams& p) {
  w.str(p.preset).u64(p.n_lwe).u64(p.m).u32(p.log_q).u32(p.noise_bound).u64(p.ell);
}

inline rpke::RpkeParams get_params(ByteReader& r) {
  rpke::RpkeParams p;
  p.preset = r.str();
  p.n_lwe = r.u64();
  p.m = r.u64();
  p.log_q = r.u32();
  p.noise_bound = r.u32();
  p.ell = r.u64();
  p.validate();
  return p;
}

inline void put(ByteWriter& w, const prf::PrfKey& k) { w.bytes(k.root).u64(k.input_len).u64(k.output_len); }

inline prf::PrfKey get_prf_key(ByteReader& r) {
  prf::PrfKey k;
  auto root = r.bytes();
  if (root.size() != k.root.size()) throw FormatError("prf key root must be 16 bytes");
  std::copy(root.begin(), root.end(), k.root.begin());
  k.input_len = r.u64();
  k.output_len = r.u64();
  return k;
}

inline void put(ByteWriter& w, const rpke::RpkePublicKey& pk) {
  put(w, pk.params);
  w.words(pk.columns);
}

inline rpke::RpkePublicKey get_public_key(ByteReader& r) {
  rpke::RpkePublicKey pk;
  pk.params = get_params(r);
  pk.columns = r.words();
  if (pk.columns.size() != pk.params.m * pk.params.component_words()) throw FormatError("public key has wrong size");
  return pk;
}

inline void put(ByteWriter& w, const rpke::RpkeSecretKey& sk) {
  put(w, sk.params);
  w.words(sk.s).words(sk.shifts);
}

inline rpke::RpkeSecretKey get_secret_key(ByteReader& r) {
  rpke::RpkeSecretKey sk;
  sk.params = get_params(r);
  sk.s = r.words();
  sk.shifts = r.words();
  if (sk.s.size() != sk.params.n_lwe || sk.shifts.size() != sk.params.ell) throw FormatError("secret key has wrong size");
  return sk;
}

inline void put(ByteWriter& w, const rpke::RpkeCiphertext& ct) { w.u64(ct.n_lwe).u64(ct.ell).words(ct.words); }

inline rpke::RpkeCiphertext get_ciphertext(ByteReader& r) {
  rpke::RpkeCiphertext ct;
  ct.n_lwe = r.u64();
  ct.ell = r.u64();
  ct.words = r.words();
  if (ct.words.size() != ct.ell * (ct.n_lwe + 1)) throw FormatError("ciphertext has wrong size");
  return ct;
}

}  // namespace qmoney::codec
