#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"
#include "qmoney/gf2.hpp"
#include "qmoney/money_common.hpp"
#include "qmoney/money_ut.hpp"
#include "qmoney/qsim.hpp"
#include "qmoney/random.hpp"
#include "qmoney/rpke.hpp"

// Quantum voting with classical, publicly verifiable cast votes. A token is a
// serial plus 2*lambda_tok subspace states; voting measures register i in the
// computational basis if (c || r)_i = 0 and in the Hadamard basis otherwise.
namespace qmoney::vote {

using money::Crs;
using QvKeys = money::CrsKeys;

inline constexpr std::size_t kDefaultLambdaTok = 8;

struct VotingToken {
  rpke::RpkeCiphertext serial;
  std::vector<qsim::Register> registers;
};

struct CastVote {
  BitString c;  // candidate, lambda_tok bits
  rpke::RpkeCiphertext serial;
  std::vector<gf2::BitVector> vectors;
  BitString r;  // tag, lambda_tok bits

  bool operator==(const CastVote&) const = default;
};

inline std::size_t lambda_tok(const money::CrsVerificationKey& vk) { return vk.registers / 2; }

inline QvKeys qv_setup(const Crs& crs, const Seed& seed, std::size_t lambda_tok = kDefaultLambdaTok,
                       std::shared_ptr<obf::ObfRegistry> world = nullptr) {
  if (lambda_tok == 0) throw InvalidParameters("vote: lambda_tok must be positive");
  return money::detail::crs_setup(crs, 2 * lambda_tok, seed, std::move(world));
}

inline VotingToken qv_gen_voting_token(const money::CrsMintKey& mk, RandomStream& stream) {
  VotingToken t;
  t.serial = rpke::rpke_enc(mk.pk, BitString(mk.rpke.ell), stream);
  auto maps = mk.deriver->maps(rpke::ciphertext_bits(t.serial));
  for (const auto& m : *maps) t.registers.emplace_back(money::subspace_state(m));
  return t;
}

struct TokenVerifyResult {
  bool accepted = false;
  money::Reject reason = money::Reject::kNone;
  VotingToken token;
};

inline TokenVerifyResult qv_verify_voting_token(const Crs& crs, const money::CrsVerificationKey& vk, VotingToken token,
                                                RandomStream& stream) {
  auto r = money::detail::crs_verify(crs, vk, token.serial, token.registers, stream);
  return {r.accepted, r.reason, {std::move(r.serial), std::move(token.registers)}};
}

// Consumes the token.
inline CastVote qv_vote(VotingToken token, const BitString& c, RandomStream& stream) {
  if (token.registers.empty()) throw ConsumedRegister();
  for (const auto& r : token.registers)
    if (!r.alive()) throw ConsumedRegister();
  const std::size_t lt = token.registers.size() / 2;
  if (c.size() != lt) throw ShapeMismatch("vote: candidate id has wrong length");
  CastVote v{c, std::move(token.serial), {}, stream.next_bits(lt)};
  auto basis = concat(v.c, v.r);
  for (std::size_t i = 0; i < token.registers.size(); ++i) {
    auto how = basis.bit(i) ? qsim::Basis::kHadamard : qsim::Basis::kComputational;
    v.vectors.push_back(qsim::measure_basis(token.registers[i].release(), how, stream).value);
  }
  return v;
}

// One classical evaluation of the membership handle; throws ShapeMismatch on
// a malformed vote.
inline bool qv_verify_cast_vote(const money::CrsVerificationKey& vk, const CastVote& vote) {
  const std::size_t lt = lambda_tok(vk);
  if (vote.c.size() != lt || vote.r.size() != lt || vote.vectors.size() != vk.registers) {
    throw ShapeMismatch("vote: malformed cast vote");
  }
  rpke::check_shape(vk.rpke, vote.serial);
  for (const auto& v : vote.vectors)
    if (v.dim() != vk.n_q) throw ShapeMismatch("vote: vector of wrong dimension");
  return vk.pmem(vote.serial, std::span<const gf2::BitVector>(vote.vectors), concat(vote.c, vote.r));
}

struct TallyRejection {
  std::size_t index = 0;
  std::string reason;
};

struct TallyReport {
  std::map<BitString, std::size_t> counts;
  std::vector<TallyRejection> rejected;
  std::size_t counted = 0;
};

// Invalid votes are dropped; among valid votes sharing a tag only the first counts.
inline TallyReport qv_tally(const money::CrsVerificationKey& vk, const std::vector<CastVote>& votes) {
  TallyReport report;
  std::set<BitString> seen;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    bool ok = false;
    try {
      ok = qv_verify_cast_vote(vk, votes[i]);
    } catch (const ShapeMismatch&) {
      report.rejected.push_back({i, "malformed"});
      continue;
    }
    if (!ok) {
      report.rejected.push_back({i, "invalid"});
    } else if (!seen.insert(votes[i].r).second) {
      report.rejected.push_back({i, "duplicate tag"});
    } else {
      ++report.counts[votes[i].c];
      ++report.counted;
    }
  }
  return report;
}

}  // namespace qmoney::vote
