#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"
#include "qmoney/money_at.hpp"
#include "qmoney/money_common.hpp"
#include "qmoney/money_ut.hpp"
#include "qmoney/qsim.hpp"
#include "qmoney/qvote.hpp"
#include "qmoney/random.hpp"
#include "qmoney/unphysical.hpp"

// Challengers for the security games, baseline adversaries, and win-rate
// statistics. Every trial runs in its own world with seeds derived from
// (seed, game, trial index).
namespace qmoney::games {

using money::AtKeys;
using money::AtMintKey;
using money::AtParams;
using money::AtTracingKey;
using money::AtVariant;
using money::AtVerificationKey;
using money::Banknote;

struct TrialStats {
  std::string game;
  std::string scheme;
  std::string adversary;
  std::uint64_t seed = 0;
  std::vector<bool> outcomes;
  std::size_t aborted = 0;  // trials lost to adversary protocol violations

  std::size_t trials() const { return outcomes.size(); }
  std::size_t wins() const { return static_cast<std::size_t>(std::count(outcomes.begin(), outcomes.end(), true)); }
  double rate() const { return outcomes.empty() ? 0.0 : static_cast<double>(wins()) / static_cast<double>(trials()); }

  // Wilson score interval at 95%.
  std::pair<double, double> wilson() const {
    if (outcomes.empty()) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials());
    const double p = rate();
    const double denom = 1 + z * z / n;
    const double center = (p + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
  }
  double ci_low() const { return wilson().first; }
  double ci_high() const { return wilson().second; }
};

// Seeds for trial i of a game.
struct TrialSeeds {
  Seed setup;
  Seed challenger;
  Seed adversary;
};

inline TrialSeeds trial_seeds(std::uint64_t seed, std::string_view game, std::size_t i) {
  auto base = derive_seed(derive_seed(seed, game), "trial/" + std::to_string(i));
  return {derive_seed(base, "setup"), derive_seed(base, "challenger"), derive_seed(base, "adversary")};
}

// ---------------------------------------------------------------------------
// Schemes

struct AtScheme {
  AtParams params;
  AtVariant variant = AtVariant::kStandard;
  std::string name() const { return variant == AtVariant::kStandard ? "money_at" : "strawman"; }
  AtKeys setup(const Seed& seed) const { return money::at_setup(params, seed, variant); }
};

inline AtScheme money_at_scheme(AtParams params = {}) { return {std::move(params), AtVariant::kStandard}; }

// Same as money_at except that rerandomization refreshes only the serial and
// hands back the register untouched.
inline AtScheme strawman_scheme(AtParams params = {}) { return {std::move(params), AtVariant::kStrawman}; }

// ---------------------------------------------------------------------------
// Counterfeiting: given vk and tk, turn k notes into k + 1 that all verify.

class CounterfeitAdversary {
 public:
  virtual ~CounterfeitAdversary() = default;
  virtual std::string name() const = 0;
  virtual std::vector<BitString> queries(const AtVerificationKey& vk, const AtTracingKey& tk, RandomStream& rs) = 0;
  virtual std::vector<Banknote> forge(const AtVerificationKey& vk, std::vector<Banknote> notes, RandomStream& rs) = 0;
};

template <class Body>
void run_trials(TrialStats& stats, std::size_t trials, Body&& body) {
  for (std::size_t i = 0; i < trials; ++i) {
    bool win = false;
    try {
      win = body(i);
    } catch (const Error&) {
      ++stats.aborted;
      win = false;
    }
    stats.outcomes.push_back(win);
  }
}

inline TrialStats run_counterfeit_game(const AtScheme& scheme, CounterfeitAdversary& adv, std::size_t trials,
                                       std::uint64_t seed) {
  TrialStats stats{"counterfeit", scheme.name(), adv.name(), seed, {}, 0};
  run_trials(stats, trials, [&](std::size_t i) {
    auto s = trial_seeds(seed, "counterfeit", i);
    RandomStream ch(s.challenger), ar(s.adversary);
    auto keys = scheme.setup(s.setup);
    auto tags = adv.queries(keys.vk, keys.tk, ar);
    std::vector<Banknote> notes;
    for (const auto& t : tags) notes.push_back(money::at_gen_banknote(keys.mk, t, ch));
    auto forged = adv.forge(keys.vk, std::move(notes), ar);
    if (forged.size() != tags.size() + 1) throw ShapeMismatch("counterfeit: wrong number of output notes");
    bool all = true;
    for (auto& n : forged) all = money::at_verify(keys.vk, std::move(n), ch).accepted && all;
    return all;
  });
  return stats;
}

// Returns its one note plus a blank: a basis state the public membership
// handle places outside the note's subspace.
class HonestEchoAdversary final : public CounterfeitAdversary {
 public:
  std::string name() const override { return "honest-echo"; }
  std::vector<BitString> queries(const AtVerificationKey&, const AtTracingKey& tk, RandomStream& rs) override {
    return {rs.next_bits(tk.tag_bits)};
  }
  std::vector<Banknote> forge(const AtVerificationKey& vk, std::vector<Banknote> notes, RandomStream&) override {
    auto serial = notes.front().serial;
    for (std::uint64_t v = 1;; ++v) {
      std::vector<gf2::BitVector> vs{gf2::BitVector(vk.n_q, v)};
      if (!vk.pmem(serial, std::span<const gf2::BitVector>(vs), BitString(1))) {
        notes.push_back({serial, qsim::Register(qsim::QState::basis_state(vk.n_q, v))});
        return notes;
      }
    }
  }
};

// Measures its note in the computational basis and outputs two copies of the
// collapsed basis state.
class NaiveClonerAdversary final : public CounterfeitAdversary {
 public:
  std::string name() const override { return "naive-cloner"; }
  std::vector<BitString> queries(const AtVerificationKey&, const AtTracingKey& tk, RandomStream& rs) override {
    return {rs.next_bits(tk.tag_bits)};
  }
  std::vector<Banknote> forge(const AtVerificationKey& vk, std::vector<Banknote> notes, RandomStream& rs) override {
    auto serial = notes.front().serial;
    auto v = qsim::measure_basis(notes.front().reg.release(), qsim::Basis::kComputational, rs).value;
    std::vector<Banknote> out;
    out.push_back({serial, qsim::Register(qsim::QState::basis_state(vk.n_q, v.word()))});
    out.push_back({serial, qsim::Register(qsim::QState::basis_state(vk.n_q, v.word()))});
    return out;
  }
};

// Control: duplicates its note through the simulator, which no physical party can do.
class UnphysicalDuplicateAdversary final : public CounterfeitAdversary {
 public:
  std::string name() const override { return "unphysical-duplicate"; }
  std::vector<BitString> queries(const AtVerificationKey&, const AtTracingKey& tk, RandomStream& rs) override {
    return {rs.next_bits(tk.tag_bits)};
  }
  std::vector<Banknote> forge(const AtVerificationKey&, std::vector<Banknote> notes, RandomStream&) override {
    auto copy = notes.front().reg.clone(qsim::grant_unphysical_access());
    notes.push_back({notes.front().serial, std::move(copy)});
    return notes;
  }
};

// ---------------------------------------------------------------------------
// Indistinguishability from fresh banknotes.

class FreshBanknoteAdversary {
 public:
  virtual ~FreshBanknoteAdversary() = default;
  virtual std::string name() const = 0;
  virtual Banknote submit(const AtVerificationKey& vk, const AtMintKey& mk, RandomStream& rs) = 0;
  virtual bool guess(const AtVerificationKey& vk, Banknote challenge, RandomStream& rs) = 0;
};

inline TrialStats run_fresh_banknote_game(const AtScheme& scheme, FreshBanknoteAdversary& adv, std::size_t trials,
                                          std::uint64_t seed) {
  TrialStats stats{"fresh-banknote", scheme.name(), adv.name(), seed, {}, 0};
  run_trials(stats, trials, [&](std::size_t i) {
    auto s = trial_seeds(seed, "fresh-banknote", i);
    RandomStream ch(s.challenger), ar(s.adversary);
    auto keys = scheme.setup(s.setup);
    auto r0 = adv.submit(keys.vk, keys.mk, ar);
    auto checked = money::at_verify(keys.vk, std::move(r0), ch);
    if (!checked.accepted) return false;
    Banknote regs[2];
    regs[0] = money::at_rerandomize(keys.vk, std::move(checked.note), ch);
    regs[1] = money::at_gen_banknote(keys.mk, BitString(keys.params.tag_bits), ch);
    bool b = ch.next_bit();
    return adv.guess(keys.vk, std::move(regs[b ? 1 : 0]), ar) == b;
  });
  return stats;
}

class RandomGuessAdversary final : public FreshBanknoteAdversary {
 public:
  std::string name() const override { return "random-guess"; }
  Banknote submit(const AtVerificationKey&, const AtMintKey& mk, RandomStream& rs) override {
    return money::at_gen_banknote(mk, rs.next_bits(mk.params.tag_bits), rs);
  }
  bool guess(const AtVerificationKey&, Banknote, RandomStream& rs) override { return rs.next_bit(); }
};

// Says "my own note" exactly when the challenge carries the serial it submitted.
class SerialRecorderAdversary final : public FreshBanknoteAdversary {
 public:
  std::string name() const override { return "serial-recorder"; }
  Banknote submit(const AtVerificationKey&, const AtMintKey& mk, RandomStream& rs) override {
    auto note = money::at_gen_banknote(mk, rs.next_bits(mk.params.tag_bits), rs);
    serial_ = note.serial;
    return note;
  }
  bool guess(const AtVerificationKey&, Banknote challenge, RandomStream&) override {
    return !(challenge.serial == serial_);
  }

 private:
  rpke::RpkeCiphertext serial_;
};

// Runs the dual-basis check on the challenge under the serial it submitted
// and says "my own note" if it passes.
class OverlapProjectionAdversary final : public FreshBanknoteAdversary {
 public:
  std::string name() const override { return "overlap-projection"; }
  Banknote submit(const AtVerificationKey&, const AtMintKey& mk, RandomStream& rs) override {
    auto note = money::at_gen_banknote(mk, rs.next_bits(mk.params.tag_bits), rs);
    serial_ = note.serial;
    return note;
  }
  bool guess(const AtVerificationKey& vk, Banknote challenge, RandomStream& rs) override {
    return !money::dual_basis_check(vk.pmem, serial_, std::span(&challenge.reg, 1), rs);
  }

 private:
  rpke::RpkeCiphertext serial_;
};

// ---------------------------------------------------------------------------
// Anonymity: k notes come back either in order or permuted.

class AnonymityAdversary {
 public:
  virtual ~AnonymityAdversary() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Banknote> submit(const AtVerificationKey& vk, const AtMintKey& mk, RandomStream& rs) = 0;
  virtual bool guess(const AtVerificationKey& vk, std::vector<Banknote> notes, RandomStream& rs) = 0;
};

inline TrialStats run_anonymity_game(const AtScheme& scheme, AnonymityAdversary& adv, std::size_t trials,
                                     std::uint64_t seed) {
  TrialStats stats{"anonymity", scheme.name(), adv.name(), seed, {}, 0};
  run_trials(stats, trials, [&](std::size_t i) {
    auto s = trial_seeds(seed, "anonymity", i);
    RandomStream ch(s.challenger), ar(s.adversary);
    auto keys = scheme.setup(s.setup);
    auto notes = adv.submit(keys.vk, keys.mk, ar);
    if (notes.empty()) throw ShapeMismatch("anonymity: no notes submitted");
    std::vector<Banknote> fresh;
    for (auto& n : notes) {
      auto checked = money::at_verify(keys.vk, std::move(n), ch);
      if (!checked.accepted) return false;
      fresh.push_back(std::move(checked.note));
    }
    for (auto& n : fresh) n = money::at_rerandomize(keys.vk, std::move(n), ch);
    std::vector<std::size_t> pi(fresh.size());
    std::iota(pi.begin(), pi.end(), 0);
    for (std::size_t j = pi.size(); j > 1; --j) std::swap(pi[j - 1], pi[ch.uniform_below(j)]);
    bool b = ch.next_bit();
    std::vector<Banknote> out;
    for (std::size_t j = 0; j < fresh.size(); ++j) out.push_back(std::move(fresh[b ? pi[j] : j]));
    return adv.guess(keys.vk, std::move(out), ar) == b;
  });
  return stats;
}

// Mints k notes; the guess is either random, a serial comparison, or the
// old-serial dual-basis check on every position.
class AnonymityBaseline final : public AnonymityAdversary {
 public:
  enum class Mode { kRandomGuess, kSerialRecorder, kOverlap };

  AnonymityBaseline(Mode mode, std::size_t k) : mode_(mode), k_(k) {}

  std::string name() const override {
    std::string base = mode_ == Mode::kRandomGuess ? "random-guess"
                       : mode_ == Mode::kSerialRecorder ? "serial-recorder"
                                                        : "overlap-projection";
    return base + "/k=" + std::to_string(k_);
  }
  std::vector<Banknote> submit(const AtVerificationKey&, const AtMintKey& mk, RandomStream& rs) override {
    serials_.clear();
    std::vector<Banknote> out;
    for (std::size_t j = 0; j < k_; ++j) {
      out.push_back(money::at_gen_banknote(mk, rs.next_bits(mk.params.tag_bits), rs));
      serials_.push_back(out.back().serial);
    }
    return out;
  }
  bool guess(const AtVerificationKey& vk, std::vector<Banknote> notes, RandomStream& rs) override {
    switch (mode_) {
      case Mode::kRandomGuess:
        return rs.next_bit();
      case Mode::kSerialRecorder:
        for (std::size_t j = 0; j < notes.size(); ++j)
          if (!(notes[j].serial == serials_[j])) return true;
        return false;
      case Mode::kOverlap:
        for (std::size_t j = 0; j < notes.size(); ++j)
          if (!money::dual_basis_check(vk.pmem, serials_[j], std::span(&notes[j].reg, 1), rs)) return true;
        return false;
    }
    return false;
  }

 private:
  Mode mode_;
  std::size_t k_;
  std::vector<rpke::RpkeCiphertext> serials_;
};

// ---------------------------------------------------------------------------
// Tracing: with vk and tk, produce verifying notes whose traced tags are not
// a sub-multiset of the queried tags.

class TracingAdversary {
 public:
  virtual ~TracingAdversary() = default;
  virtual std::string name() const = 0;
  virtual std::vector<BitString> queries(const AtVerificationKey& vk, const AtTracingKey& tk, RandomStream& rs) = 0;
  virtual std::vector<Banknote> output(const AtVerificationKey& vk, std::vector<Banknote> notes, RandomStream& rs) = 0;
};

// Sorted a is a sublist of sorted b, i.e. a is a sub-multiset of b.
inline bool sorted_sublist(std::vector<BitString> a, std::vector<BitString> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline TrialStats run_tracing_game(const AtScheme& scheme, TracingAdversary& adv, std::size_t trials,
                                   std::uint64_t seed) {
  TrialStats stats{"tracing", scheme.name(), adv.name(), seed, {}, 0};
  run_trials(stats, trials, [&](std::size_t i) {
    auto s = trial_seeds(seed, "tracing", i);
    RandomStream ch(s.challenger), ar(s.adversary);
    auto keys = scheme.setup(s.setup);
    auto tags = adv.queries(keys.vk, keys.tk, ar);
    std::vector<Banknote> notes;
    for (const auto& t : tags) notes.push_back(money::at_gen_banknote(keys.mk, t, ch));
    auto out = adv.output(keys.vk, std::move(notes), ar);
    std::vector<BitString> traced;
    for (auto& n : out) {
      auto checked = money::at_verify(keys.vk, std::move(n), ch);
      if (!checked.accepted) return false;
      traced.push_back(money::at_trace(keys.tk, checked.note));
    }
    return !sorted_sublist(traced, tags);
  });
  return stats;
}

class TracingBaseline final : public TracingAdversary {
 public:
  // kUnchanged returns its notes; kSubsetAfterRerand rerandomizes them and drops
  // one; kCloneRelabel (control) duplicates one through the simulator.
  enum class Mode { kUnchanged, kSubsetAfterRerand, kCloneRelabel };

  explicit TracingBaseline(Mode mode, std::size_t k = 3) : mode_(mode), k_(k) {}

  std::string name() const override {
    switch (mode_) {
      case Mode::kUnchanged:
        return "unchanged";
      case Mode::kSubsetAfterRerand:
        return "subset-after-rerand";
      case Mode::kCloneRelabel:
        return "clone-relabel";
    }
    return "";
  }
  std::vector<BitString> queries(const AtVerificationKey&, const AtTracingKey& tk, RandomStream& rs) override {
    std::vector<BitString> out;
    for (std::size_t j = 0; j < k_; ++j) out.push_back(rs.next_bits(tk.tag_bits));
    return out;
  }
  std::vector<Banknote> output(const AtVerificationKey& vk, std::vector<Banknote> notes, RandomStream& rs) override {
    switch (mode_) {
      case Mode::kUnchanged:
        return notes;
      case Mode::kSubsetAfterRerand:
        for (auto& n : notes) n = money::at_rerandomize(vk, std::move(n), rs);
        notes.pop_back();
        return notes;
      case Mode::kCloneRelabel: {
        auto copy = notes.front().reg.clone(qsim::grant_unphysical_access());
        notes.push_back(money::at_rerandomize(vk, Banknote{notes.front().serial, std::move(copy)}, rs));
        return notes;
      }
    }
    return notes;
  }

 private:
  Mode mode_;
  std::size_t k_;
};

// ---------------------------------------------------------------------------
// Untraceability: the adversary builds the keys itself, from the CRS and the
// shared oracle.

class UntraceabilityAdversary {
 public:
  virtual ~UntraceabilityAdversary() = default;
  virtual std::string name() const = 0;
  struct Submission {
    money::CrsVerificationKey vk;
    money::CrsMintKey mk;
    Banknote note;
  };
  virtual Submission submit(const money::Crs& crs, const std::shared_ptr<obf::ObfRegistry>& oracle,
                            RandomStream& rs) = 0;
  virtual bool guess(Banknote challenge, RandomStream& rs) = 0;
};

inline TrialStats run_untraceability_game(const money::UtParams& params, UntraceabilityAdversary& adv,
                                          std::size_t trials, std::uint64_t seed) {
  TrialStats stats{"untraceability", "money_ut", adv.name(), seed, {}, 0};
  run_trials(stats, trials, [&](std::size_t i) {
    auto s = trial_seeds(seed, "untraceability", i);
    RandomStream ch(s.challenger), ar(s.adversary);
    auto crs = money::ut_crs_gen(params, s.setup);
    auto oracle = obf::ObfRegistry::create(derive_seed(s.setup, "oracle"));
    auto sub = adv.submit(crs, oracle, ar);
    if (!sub.vk.pmem || sub.vk.pmem.oracle() != oracle) throw InvalidParameters("untraceability: foreign oracle");
    auto r0 = money::ut_verify(crs, sub.vk, std::move(sub.note), ch);
    if (!r0.accepted) return false;
    auto r1 = money::ut_verify(crs, sub.vk, money::ut_gen_banknote(sub.mk, ch), ch);
    if (!r1.accepted) return false;
    bool b = ch.next_bit();
    return adv.guess(std::move(b ? r1.note : r0.note), ar) == b;
  });
  return stats;
}

class UntraceabilityBaseline final : public UntraceabilityAdversary {
 public:
  // kRandomGuess and kSerialRecorder use honest keys; kNonVerifying submits a
  // basis state outside its note's subspace.
  enum class Mode { kRandomGuess, kSerialRecorder, kNonVerifying };

  explicit UntraceabilityBaseline(Mode mode) : mode_(mode) {}

  std::string name() const override {
    switch (mode_) {
      case Mode::kRandomGuess:
        return "random-guess";
      case Mode::kSerialRecorder:
        return "serial-recorder";
      case Mode::kNonVerifying:
        return "non-verifying";
    }
    return "";
  }
  Submission submit(const money::Crs& crs, const std::shared_ptr<obf::ObfRegistry>& oracle,
                    RandomStream& rs) override {
    auto keys = money::ut_setup(crs, rs.next_seed(), oracle);
    auto note = money::ut_gen_banknote(keys.mk, rs);
    serial_ = note.serial;
    if (mode_ == Mode::kNonVerifying) {
      for (std::uint64_t v = 1;; ++v) {
        std::vector<gf2::BitVector> vs{gf2::BitVector(keys.vk.n_q, v)};
        if (!keys.vk.pmem(note.serial, std::span<const gf2::BitVector>(vs), BitString(1))) {
          note.reg = qsim::Register(qsim::QState::basis_state(keys.vk.n_q, v));
          break;
        }
      }
    }
    return {keys.vk, keys.mk, std::move(note)};
  }
  bool guess(Banknote challenge, RandomStream& rs) override {
    if (mode_ == Mode::kSerialRecorder) return !(challenge.serial == serial_);
    return rs.next_bit();
  }

 private:
  Mode mode_;
  rpke::RpkeCiphertext serial_;
};

// ---------------------------------------------------------------------------
// Voting privacy: is the cast vote from the adversary's token or a fresh one?

class VotingPrivacyAdversary {
 public:
  virtual ~VotingPrivacyAdversary() = default;
  virtual std::string name() const = 0;
  struct Submission {
    money::CrsVerificationKey vk;
    money::CrsMintKey mk;
    vote::VotingToken token;
    BitString candidate;
  };
  virtual Submission submit(const money::Crs& crs, const std::shared_ptr<obf::ObfRegistry>& oracle,
                            RandomStream& rs) = 0;
  virtual bool guess(const vote::CastVote& vo, RandomStream& rs) = 0;
};

inline TrialStats run_voting_privacy_game(const money::UtParams& params, VotingPrivacyAdversary& adv,
                                          std::size_t trials, std::uint64_t seed) {
  TrialStats stats{"voting-privacy", "qvote", adv.name(), seed, {}, 0};
  run_trials(stats, trials, [&](std::size_t i) {
    auto s = trial_seeds(seed, "voting-privacy", i);
    RandomStream ch(s.challenger), ar(s.adversary);
    auto crs = money::ut_crs_gen(params, s.setup);
    auto oracle = obf::ObfRegistry::create(derive_seed(s.setup, "oracle"));
    auto sub = adv.submit(crs, oracle, ar);
    if (!sub.vk.pmem || sub.vk.pmem.oracle() != oracle) throw InvalidParameters("voting privacy: foreign oracle");
    auto r0 = vote::qv_verify_voting_token(crs, sub.vk, std::move(sub.token), ch);
    if (!r0.accepted) return false;
    auto r1 = vote::qv_verify_voting_token(crs, sub.vk, vote::qv_gen_voting_token(sub.mk, ch), ch);
    if (!r1.accepted) return false;
    bool b = ch.next_bit();
    auto vo = vote::qv_vote(std::move(b ? r1.token : r0.token), sub.candidate, ch);
    return adv.guess(vo, ar) == b;
  });
  return stats;
}

class VotingPrivacyBaseline final : public VotingPrivacyAdversary {
 public:
  enum class Mode { kRandomGuess, kSerialRecorder };

  explicit VotingPrivacyBaseline(Mode mode) : mode_(mode) {}

  std::string name() const override { return mode_ == Mode::kRandomGuess ? "random-guess" : "serial-recorder"; }
  Submission submit(const money::Crs& crs, const std::shared_ptr<obf::ObfRegistry>& oracle,
                    RandomStream& rs) override {
    auto keys = vote::qv_setup(crs, rs.next_seed(), vote::kDefaultLambdaTok, oracle);
    auto token = vote::qv_gen_voting_token(keys.mk, rs);
    serial_ = token.serial;
    return {keys.vk, keys.mk, std::move(token), rs.next_bits(vote::kDefaultLambdaTok)};
  }
  bool guess(const vote::CastVote& vo, RandomStream& rs) override {
    if (mode_ == Mode::kSerialRecorder) return !(vo.serial == serial_);
    return rs.next_bit();
  }

 private:
  Mode mode_;
  rpke::RpkeCiphertext serial_;
};

// ---------------------------------------------------------------------------
// Voting uniqueness: k tokens, k + 1 valid votes with distinct tags.

class UniquenessAdversary {
 public:
  virtual ~UniquenessAdversary() = default;
  virtual std::string name() const = 0;
  virtual std::size_t token_queries() const = 0;
  virtual std::vector<vote::CastVote> output(const money::Crs& crs, const money::CrsVerificationKey& vk,
                                             std::vector<vote::VotingToken> tokens, RandomStream& rs) = 0;
};

inline TrialStats run_voting_uniqueness_game(const money::UtParams& params, UniquenessAdversary& adv,
                                             std::size_t trials, std::uint64_t seed) {
  TrialStats stats{"voting-uniqueness", "qvote", adv.name(), seed, {}, 0};
  run_trials(stats, trials, [&](std::size_t i) {
    auto s = trial_seeds(seed, "voting-uniqueness", i);
    RandomStream ch(s.challenger), ar(s.adversary);
    auto crs = money::ut_crs_gen(params, s.setup);
    auto keys = vote::qv_setup(crs, derive_seed(s.setup, "keys"));
    std::vector<vote::VotingToken> tokens;
    for (std::size_t j = 0; j < adv.token_queries(); ++j) tokens.push_back(vote::qv_gen_voting_token(keys.mk, ch));
    auto votes = adv.output(crs, keys.vk, std::move(tokens), ar);
    if (votes.size() != adv.token_queries() + 1) throw ShapeMismatch("uniqueness: wrong number of votes");
    std::vector<BitString> tags;
    for (const auto& v : votes) {
      if (!vote::qv_verify_cast_vote(keys.vk, v)) return false;
      tags.push_back(v.r);
    }
    std::sort(tags.begin(), tags.end());
    return std::adjacent_find(tags.begin(), tags.end()) == tags.end();
  });
  return stats;
}

// One token: vote honestly, then resubmit the same vectors under a fresh tag.
class VectorReuseAdversary final : public UniquenessAdversary {
 public:
  std::string name() const override { return "vector-reuse"; }
  std::size_t token_queries() const override { return 1; }
  std::vector<vote::CastVote> output(const money::Crs& crs, const money::CrsVerificationKey& vk,
                                     std::vector<vote::VotingToken> tokens, RandomStream& rs) override {
    auto checked = vote::qv_verify_voting_token(crs, vk, std::move(tokens.front()), rs);
    auto first = vote::qv_vote(std::move(checked.token), rs.next_bits(vote::lambda_tok(vk)), rs);
    auto second = first;
    while (second.r == first.r) second.r = rs.next_bits(first.r.size());
    return {first, second};
  }
};

// No tokens: one vote with random vectors on a fresh encryption of zero.
class TokenlessAdversary final : public UniquenessAdversary {
 public:
  std::string name() const override { return "tokenless"; }
  std::size_t token_queries() const override { return 0; }
  std::vector<vote::CastVote> output(const money::Crs& crs, const money::CrsVerificationKey& vk,
                                     std::vector<vote::VotingToken>, RandomStream& rs) override {
    const std::size_t lt = vote::lambda_tok(vk);
    vote::CastVote v{rs.next_bits(lt), rpke::rpke_enc(crs.public_key(), BitString(vk.rpke.ell), rs), {},
                     rs.next_bits(lt)};
    for (std::size_t i = 0; i < vk.registers; ++i) v.vectors.emplace_back(vk.n_q, rs.next_u64());
    return {v};
  }
};

// ---------------------------------------------------------------------------
// Named suites for the experiment runner.

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"fresh-banknote", "counterfeit",      "anonymity",        "tracing",
                                              "untraceability", "voting-privacy", "voting-uniqueness"};
  return names;
}

inline std::string valid_suites() {
  std::string out;
  for (const auto& n : suite_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

inline std::vector<TrialStats> run_suite(const std::string& name, std::size_t trials, std::uint64_t seed) {
  std::vector<TrialStats> out;
  const AtScheme schemes[] = {money_at_scheme(), strawman_scheme()};
  if (name == "fresh-banknote") {
    for (const auto& scheme : schemes) {
      RandomGuessAdversary a;
      SerialRecorderAdversary b;
      OverlapProjectionAdversary c;
      for (FreshBanknoteAdversary* adv : {static_cast<FreshBanknoteAdversary*>(&a),
                                          static_cast<FreshBanknoteAdversary*>(&b),
                                          static_cast<FreshBanknoteAdversary*>(&c)})
        out.push_back(run_fresh_banknote_game(scheme, *adv, trials, seed));
    }
  } else if (name == "counterfeit") {
    HonestEchoAdversary a;
    NaiveClonerAdversary b;
    UnphysicalDuplicateAdversary c;
    for (CounterfeitAdversary* adv : {static_cast<CounterfeitAdversary*>(&a), static_cast<CounterfeitAdversary*>(&b),
                                      static_cast<CounterfeitAdversary*>(&c)})
      out.push_back(run_counterfeit_game(money_at_scheme(), *adv, trials, seed));
  } else if (name == "anonymity") {
    using M = AnonymityBaseline::Mode;
    for (const auto& scheme : schemes) {
      for (auto [mode, k] : {std::pair{M::kRandomGuess, 3}, std::pair{M::kSerialRecorder, 3},
                             std::pair{M::kOverlap, 3}, std::pair{M::kOverlap, 1}}) {
        AnonymityBaseline adv(mode, static_cast<std::size_t>(k));
        out.push_back(run_anonymity_game(scheme, adv, trials, seed));
      }
    }
  } else if (name == "tracing") {
    using M = TracingBaseline::Mode;
    for (auto mode : {M::kUnchanged, M::kSubsetAfterRerand, M::kCloneRelabel}) {
      TracingBaseline adv(mode);
      out.push_back(run_tracing_game(money_at_scheme(), adv, trials, seed));
    }
  } else if (name == "untraceability") {
    using M = UntraceabilityBaseline::Mode;
    for (auto mode : {M::kRandomGuess, M::kSerialRecorder, M::kNonVerifying}) {
      UntraceabilityBaseline adv(mode);
      out.push_back(run_untraceability_game(money::UtParams{}, adv, trials, seed));
    }
  } else if (name == "voting-privacy") {
    using M = VotingPrivacyBaseline::Mode;
    for (auto mode : {M::kRandomGuess, M::kSerialRecorder}) {
      VotingPrivacyBaseline adv(mode);
      out.push_back(run_voting_privacy_game(money::UtParams{}, adv, trials, seed));
    }
  } else if (name == "voting-uniqueness") {
    VectorReuseAdversary a;
    TokenlessAdversary b;
    out.push_back(run_voting_uniqueness_game(money::UtParams{}, a, trials, seed));
    out.push_back(run_voting_uniqueness_game(money::UtParams{}, b, trials, seed));
  } else {
    throw InvalidParameters("unknown game '" + name + "' (valid: " + valid_suites() + ")");
  }
  return out;
}

}  // namespace qmoney::games
