#include "qmoney/rpke.hpp"

#include <gtest/gtest.h>

#include <array>

using namespace qmoney;
using namespace qmoney::rpke;

namespace {

std::shared_ptr<obf::ObfRegistry> world(std::uint64_t seed) {
  return obf::ObfRegistry::create(derive_seed(seed, "world"));
}

// Key material with s = 0 and L = 0 under arbitrary parameters.
struct ZeroWorld {
  std::shared_ptr<obf::ObfRegistry> reg = world(100);
  RpkeParams params;
  RpkeSecretKey sk;
  RpkeTestKey tk;

  explicit ZeroWorld(RpkeParams p) : params(std::move(p)) {
    sk.params = params;
    sk.s.assign(params.n_lwe, 0);
    sk.shifts.assign(params.ell, 0);
    for (std::size_t i = 0; i < params.ell; ++i)
      tk.handles.push_back(obf::cc_obfuscate(*reg, sk.s, params.quarter(), params.mask()));
  }

  RpkeCiphertext single(std::uint32_t c) const {
    RpkeCiphertext ct{params.n_lwe, params.ell, std::vector<std::uint32_t>(params.ciphertext_words(), 0)};
    ct.words[params.n_lwe] = c;
    return ct;
  }
};

std::int64_t noise(const RpkePublicKey& pk, const RpkeSecretKey& sk, std::size_t j) {
  auto col = pk.column(j);
  std::uint32_t dot = 0;
  for (std::size_t i = 0; i < pk.params.n_lwe; ++i) dot += sk.s[i] * col[i];
  return centered((col[pk.params.n_lwe] - dot) & pk.params.mask(), pk.params);
}

}  // namespace

TEST(RpkeParams, Presets) {
  auto d = preset("default", 24);
  EXPECT_EQ(d.n_lwe, 64U);
  EXPECT_EQ(d.m, 2208U);
  EXPECT_EQ(d.q(), std::uint64_t{1} << 32);
  EXPECT_GT(d.q(), 64 * d.max_offset());
  EXPECT_TRUE(d.leftover_hash_slack());
  // Correctness margin: mB + q/16 < q/4.
  EXPECT_LT(d.max_offset() + d.sixteenth(), d.quarter());
  auto s = preset("statistical", 1);
  EXPECT_TRUE(s.leftover_hash_slack());
  EXPECT_GT(s.q(), 64 * s.max_offset());
  auto e = preset("exhaustive", 1);
  EXPECT_EQ(e.q(), 256U);
  EXPECT_EQ(e.q(), 64 * e.max_offset());
  EXPECT_THROW(preset("tiny", 1), InvalidParameters);
  auto bad = d;
  bad.noise_bound = 1U << 20;
  EXPECT_THROW(bad.validate(), InvalidParameters);
}

TEST(RpkeSetup, NoiseAndShiftRanges) {
  auto reg = world(1);
  RandomStream rs(1, "setup");
  auto p = preset("default", 24);
  auto keys = rpke_setup(p, rs, *reg);
  for (std::size_t j = 0; j < p.m; ++j) {
    auto e = noise(keys.pk, keys.sk, j);
    EXPECT_GE(e, -static_cast<std::int64_t>(p.noise_bound));
    EXPECT_LE(e, static_cast<std::int64_t>(p.noise_bound));
  }
  ASSERT_EQ(keys.sk.shifts.size(), 24U);
  for (auto l : keys.sk.shifts) EXPECT_LE(l, p.sixteenth());
  EXPECT_EQ(keys.tk.handles.size(), 24U);
}

TEST(RpkeSetup, HandleFiresOnShiftedQuarterExhaustively) {
  auto reg = world(2);
  RandomStream rs(2, "setup-exhaustive");
  auto p = preset("exhaustive", 1);
  auto keys = rpke_setup(p, rs, *reg);
  const std::uint32_t target = p.quarter() + keys.sk.shifts[0];
  for (std::uint32_t a0 = 0; a0 < 256; ++a0)
    for (std::uint32_t a1 = 0; a1 < 256; ++a1) {
      std::array<std::uint32_t, 2> a{a0, a1};
      for (std::uint32_t c = 0; c < 256; ++c) {
        std::uint32_t f = (c - keys.sk.s[0] * a0 - keys.sk.s[1] * a1) & 0xFF;
        ASSERT_EQ(keys.tk.handles[0](std::span<const std::uint32_t>(a), c), f == target);
      }
    }
}

TEST(RpkeEnc, RoundTripAtDefaults) {
  auto reg = world(3);
  RandomStream rs(3, "enc");
  auto p = preset("default", 24);
  auto keys = rpke_setup(p, rs, *reg);
  for (int t = 0; t < 1000; ++t) {
    auto mu = rs.next_bits(24);
    EXPECT_EQ(rpke_dec(keys.sk, rpke_enc(keys.pk, mu, rs)), mu);
  }
}

TEST(RpkeEnc, ZeroTapeAndFreshness) {
  auto reg = world(4);
  RandomStream rs(4, "enc-zero");
  auto p = preset("default", 16);
  auto keys = rpke_setup(p, rs, *reg);
  auto ct = rpke_enc_with_tape(keys.pk, BitString(16), BitString(p.tape_bits()));
  for (auto w : ct.words) EXPECT_EQ(w, 0U);
  auto mu = rs.next_bits(16);
  EXPECT_NE(rpke_enc(keys.pk, mu, rs), rpke_enc(keys.pk, mu, rs));
  EXPECT_THROW(rpke_enc(keys.pk, BitString(15), rs), ShapeMismatch);
}

TEST(RpkeRerand, TapeSemantics) {
  auto reg = world(5);
  RandomStream rs(5, "rerand");
  auto p = preset("default", 24);
  auto keys = rpke_setup(p, rs, *reg);
  auto ct1 = rpke_enc(keys.pk, rs.next_bits(24), rs);
  auto ct2 = rpke_enc(keys.pk, rs.next_bits(24), rs);
  EXPECT_EQ(rpke_rerand_with_tape(keys.pk, ct1, BitString(p.tape_bits())), ct1);

  auto tape = rs.next_bits(p.tape_bits());
  auto r1 = rpke_rerand_with_tape(keys.pk, ct1, tape);
  auto r2 = rpke_rerand_with_tape(keys.pk, ct2, tape);
  for (std::size_t k = 0; k < ct1.words.size(); ++k)
    EXPECT_EQ((r1.words[k] - ct1.words[k]) & p.mask(), (r2.words[k] - ct2.words[k]) & p.mask());

  RpkeCiphertext wrong{p.n_lwe, p.ell - 1, std::vector<std::uint32_t>((p.ell - 1) * (p.n_lwe + 1))};
  EXPECT_THROW(rpke_rerand(keys.pk, wrong, rs), ShapeMismatch);
}

TEST(RpkeRerand, ChainKeepsPlaintext) {
  auto reg = world(6);
  RandomStream rs(6, "chain");
  auto p = preset("default", 24);
  auto keys = rpke_setup(p, rs, *reg);
  auto mu = rs.next_bits(24);
  auto ct = rpke_enc(keys.pk, mu, rs);
  for (int step = 0; step < 1000; ++step) {
    ct = rpke_rerand(keys.pk, ct, rs);
    ASSERT_EQ(rpke_test(p, keys.tk, ct), TestResult::kGood);
  }
  EXPECT_EQ(rpke_dec(keys.sk, ct), mu);
}

TEST(RpkeTest, ZeroWorldExamples) {
  ZeroWorld z(preset("default", 1));
  EXPECT_EQ(rpke_test(z.params, z.tk, z.single(z.params.quarter())), TestResult::kBad);
  EXPECT_EQ(rpke_test(z.params, z.tk, z.single(0)), TestResult::kGood);
  EXPECT_EQ(z.params.max_offset(), 8832U);
}

TEST(RpkeTest, WindowMatchesPointwise) {
  auto reg = world(7);
  RandomStream rs(7, "test-pointwise");
  auto p = preset("exhaustive", 1);
  auto keys = rpke_setup(p, rs, *reg);
  for (std::uint32_t c = 0; c < 256; ++c) {
    for (std::uint32_t a0 = 0; a0 < 256; a0 += 17) {
      RpkeCiphertext ct{p.n_lwe, p.ell, {a0, (a0 * 3) & 0xFF, c}};
      EXPECT_EQ(rpke_test(p, keys.tk, ct), rpke_test_pointwise(p, keys.tk, ct));
    }
  }
}

// Exhaustive strong correctness at the tiny preset: Test reports BAD exactly
// when some shift in the declared windows hits the compare target, and no
// GOOD ciphertext changes its plaintext under any tape.
TEST(RpkeTest, ExhaustiveStrongCorrectness) {
  auto reg = world(8);
  RandomStream rs(8, "strong");
  auto p = preset("exhaustive", 1);
  auto keys = rpke_setup(p, rs, *reg);
  const std::int64_t mb = static_cast<std::int64_t>(p.max_offset());
  const std::int64_t q4 = p.quarter();
  std::array<std::array<std::uint32_t, 2>, 8> as{};
  for (auto& a : as) a = {rs.next_u32() & 0xFF, rs.next_u32() & 0xFF};
  int good = 0, bad = 0;
  for (const auto& a : as) {
    for (std::uint32_t c = 0; c < 256; ++c) {
      RpkeCiphertext ct{p.n_lwe, p.ell, {a[0], a[1], c}};
      bool flips = false;
      auto before = rpke_dec(keys.sk, ct);
      for (std::uint64_t r = 0; r < 16; ++r) {
        if (rpke_dec(keys.sk, rpke_rerand_with_tape(keys.pk, ct, BitString::from_uint(r, 4))) != before) flips = true;
      }
      std::uint32_t f = (c - keys.sk.s[0] * a[0] - keys.sk.s[1] * a[1]) & 0xFF;
      bool hit = false;
      for (std::int64_t sh = -mb + 1; sh <= mb; ++sh) hit = hit || (((f + sh) & 0xFF) == q4 + keys.sk.shifts[0]);
      for (std::int64_t sh = 2 * q4 - mb; sh <= 2 * q4 - 1 + mb; ++sh)
        hit = hit || (((f + sh) & 0xFF) == q4 + keys.sk.shifts[0]);
      auto result = rpke_test(p, keys.tk, ct);
      EXPECT_EQ(result == TestResult::kBad, hit);
      if (result == TestResult::kGood) {
        EXPECT_FALSE(flips);
        ++good;
      } else {
        ++bad;
      }
    }
  }
  // 2 windows of width 2mB per component out of q values of c.
  EXPECT_EQ(bad, 8 * 4 * static_cast<int>(mb));
  EXPECT_EQ(good + bad, 8 * 256);
}

TEST(RpkeSimulateTestKey, AllAccept) {
  auto reg = world(9);
  RandomStream rs(9, "sim");
  auto p = preset("default", 24);
  auto keys = rpke_setup(p, rs, *reg);
  auto sim = rpke_simulate_test_key(p, *reg);
  auto flagged = keys.pk.params;
  RpkeCiphertext ct{p.n_lwe, p.ell, std::vector<std::uint32_t>(p.ciphertext_words(), 0)};
  // Put component 0 right on its target so the real key flags it.
  std::uint32_t dot = 0;
  ct.words[0] = 1;
  dot += keys.sk.s[0];
  ct.words[p.n_lwe] = (p.quarter() + keys.sk.shifts[0] + dot) & p.mask();
  EXPECT_EQ(rpke_test(p, keys.tk, ct), TestResult::kBad);
  EXPECT_EQ(rpke_test(p, sim, ct), TestResult::kGood);
  for (int t = 0; t < 1000; ++t) {
    RpkeCiphertext r{p.n_lwe, p.ell, std::vector<std::uint32_t>(p.ciphertext_words())};
    for (auto& w : r.words) w = rs.next_u32();
    EXPECT_EQ(rpke_test(p, sim, r), TestResult::kGood);
  }
}

TEST(RpkeDec, ZeroWorldThresholds) {
  ZeroWorld z(preset("default", 1));
  EXPECT_EQ(rpke_dec(z.sk, z.single(0)).to_string(), "0");
  EXPECT_EQ(rpke_dec(z.sk, z.single(z.params.half())).to_string(), "1");
  EXPECT_EQ(rpke_dec(z.sk, z.single(z.params.quarter() - 1)).to_string(), "0");
  EXPECT_EQ(rpke_dec(z.sk, z.single(z.params.quarter())).to_string(), "1");
  EXPECT_EQ(rpke_dec(z.sk, z.single(static_cast<std::uint32_t>(-static_cast<std::int64_t>(z.params.quarter()) + 1)))
                .to_string(),
            "0");
  EXPECT_EQ(rpke_dec(z.sk, z.single(static_cast<std::uint32_t>(-static_cast<std::int64_t>(z.params.quarter()))))
                .to_string(),
            "1");
}

TEST(RpkePublicKeyBits, RoundTrip) {
  auto reg = world(10);
  RandomStream rs(10, "bits");
  auto p = preset("exhaustive", 1);
  for (int t = 0; t < 100; ++t) {
    auto bits = rs.next_bits(p.public_key_bits());
    EXPECT_EQ(rpke_pk_to_bits(rpke_pk_from_random_string(p, bits)), bits);
  }
  auto d = preset("default", 16);
  auto keys = rpke_setup(d, rs, *reg);
  EXPECT_EQ(rpke_pk_from_random_string(d, rpke_pk_to_bits(keys.pk)), keys.pk);
  auto zero = rpke_pk_from_random_string(d, BitString(d.public_key_bits()));
  for (auto w : zero.columns) EXPECT_EQ(w, 0U);
  EXPECT_EQ(d.public_key_bits(), 65U * 2208U * 32U);
  EXPECT_THROW(rpke_pk_from_random_string(d, BitString(5)), FormatError);
}

TEST(RpkeSerialBits, LittleEndianLimbs) {
  RpkeCiphertext ct{1, 1, {0x01020304U, 0x80000000U}};
  auto bits = ciphertext_bits(ct);
  ASSERT_EQ(bits.size(), 64U);
  EXPECT_TRUE(bits.bit(2));   // 0x04
  EXPECT_TRUE(bits.bit(8));   // 0x03
  EXPECT_TRUE(bits.bit(9));
  EXPECT_TRUE(bits.bit(63));
  EXPECT_FALSE(bits.bit(62));
}
