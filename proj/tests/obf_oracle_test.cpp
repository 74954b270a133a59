#include "qmoney/obf_oracle.hpp"

#include <gtest/gtest.h>

#include "qmoney/unphysical.hpp"

using namespace qmoney;
using namespace qmoney::obf;

namespace {

// Test-only program: x -> (x * mul + add) mod 2^32 over a fixed-length input.
class AffineProgram final : public SealedProgram {
 public:
  AffineProgram(std::uint32_t mul, std::uint32_t add) : mul_(mul), add_(add) {}
  std::string kind() const override { return "test-affine"; }
  std::vector<std::uint8_t> descriptor() const override {
    ByteWriter w;
    w.u32(mul_).u32(add_);
    return w.take();
  }
  std::uint32_t evaluate(std::span<const std::uint32_t> x) const {
    if (x.size() != 2) throw ShapeMismatch("affine: expects two words");
    return (x[0] ^ x[1]) * mul_ + add_;
  }

 private:
  std::uint32_t mul_, add_;
};

const bool kAffineRegistered =
    register_program_kind("test-affine", [](const std::shared_ptr<ObfRegistry>&, std::span<const std::uint8_t> d) {
      ByteReader r(d);
      auto mul = r.u32();
      auto add = r.u32();
      return std::make_shared<AffineProgram>(mul, add);
    });

std::shared_ptr<ObfRegistry> world(std::uint64_t seed) { return ObfRegistry::create(derive_seed(seed, "world")); }

}  // namespace

TEST(IoObfuscate, EvaluationMatchesProgram) {
  auto reg = world(1);
  auto program = std::make_shared<const AffineProgram>(7, 3);
  auto h1 = reg->obfuscate(program);
  auto h2 = reg->obfuscate(std::make_shared<const AffineProgram>(7, 3));
  RandomStream rs(1, "inputs");
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::uint32_t> x{rs.next_u32(), rs.next_u32()};
    EXPECT_EQ(h1(std::span<const std::uint32_t>(x)), program->evaluate(x));
    EXPECT_EQ(h2(std::span<const std::uint32_t>(x)), h1(std::span<const std::uint32_t>(x)));
  }
  std::vector<std::uint32_t> bad{1, 2, 3};
  EXPECT_THROW(h1(std::span<const std::uint32_t>(bad)), ShapeMismatch);
}

TEST(IoObfuscate, TapeDeterminesHandle) {
  auto reg = world(2);
  auto p = std::make_shared<const AffineProgram>(5, 1);
  std::vector<std::uint8_t> r1{1, 2, 3}, r2{4, 5, 6};
  auto a = reg->obfuscate(p, r1);
  auto b = reg->obfuscate(p, r1);
  auto c = reg->obfuscate(p, r2);
  EXPECT_EQ(a.id(), b.id());
  EXPECT_NE(a.id(), c.id());
  EXPECT_EQ(a.id(), reg->handle_id_for(p->kind(), p->descriptor(), r1));
  EXPECT_EQ(reg->size(), 2U);
}

TEST(HandleEval, UnknownAndWrongType) {
  auto reg = world(3);
  HandleId missing{};
  EXPECT_THROW(reg->handle<AffineProgram>(missing), UnknownHandle);
  auto h = cc_simulate(*reg, 2, 0xFF);
  EXPECT_THROW(reg->handle<AffineProgram>(h.id()), ShapeMismatch);
  ProgramHandle<AffineProgram> empty;
  std::vector<std::uint32_t> x{1, 2};
  EXPECT_THROW(empty(std::span<const std::uint32_t>(x)), UnknownHandle);
}

TEST(CcObfuscate, FiresExactlyOnTarget) {
  auto reg = world(4);
  std::vector<std::uint32_t> s{17, 200};
  const std::uint32_t target = 77;
  auto h = cc_obfuscate(*reg, s, target, 0xFF);
  std::array<std::uint32_t, 2> a{};
  for (std::uint32_t a0 = 0; a0 < 256; ++a0) {
    for (std::uint32_t a1 = 0; a1 < 256; ++a1) {
      a = {a0, a1};
      auto f = [&](std::uint32_t c) { return (c - s[0] * a0 - s[1] * a1) & 0xFF; };
      for (std::uint32_t c = 0; c < 256; ++c) ASSERT_EQ(h(std::span<const std::uint32_t>(a), c), f(c) == target);
    }
  }
}

TEST(CcObfuscate, WindowEqualsPointwise) {
  auto reg = world(5);
  RandomStream rs(5, "window");
  std::vector<std::uint32_t> s{rs.next_u32() & 0xFF, rs.next_u32() & 0xFF};
  auto h = cc_obfuscate(*reg, s, 64 + 9, 0xFF);
  std::vector<OffsetRange> ranges{{-3, 4}, {124, 131}};
  for (int t = 0; t < 2000; ++t) {
    std::array<std::uint32_t, 2> a{rs.next_u32() & 0xFF, rs.next_u32() & 0xFF};
    std::uint32_t c = rs.next_u32() & 0xFF;
    bool any = false;
    for (const auto& r : ranges)
      for (std::int64_t sh = r.lo; sh <= r.hi; ++sh)
        any = any || h(std::span<const std::uint32_t>(a), static_cast<std::uint32_t>(c + sh) & 0xFF);
    EXPECT_EQ(h.fires_in_window(std::span<const std::uint32_t>(a), c, std::span<const OffsetRange>(ranges)), any);
  }
}

TEST(CcSimulate, NeverFires) {
  auto reg = world(6);
  std::vector<std::uint32_t> s{3, 5};
  auto real = cc_obfuscate(*reg, s, 10, 0xFF);
  auto sim = cc_simulate(*reg, 2, 0xFF);
  RandomStream rs(6, "sim");
  for (int t = 0; t < 1000; ++t) {
    std::array<std::uint32_t, 2> a{rs.next_u32() & 0xFF, rs.next_u32() & 0xFF};
    EXPECT_FALSE(sim(std::span<const std::uint32_t>(a), rs.next_u32() & 0xFF));
  }
  std::array<std::uint32_t, 2> a{1, 1};
  std::uint32_t hit = (10 + 3 + 5) & 0xFF;
  EXPECT_TRUE(real(std::span<const std::uint32_t>(a), hit));
  EXPECT_FALSE(sim(std::span<const std::uint32_t>(a), hit));
  std::array<std::uint32_t, 3> wrong{};
  EXPECT_THROW(sim(std::span<const std::uint32_t>(wrong), 0), ShapeMismatch);
}

TEST(Nizk, CompletenessSoundnessSimulation) {
  auto reg = world(7);
  auto program = std::make_shared<const AffineProgram>(9, 9);
  std::vector<std::uint8_t> tape{7, 7};
  auto x = reg->obfuscate(program, tape);
  auto other = reg->obfuscate(std::make_shared<const AffineProgram>(9, 10), tape);
  std::vector<std::uint8_t> crs(32, 0x42);

  auto proof = reg->nizk_prove(crs, x.id(), *program, tape);
  EXPECT_TRUE(reg->nizk_verify(crs, x.id(), proof));
  EXPECT_FALSE(reg->nizk_verify(crs, other.id(), proof));
  std::vector<std::uint8_t> crs2(32, 0x43);
  EXPECT_FALSE(reg->nizk_verify(crs2, x.id(), proof));
  auto forged = proof;
  forged[0] ^= 1;
  EXPECT_FALSE(reg->nizk_verify(crs, x.id(), forged));

  std::vector<std::uint8_t> wrong_tape{7, 8};
  EXPECT_THROW(reg->nizk_prove(crs, x.id(), *program, wrong_tape), InvalidParameters);
  EXPECT_THROW(reg->nizk_prove(crs, other.id(), *program, tape), InvalidParameters);

  RandomStream rs(7, "sim-crs");
  auto sim = reg->nizk_simulate_crs(rs);
  auto sp = reg->nizk_simulate(sim.crs, sim.trapdoor, other.id());
  EXPECT_TRUE(reg->nizk_verify(sim.crs, other.id(), sp));
  EXPECT_THROW(reg->nizk_simulate(crs, sim.trapdoor, other.id()), InvalidParameters);

  // Proofs are bound to the oracle that issued them.
  auto foreign = world(8);
  EXPECT_FALSE(foreign->nizk_verify(crs, x.id(), proof));
}

TEST(Seal, RestoreInSameWorldOnly) {
  auto reg = world(9);
  std::vector<std::uint32_t> s{11, 22};
  auto cc = cc_obfuscate(*reg, s, 33, 0xFF);
  auto affine = reg->obfuscate(std::make_shared<const AffineProgram>(3, 4));
  auto records = reg->seal();
  ASSERT_EQ(records.size(), 2U);

  auto again = world(9);
  again->restore(records);
  auto cc2 = again->handle<CompareProgram>(cc.id());
  auto affine2 = again->handle<AffineProgram>(affine.id());
  RandomStream rs(9, "seal");
  for (int t = 0; t < 200; ++t) {
    std::array<std::uint32_t, 2> a{rs.next_u32() & 0xFF, rs.next_u32() & 0xFF};
    std::uint32_t c = rs.next_u32() & 0xFF;
    EXPECT_EQ(cc(std::span<const std::uint32_t>(a), c), cc2(std::span<const std::uint32_t>(a), c));
    EXPECT_EQ(affine(std::span<const std::uint32_t>(a)), affine2(std::span<const std::uint32_t>(a)));
  }
  EXPECT_EQ(again->seal()[0].blob, records[0].blob);

  auto stranger = world(10);
  EXPECT_THROW(stranger->restore(records), FormatError);
  auto tampered = records;
  tampered[0].blob[0] ^= 1;
  EXPECT_THROW(world(9)->restore(tampered), FormatError);
}

TEST(Registry, CreationLogBehindGate) {
  auto reg = world(11);
  cc_simulate(*reg, 2, 0xFF);
  auto log = reg->creation_log(qsim::grant_unphysical_access());
  ASSERT_EQ(log.size(), 1U);
  EXPECT_EQ(log[0].kind, "cc-sim");
}
