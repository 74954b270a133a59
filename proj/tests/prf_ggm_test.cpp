#include "qmoney/prf_ggm.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace qmoney;
using namespace qmoney::prf;

namespace {

std::vector<BitString> all_inputs(std::size_t len) {
  std::vector<BitString> out;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << len); ++x) out.push_back(BitString::from_uint(x, len));
  return out;
}

}  // namespace

TEST(PrfKeygen, SeedsAndLengths) {
  RandomStream a(1, "k"), b(1, "k"), c(2, "k");
  auto ka = prf_keygen(a, 8, 128);
  EXPECT_EQ(ka, prf_keygen(b, 8, 128));
  EXPECT_NE(ka.root, prf_keygen(c, 8, 128).root);
  EXPECT_EQ(prf_eval(ka, BitString::from_uint(3, 8)).size(), 128U);
  auto odd = prf_keygen(a, 5, 77);
  EXPECT_EQ(prf_eval(odd, BitString::from_uint(3, 5)).size(), 77U);
  EXPECT_THROW(prf_keygen(a, 0, 8), InvalidParameters);
}

TEST(PrfEval, DeterministicAndInputSensitive) {
  RandomStream rs(3, "eval");
  auto k = prf_keygen(rs, 64, 256);
  for (int t = 0; t < 100; ++t) {
    auto x = rs.next_bits(64);
    EXPECT_EQ(prf_eval(k, x), prf_eval(k, x));
    auto y = x;
    y.set(0, !y.bit(0));
    EXPECT_NE(prf_eval(k, x), prf_eval(k, y));
  }
  EXPECT_THROW(prf_eval(k, BitString(63)), FormatError);
}

TEST(PrfEval, TruthTableHasNoCollisions) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomStream rs(seed, "table");
    auto k = prf_keygen(rs, 8, 128);
    std::set<BitString> outputs;
    for (const auto& x : all_inputs(8)) outputs.insert(prf_eval(k, x));
    EXPECT_EQ(outputs.size(), 256U);
  }
}

TEST(PrfEval, LongInputs) {
  RandomStream rs(4, "long");
  auto k = prf_keygen(rs, 49920, 256);
  auto x = rs.next_bits(49920);
  auto y = x;
  y.set(49919, !y.bit(49919));
  EXPECT_NE(prf_eval(k, x), prf_eval(k, y));
}

TEST(PrfPuncture, AgreesOffTheSetExhaustively) {
  RandomStream rs(5, "puncture");
  for (std::size_t len = 1; len <= 10; ++len) {
    auto inputs = all_inputs(len);
    for (int t = 0; t < 3; ++t) {
      auto k = prf_keygen(rs, len, 64);
      std::size_t size = 1 + rs.uniform_below(std::min<std::uint64_t>(4, inputs.size()));
      std::vector<BitString> set;
      for (std::size_t i = 0; i < size; ++i) set.push_back(inputs[rs.uniform_below(inputs.size())]);
      auto kp = prf_puncture(k, set);
      for (const auto& x : inputs) {
        bool punctured = std::find(set.begin(), set.end(), x) != set.end();
        auto v = kp.try_eval(x);
        EXPECT_EQ(v.has_value(), !punctured);
        if (v) EXPECT_EQ(*v, prf_eval(k, x));
      }
    }
  }
}

TEST(PrfPuncture, Degenerate) {
  RandomStream rs(6, "degenerate");
  auto k = prf_keygen(rs, 2, 32);
  auto all = all_inputs(2);
  auto kp = prf_puncture(k, all);
  for (const auto& x : all) EXPECT_FALSE(kp.try_eval(x).has_value());
  EXPECT_TRUE(kp.copath_seeds().empty());

  EXPECT_THROW(prf_puncture(k, std::vector<BitString>{}), InvalidParameters);
  EXPECT_THROW(prf_puncture(k, std::vector<BitString>{BitString(3)}), FormatError);
  auto one = prf_puncture(k, std::vector<BitString>{all[1]});
  EXPECT_THROW(one.try_eval(BitString(5)), FormatError);
}
