#include "qmoney/qsim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qmoney/unphysical.hpp"

using namespace qmoney;
using namespace qmoney::qsim;
using gf2::BitVector;
using gf2::Subspace;

namespace {

Subspace random_half_subspace(int n, RandomStream& rs) {
  auto map = gf2::sample_full_rank(n, rs);
  return gf2::subspace_image(map, gf2::canonical_subspace(n));
}

Subspace random_subspace(int n, RandomStream& rs) {
  std::vector<std::uint64_t> gens;
  int k = static_cast<int>(rs.uniform_below(static_cast<std::uint64_t>(n) + 1));
  for (int i = 0; i < k; ++i) gens.push_back(rs.next_u64() & gf2::low_mask(n));
  return Subspace::span_of_words(n, gens);
}

// a'_y = 2^{-n/2} sum_x (-1)^{<x,y>} a_x, term by term.
std::vector<double> slow_hadamard(const QState& s) {
  std::size_t size = s.size();
  std::vector<double> out(size);
  for (std::uint64_t y = 0; y < size; ++y) {
    double acc = 0;
    for (std::uint64_t x = 0; x < size; ++x) acc += (std::popcount(x & y) & 1 ? -1.0 : 1.0) * s.amplitude(x);
    out[y] = acc / std::sqrt(static_cast<double>(size));
  }
  return out;
}

std::vector<double> subspace_amplitudes(const Subspace& s) {
  std::vector<double> out(std::size_t{1} << s.ambient_dim(), 0.0);
  for (auto v : s.elements()) out[v] = std::pow(2.0, -0.5 * s.dim());
  return out;
}

QState random_state(int n, RandomStream& rs) {
  std::vector<double> a(std::size_t{1} << n);
  double norm = 0;
  for (auto& v : a) {
    v = rs.next_double() - 0.5;
    norm += v * v;
  }
  for (auto& v : a) v /= std::sqrt(norm);
  return QState::from_amplitudes(n, a);
}

}  // namespace

TEST(PrepareSubspaceState, Cases) {
  auto s = prepare_subspace_state(gf2::canonical_subspace(2));
  EXPECT_NEAR(s.amplitude(0b00), 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.amplitude(0b01), 1 / std::sqrt(2.0), 1e-12);  // coordinate 1 set
  EXPECT_EQ(s.amplitude(0b10), 0.0);
  EXPECT_EQ(s.amplitude(0b11), 0.0);

  auto zero = prepare_subspace_state(Subspace(5));
  EXPECT_EQ(zero.amplitude(0), 1.0);

  auto four = prepare_subspace_state(gf2::canonical_subspace(4));
  int nonzero = 0;
  for (auto a : four.amplitudes())
    if (a != 0) {
      ++nonzero;
      EXPECT_NEAR(a, 0.5, 1e-12);
    }
  EXPECT_EQ(nonzero, 4);

  EXPECT_THROW(prepare_subspace_state(gf2::canonical_subspace(18)), DimensionMismatch);
  EXPECT_NO_THROW(prepare_subspace_state(gf2::canonical_subspace(18), 18));
}

TEST(ApplyLinearMap, Cases) {
  RandomStream rs(1, "qsim-map");
  for (int t = 0; t < 20; ++t) {
    auto s = random_subspace(8, rs);
    auto state = prepare_subspace_state(s);
    EXPECT_TRUE(equal_up_to_sign(apply_linear_map(state, gf2::LinearMap::identity(8)), state, 0));
    auto map = gf2::sample_full_rank(8, rs);
    auto moved = apply_linear_map(state, map);
    auto expect = prepare_subspace_state(gf2::subspace_image(map, s));
    for (std::uint64_t x = 0; x < 256; ++x) EXPECT_EQ(moved.amplitude(x), expect.amplitude(x));
    auto back = apply_linear_map(moved, map.inverted());
    for (std::uint64_t x = 0; x < 256; ++x) EXPECT_EQ(back.amplitude(x), state.amplitude(x));
  }
  EXPECT_THROW(apply_linear_map(QState::basis_state(3, 0), gf2::LinearMap::identity(4)), DimensionMismatch);
}

TEST(HadamardAll, Cases) {
  auto plus = hadamard_all(QState::basis_state(4, 0));
  for (auto a : plus.amplitudes()) EXPECT_NEAR(a, 0.25, 1e-12);

  RandomStream rs(2, "wht");
  for (int t = 0; t < 10; ++t) {
    auto psi = random_state(6, rs);
    auto twice = hadamard_all(hadamard_all(psi));
    for (std::uint64_t x = 0; x < psi.size(); ++x) EXPECT_NEAR(twice.amplitude(x), psi.amplitude(x), 1e-9);
    auto fast = hadamard_all(psi);
    auto slow = slow_hadamard(psi);
    for (std::uint64_t x = 0; x < psi.size(); ++x) EXPECT_NEAR(fast.amplitude(x), slow[x], 1e-9);
  }
}

TEST(HadamardAll, SubspaceDuality) {
  RandomStream rs(3, "duality");
  for (int t = 0; t < 50; ++t) {
    auto s = random_subspace(8, rs);
    auto lhs = slow_hadamard(QState::from_amplitudes(8, subspace_amplitudes(s)));
    auto rhs = subspace_amplitudes(gf2::orthogonal_complement(s));
    auto lib = hadamard_all(prepare_subspace_state(s));
    for (std::uint64_t x = 0; x < 256; ++x) {
      EXPECT_NEAR(lhs[x], rhs[x], 1e-9);
      EXPECT_NEAR(lib.amplitude(x), rhs[x], 1e-9);
    }
  }
}

TEST(ProjectPredicate, Cases) {
  RandomStream rs(4, "project");
  auto a = random_half_subspace(8, rs);
  auto state_a = prepare_subspace_state(a);
  auto in_a = [&](const BitVector& v) { return a.contains(v); };

  auto r = project_predicate(state_a, in_a, rs);
  EXPECT_TRUE(r.accepted);
  EXPECT_NEAR(r.probability, 1.0, 1e-12);
  EXPECT_TRUE(equal_up_to_sign(r.post_state, state_a));

  auto always = project_predicate(state_a, [](const BitVector&) { return true; }, rs);
  EXPECT_TRUE(always.accepted);
  EXPECT_TRUE(equal_up_to_sign(always.post_state, state_a, 0));

  // A subspace B with A ∩ B = {0}. Membership in A keeps only the zero
  // string of |B>, weight 1/|B| = 2^-n/2. Projecting onto |A> itself (the
  // dual-basis composite) accepts with |<A|B>|^2 = 2^-n.
  Subspace b;
  for (;;) {
    b = random_half_subspace(8, rs);
    if (gf2::intersection_dim(a, b) == 0) break;
  }
  auto state_b = prepare_subspace_state(b);
  double overlap = inner_product(state_a, state_b);
  EXPECT_NEAR(overlap, 1.0 / 16.0, 1e-12);
  double weight = 0;
  for (std::uint64_t x = 0; x < 256; ++x)
    if (a.contains_word(x)) weight += state_b.amplitude(x) * state_b.amplitude(x);
  EXPECT_NEAR(acceptance_probability(state_b, in_a), weight, 1e-12);
  EXPECT_NEAR(acceptance_probability(state_b, in_a), std::pow(2.0, -4), 1e-12);

  auto perp = gf2::orthogonal_complement(a);
  auto [s1, p1] = restrict_to(state_b, in_a, true);
  double p2 = acceptance_probability(hadamard_all(s1), [&](const BitVector& v) { return perp.contains(v); });
  EXPECT_NEAR(p1 * p2, overlap * overlap, 1e-12);
  EXPECT_NEAR(p1 * p2, std::pow(2.0, -8), 1e-12);
}

TEST(ProjectPredicate, EmpiricalRateAndPostState) {
  RandomStream rs(5, "empirical");
  auto psi = random_state(4, rs);
  auto pred = [](const BitVector& v) { return v.bit(0) != v.bit(2); };
  double p = acceptance_probability(psi, pred);
  int accepts = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    auto out = project_predicate(psi, pred, rs);
    if (out.accepted) ++accepts;
    EXPECT_NEAR(out.post_state.norm_squared(), 1.0, 1e-9);
    EXPECT_NEAR(acceptance_probability(out.post_state, pred), out.accepted ? 1.0 : 0.0, 1e-9);
  }
  double sd = std::sqrt(p * (1 - p) / trials);
  EXPECT_NEAR(static_cast<double>(accepts) / trials, p, 4 * sd);
}

TEST(MeasureBasis, Cases) {
  RandomStream rs(6, "measure");
  auto a = random_half_subspace(8, rs);
  auto perp = gf2::orthogonal_complement(a);
  auto state = prepare_subspace_state(a);
  for (int i = 0; i < 200; ++i) {
    auto c = measure_basis(state, Basis::kComputational, rs);
    EXPECT_TRUE(a.contains(c.value));
    EXPECT_EQ(c.post_state.amplitude(c.value.word()), 1.0);
    auto h = measure_basis(state, Basis::kHadamard, rs);
    EXPECT_TRUE(perp.contains(h.value));
  }
  auto zero = measure_basis(QState::basis_state(5, 0), Basis::kComputational, rs);
  EXPECT_TRUE(zero.value.is_zero());
}

TEST(InnerProduct, Cases) {
  RandomStream rs(7, "inner");
  auto psi = random_state(5, rs);
  EXPECT_NEAR(inner_product(psi, psi), 1.0, 1e-12);
  EXPECT_EQ(inner_product(QState::basis_state(3, 1), QState::basis_state(3, 2)), 0.0);

  auto can = gf2::canonical_subspace(4);
  auto a = prepare_subspace_state(can);
  auto b = prepare_subspace_state(gf2::orthogonal_complement(can));
  double direct = 0;
  for (std::uint64_t x = 0; x < 16; ++x)
    if (can.contains_word(x) && gf2::orthogonal_complement(can).contains_word(x)) direct += 0.5 * 0.5;
  EXPECT_NEAR(inner_product(a, b), direct, 1e-12);
  EXPECT_NEAR(inner_product(a, b), 0.25, 1e-12);
  EXPECT_THROW(inner_product(QState::basis_state(3, 0), QState::basis_state(4, 0)), DimensionMismatch);
}

TEST(DualBasisCheck, AcceptsWithOverlapSquared) {
  RandomStream rs(8, "dual");
  for (int t = 0; t < 30; ++t) {
    auto a = random_half_subspace(8, rs);
    auto perp = gf2::orthogonal_complement(a);
    auto target = prepare_subspace_state(a);
    auto psi = t % 2 == 0 ? random_state(8, rs) : prepare_subspace_state(random_half_subspace(8, rs));
    auto in_a = [&](const BitVector& v) { return a.contains(v); };
    auto in_perp = [&](const BitVector& v) { return perp.contains(v); };

    auto [s1, p1] = restrict_to(psi, in_a, true);
    auto [s2, p2] = restrict_to(hadamard_all(s1), in_perp, true);
    double overlap = inner_product(target, psi);
    EXPECT_NEAR(p1 * p2, overlap * overlap, 1e-9);
    if (p1 * p2 > 1e-9) {
      auto post = hadamard_all(s2);
      EXPECT_TRUE(equal_up_to_sign(post, target, 1e-9));
      // A second run accepts with certainty.
      EXPECT_NEAR(acceptance_probability(post, in_a), 1.0, 1e-9);
      EXPECT_NEAR(acceptance_probability(hadamard_all(post), in_perp), 1.0, 1e-9);
    }
  }
}

TEST(Normalization, PreservedByAllOperations) {
  RandomStream rs(9, "norm");
  auto psi = random_state(7, rs);
  EXPECT_NEAR(hadamard_all(psi).norm_squared(), 1.0, 1e-9);
  EXPECT_NEAR(apply_linear_map(psi, gf2::sample_full_rank(7, rs)).norm_squared(), 1.0, 1e-9);
  EXPECT_THROW(QState::from_amplitudes(1, {1.0, 1.0}), InvalidParameters);
}

TEST(StateDump, RoundTrip) {
  RandomStream rs(10, "dump");
  auto psi = random_state(6, rs);
  std::stringstream ss;
  write_state(ss, psi);
  EXPECT_EQ(ss.str().size(), 4U + 8U * 64U);
  auto back = read_state(ss);
  for (std::uint64_t x = 0; x < psi.size(); ++x) EXPECT_EQ(back.amplitude(x), psi.amplitude(x));
  std::stringstream bad("\x03\x00");
  EXPECT_THROW(read_state(bad), FormatError);
}

TEST(Register, SingleUse) {
  Register r(QState::basis_state(2, 1));
  EXPECT_TRUE(r.alive());
  Register moved = std::move(r);
  EXPECT_FALSE(r.alive());  // NOLINT(bugprone-use-after-move)
  EXPECT_THROW(r.release(), ConsumedRegister);
  auto copy = moved.clone(grant_unphysical_access());
  EXPECT_EQ(moved.peek(grant_unphysical_access()).amplitude(1), 1.0);
  auto s = moved.release();
  EXPECT_FALSE(moved.alive());
  EXPECT_EQ(s.amplitude(1), 1.0);
  EXPECT_TRUE(copy.alive());
}
