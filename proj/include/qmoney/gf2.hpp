#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmoney/error.hpp"
#include "qmoney/random.hpp"

// Exact linear algebra over GF(2) for ambient dimensions up to 64.
//
// Coordinate i of a vector is bit i of a 64-bit word, so e_1 is bit 0. A basis
// string written "x_1 x_2 ... x_n" therefore maps to the integer sum x_i 2^(i-1).
namespace qmoney::gf2 {

inline constexpr int kMaxDim = 64;

inline std::uint64_t low_mask(int n) { return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1; }

inline void check_dim(int n) {
  if (n < 0 || n > kMaxDim) throw DimensionMismatch("gf2: dimension out of range [0, 64]");
}

class BitVector {
 public:
  BitVector() = default;
  BitVector(int dim, std::uint64_t word) : word_(word & low_mask(dim)), dim_(dim) { check_dim(dim); }

  static BitVector zero(int dim) { return {dim, 0}; }
  static BitVector unit(int dim, int i) { return {dim, std::uint64_t{1} << i}; }

  // "1010" sets coordinates 1 and 3 (first character is coordinate 1).
  static BitVector from_string(std::string_view s) {
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') w |= std::uint64_t{1} << i;
      else if (s[i] != '0') throw FormatError("gf2: expected only '0' and '1'");
    }
    return {static_cast<int>(s.size()), w};
  }

  int dim() const { return dim_; }
  std::uint64_t word() const { return word_; }
  bool bit(int i) const { return (word_ >> i) & 1U; }
  bool is_zero() const { return word_ == 0; }

  bool dot(const BitVector& other) const {
    if (other.dim_ != dim_) throw DimensionMismatch("gf2: dot of vectors with different dimension");
    return std::popcount(word_ & other.word_) & 1;
  }

  BitVector operator^(const BitVector& other) const {
    if (other.dim_ != dim_) throw DimensionMismatch("gf2: sum of vectors with different dimension");
    return {dim_, word_ ^ other.word_};
  }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(dim_), '0');
    for (int i = 0; i < dim_; ++i) s[static_cast<std::size_t>(i)] = bit(i) ? '1' : '0';
    return s;
  }

  bool operator==(const BitVector&) const = default;

 private:
  std::uint64_t word_ = 0;
  int dim_ = 0;
};

// Row-major bit matrix; row r is a word whose bit c is entry (r, c).
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols) : rows_(static_cast<std::size_t>(rows), 0), cols_(cols) {
    check_dim(cols);
    if (rows < 0) throw DimensionMismatch("gf2: negative row count");
  }
  BitMatrix(int cols, std::vector<std::uint64_t> rows) : rows_(std::move(rows)), cols_(cols) {
    check_dim(cols);
    for (auto& r : rows_) r &= low_mask(cols);
  }

  static BitMatrix identity(int n) {
    BitMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.rows_[static_cast<std::size_t>(i)] = std::uint64_t{1} << i;
    return m;
  }

  int rows() const { return static_cast<int>(rows_.size()); }
  int cols() const { return cols_; }
  std::uint64_t row(int r) const { return rows_[static_cast<std::size_t>(r)]; }
  std::span<const std::uint64_t> row_words() const { return rows_; }

  bool at(int r, int c) const { return (row(r) >> c) & 1U; }
  void set(int r, int c, bool v) {
    auto& w = rows_[static_cast<std::size_t>(r)];
    w = v ? (w | (std::uint64_t{1} << c)) : (w & ~(std::uint64_t{1} << c));
  }

  // Matrix-vector product over GF(2).
  std::uint64_t apply_word(std::uint64_t x) const {
    std::uint64_t y = 0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      y |= static_cast<std::uint64_t>(std::popcount(rows_[r] & x) & 1) << r;
    }
    return y;
  }

  BitVector apply(const BitVector& v) const {
    if (v.dim() != cols_) throw DimensionMismatch("gf2: matrix/vector dimension mismatch");
    return {rows(), apply_word(v.word())};
  }

  BitMatrix transposed() const {
    BitMatrix t(cols_, rows());
    for (int r = 0; r < rows(); ++r)
      for (int c = 0; c < cols_; ++c)
        if (at(r, c)) t.set(c, r, true);
    return t;
  }

  // (this * other)(x) = this(other(x)).
  BitMatrix operator*(const BitMatrix& other) const {
    if (other.rows() != cols_) throw DimensionMismatch("gf2: matrix product shape mismatch");
    BitMatrix out(rows(), other.cols());
    for (int r = 0; r < rows(); ++r) {
      std::uint64_t acc = 0;
      std::uint64_t w = row(r);
      while (w) {
        int k = std::countr_zero(w);
        acc ^= other.row(k);
        w &= w - 1;
      }
      out.rows_[static_cast<std::size_t>(r)] = acc;
    }
    return out;
  }

  int rank() const {
    std::vector<std::uint64_t> m = rows_;
    int r = 0;
    for (int c = 0; c < cols_ && r < rows(); ++c) {
      auto bit = std::uint64_t{1} << c;
      auto it = std::find_if(m.begin() + r, m.end(), [bit](std::uint64_t w) { return w & bit; });
      if (it == m.end()) continue;
      std::iter_swap(m.begin() + r, it);
      for (std::size_t i = 0; i < m.size(); ++i)
        if (i != static_cast<std::size_t>(r) && (m[i] & bit)) m[i] ^= m[static_cast<std::size_t>(r)];
      ++r;
    }
    return r;
  }

  // Gauss-Jordan inverse; nullopt when singular or non-square.
  std::optional<BitMatrix> inverse() const {
    int n = rows();
    if (n != cols_) return std::nullopt;
    std::vector<std::uint64_t> m = rows_;
    std::vector<std::uint64_t> inv = identity(n).rows_;
    for (int c = 0; c < n; ++c) {
      auto bit = std::uint64_t{1} << c;
      std::size_t p = static_cast<std::size_t>(c);
      while (p < m.size() && !(m[p] & bit)) ++p;
      if (p == m.size()) return std::nullopt;
      std::swap(m[p], m[static_cast<std::size_t>(c)]);
      std::swap(inv[p], inv[static_cast<std::size_t>(c)]);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (i != static_cast<std::size_t>(c) && (m[i] & bit)) {
          m[i] ^= m[static_cast<std::size_t>(c)];
          inv[i] ^= inv[static_cast<std::size_t>(c)];
        }
      }
    }
    return BitMatrix(n, std::move(inv));
  }

  bool operator==(const BitMatrix&) const = default;

 private:
  std::vector<std::uint64_t> rows_;
  int cols_ = 0;
};

// Invertible n x n map with cached inverse and transpose.
class LinearMap {
 public:
  static std::optional<LinearMap> from_matrix(BitMatrix forward) {
    if (forward.rows() != forward.cols()) return std::nullopt;
    auto inv = forward.inverse();
    if (!inv) return std::nullopt;
    LinearMap m;
    m.transpose_ = forward.transposed();
    m.forward_ = std::move(forward);
    m.inverse_ = std::move(*inv);
    return m;
  }

  static LinearMap identity(int n) { return *from_matrix(BitMatrix::identity(n)); }

  int dim() const { return forward_.cols(); }
  const BitMatrix& forward() const { return forward_; }
  const BitMatrix& inverse_matrix() const { return inverse_; }
  const BitMatrix& transpose_matrix() const { return transpose_; }

  BitVector apply(const BitVector& v) const { return forward_.apply(v); }
  BitVector apply_inverse(const BitVector& v) const { return inverse_.apply(v); }
  BitVector apply_transpose(const BitVector& v) const { return transpose_.apply(v); }

  LinearMap inverted() const {
    LinearMap m;
    m.forward_ = inverse_;
    m.inverse_ = forward_;
    m.transpose_ = inverse_.transposed();
    return m;
  }

  bool operator==(const LinearMap& other) const { return forward_ == other.forward_; }

 private:
  LinearMap() = default;

  BitMatrix forward_;
  BitMatrix inverse_;
  BitMatrix transpose_;
};

// x -> a(b(x)).
inline LinearMap compose(const LinearMap& a, const LinearMap& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("gf2: compose of maps with different dimension");
  return *LinearMap::from_matrix(a.forward() * b.forward());
}

// Rejection sampling: draw n*n bits, keep the first invertible matrix.
inline LinearMap sample_full_rank(int n, RandomStream& stream, int* attempts = nullptr) {
  check_dim(n);
  for (int tries = 1;; ++tries) {
    std::vector<std::uint64_t> rows(static_cast<std::size_t>(n));
    for (auto& r : rows) r = stream.next_u64() & low_mask(n);
    if (auto m = LinearMap::from_matrix(BitMatrix(n, std::move(rows)))) {
      if (attempts) *attempts = tries;
      return *std::move(m);
    }
  }
}

// Subspace in canonical reduced row-echelon form. Each basis row's pivot is its
// lowest set coordinate; pivots are strictly increasing and every pivot column
// is zero in all other rows.
class Subspace {
 public:
  explicit Subspace(int ambient_dim = 0) : ambient_(ambient_dim) { check_dim(ambient_dim); }

  static Subspace span_of(int ambient_dim, std::span<const BitVector> vectors) {
    Subspace s(ambient_dim);
    for (const auto& v : vectors) {
      if (v.dim() != ambient_dim) throw DimensionMismatch("gf2: spanning vector of wrong dimension");
      s.insert(v.word());
    }
    return s;
  }

  static Subspace span_of_words(int ambient_dim, std::span<const std::uint64_t> words) {
    Subspace s(ambient_dim);
    for (auto w : words) s.insert(w & low_mask(ambient_dim));
    return s;
  }

  int ambient_dim() const { return ambient_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  std::span<const std::uint64_t> basis_words() const { return basis_; }
  std::vector<BitVector> basis() const {
    std::vector<BitVector> out;
    for (auto w : basis_) out.emplace_back(ambient_, w);
    return out;
  }

  bool contains_word(std::uint64_t w) const { return reduce(w) == 0; }
  bool contains(const BitVector& v) const {
    if (v.dim() != ambient_) throw DimensionMismatch("gf2: membership dimension mismatch");
    return contains_word(v.word());
  }

  // All 2^dim members; only for small dimensions.
  std::vector<std::uint64_t> elements() const {
    std::vector<std::uint64_t> out{0};
    for (auto b : basis_) {
      std::size_t n = out.size();
      for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] ^ b);
    }
    return out;
  }

  bool operator==(const Subspace&) const = default;

 private:
  std::uint64_t reduce(std::uint64_t w) const {
    for (auto b : basis_)
      if (w & (b & -b)) w ^= b;
    return w;
  }

  void insert(std::uint64_t w) {
    w = reduce(w);
    if (w == 0) return;
    std::uint64_t pivot = w & -w;
    for (auto& b : basis_)
      if (b & pivot) b ^= w;
    auto pos = std::lower_bound(basis_.begin(), basis_.end(), w,
                                [](std::uint64_t a, std::uint64_t b) { return (a & -a) < (b & -b); });
    basis_.insert(pos, w);
  }

  std::vector<std::uint64_t> basis_;
  int ambient_ = 0;
};

// Span(e_1, ..., e_{n/2}).
inline Subspace canonical_subspace(int n) {
  if (n <= 0 || n % 2 != 0) throw InvalidParameters("canonical_subspace: n must be even and positive");
  check_dim(n);
  std::vector<std::uint64_t> words;
  for (int i = 0; i < n / 2; ++i) words.push_back(std::uint64_t{1} << i);
  return Subspace::span_of_words(n, words);
}

inline Subspace subspace_image(const LinearMap& map, const Subspace& s) {
  if (map.dim() != s.ambient_dim()) throw DimensionMismatch("gf2: image dimension mismatch");
  std::vector<std::uint64_t> images;
  for (auto b : s.basis_words()) images.push_back(map.forward().apply_word(b));
  return Subspace::span_of_words(s.ambient_dim(), images);
}

inline Subspace orthogonal_complement(const Subspace& s) {
  const int n = s.ambient_dim();
  std::uint64_t pivots = 0;
  for (auto b : s.basis_words()) pivots |= b & -b;
  std::vector<std::uint64_t> words;
  for (int f = 0; f < n; ++f) {
    auto fbit = std::uint64_t{1} << f;
    if (pivots & fbit) continue;
    std::uint64_t w = fbit;
    for (auto b : s.basis_words())
      if (b & fbit) w |= b & -b;
    words.push_back(w);
  }
  return Subspace::span_of_words(n, words);
}

inline Subspace subspace_sum(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw DimensionMismatch("gf2: sum of subspaces in different spaces");
  std::vector<std::uint64_t> words(a.basis_words().begin(), a.basis_words().end());
  words.insert(words.end(), b.basis_words().begin(), b.basis_words().end());
  return Subspace::span_of_words(a.ambient_dim(), words);
}

// A ∩ B = (A^⊥ + B^⊥)^⊥.
inline Subspace intersection(const Subspace& a, const Subspace& b) {
  return orthogonal_complement(subspace_sum(orthogonal_complement(a), orthogonal_complement(b)));
}

inline int intersection_dim(const Subspace& a, const Subspace& b) { return intersection(a, b).dim(); }

}  // namespace qmoney::gf2
