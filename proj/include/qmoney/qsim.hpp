#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "qmoney/error.hpp"
#include "qmoney/gf2.hpp"
#include "qmoney/random.hpp"

// Dense state-vector simulator for the operations the money and voting schemes
// need. Amplitudes are real: every state reachable in these protocols is.
// Basis string x is indexed by the integer whose bit i is coordinate i + 1.
namespace qmoney::qsim {

inline constexpr int kDefaultMaxQubits = 16;
inline constexpr double kNormTolerance = 1e-9;

class QState;

namespace detail {
struct QStateAccess {
  static QState zero(int n_qubits, int max_qubits);
  static std::vector<double>& amps(QState& s);
};
}  // namespace detail

class QState {
 public:
  QState() = default;

  static QState basis_state(int n_qubits, std::uint64_t x, int max_qubits = kDefaultMaxQubits) {
    QState s(n_qubits, max_qubits);
    s.amp_.at(static_cast<std::size_t>(x)) = 1.0;
    return s;
  }

  // Takes ownership of an amplitude table; rejects unnormalized input.
  static QState from_amplitudes(int n_qubits, std::vector<double> amps, int max_qubits = kDefaultMaxQubits) {
    QState s(n_qubits, max_qubits);
    if (amps.size() != s.amp_.size()) throw DimensionMismatch("qsim: amplitude table size is not 2^n");
    s.amp_ = std::move(amps);
    if (std::abs(s.norm_squared() - 1.0) > kNormTolerance) throw InvalidParameters("qsim: state is not normalized");
    return s;
  }

  int n_qubits() const { return n_; }
  std::size_t size() const { return amp_.size(); }
  double amplitude(std::uint64_t x) const { return amp_[static_cast<std::size_t>(x)]; }
  std::span<const double> amplitudes() const { return amp_; }

  double norm_squared() const {
    double acc = 0;
    for (double a : amp_) acc += a * a;
    return acc;
  }

 private:
  QState(int n_qubits, int max_qubits) : n_(n_qubits) {
    if (n_qubits < 0 || n_qubits > max_qubits || n_qubits > gf2::kMaxDim) {
      throw DimensionMismatch("qsim: qubit count exceeds dense simulation cap");
    }
    amp_.assign(std::size_t{1} << n_qubits, 0.0);
  }

  friend struct detail::QStateAccess;

  int n_ = 0;
  std::vector<double> amp_;
};

namespace detail {
inline QState QStateAccess::zero(int n_qubits, int max_qubits) { return QState(n_qubits, max_qubits); }
inline std::vector<double>& QStateAccess::amps(QState& s) { return s.amp_; }
}  // namespace detail

// Uniform superposition over the members of s.
inline QState prepare_subspace_state(const gf2::Subspace& s, int max_qubits = kDefaultMaxQubits) {
  QState out = detail::QStateAccess::zero(s.ambient_dim(), max_qubits);
  auto& amps = detail::QStateAccess::amps(out);
  auto members = s.elements();
  double a = 1.0 / std::sqrt(static_cast<double>(members.size()));
  for (auto v : members) amps[static_cast<std::size_t>(v)] = a;
  return out;
}

// Moves the amplitude on |x> to |map(x)>.
inline QState apply_linear_map(const QState& state, const gf2::LinearMap& map) {
  if (map.dim() != state.n_qubits()) throw DimensionMismatch("qsim: map dimension differs from qubit count");
  QState out = state;
  auto& amps = detail::QStateAccess::amps(out);
  const auto& m = map.forward();
  for (std::uint64_t x = 0; x < state.size(); ++x) amps[m.apply_word(x)] = state.amplitude(x);
  return out;
}

// n-fold Hadamard (the QFT over F_2^n), via the fast Walsh-Hadamard transform.
inline QState hadamard_all(const QState& state) {
  QState out = state;
  auto& a = detail::QStateAccess::amps(out);
  for (std::size_t h = 1; h < a.size(); h <<= 1) {
    for (std::size_t i = 0; i < a.size(); i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        double u = a[j];
        double v = a[j + h];
        a[j] = u + v;
        a[j + h] = u - v;
      }
    }
  }
  double scale = std::pow(2.0, -0.5 * state.n_qubits());
  for (auto& v : a) v *= scale;
  return out;
}

// Keeps amplitudes whose predicate value equals `keep`; returns the
// renormalized state and the branch probability.
template <class Pred>
std::pair<QState, double> restrict_to(const QState& state, Pred&& predicate, bool keep) {
  QState out = state;
  auto& amps = detail::QStateAccess::amps(out);
  double p = 0;
  for (std::uint64_t x = 0; x < state.size(); ++x) {
    bool v = predicate(gf2::BitVector(state.n_qubits(), x));
    if (v == keep) {
      p += amps[x] * amps[x];
    } else {
      amps[x] = 0.0;
    }
  }
  if (p > 0) {
    double s = 1.0 / std::sqrt(p);
    for (auto& v : amps) v *= s;
  }
  return {std::move(out), p};
}

template <class Pred>
double acceptance_probability(const QState& state, Pred&& predicate) {
  double p = 0;
  for (std::uint64_t x = 0; x < state.size(); ++x) {
    if (predicate(gf2::BitVector(state.n_qubits(), x))) p += state.amplitude(x) * state.amplitude(x);
  }
  return p;
}

struct ProjectionOutcome {
  bool accepted = false;
  double probability = 0;  // probability of the observed branch
  QState post_state;
};

// Branch probabilities below this are treated as exactly zero.
inline constexpr double kDegenerateProbability = 1e-12;

// Projective measurement of a coherently evaluated classical predicate,
// followed by uncomputation of the output bit.
template <class Pred>
ProjectionOutcome project_predicate(const QState& state, Pred&& predicate, RandomStream& stream) {
  double p_accept = acceptance_probability(state, predicate);
  bool accept;
  if (p_accept <= kDegenerateProbability) {
    accept = false;
  } else if (p_accept >= 1.0 - kDegenerateProbability) {
    accept = true;
  } else {
    accept = stream.next_double() < p_accept;
  }
  auto [post, p] = restrict_to(state, predicate, accept);
  return {accept, p, std::move(post)};
}

enum class Basis { kComputational, kHadamard };

struct BasisOutcome {
  gf2::BitVector value;
  QState post_state;  // the collapsed register |value>
};

// Samples x with probability amplitude(x)^2; the Hadamard variant applies
// hadamard_all first.
inline BasisOutcome measure_basis(const QState& state, Basis basis, RandomStream& stream) {
  QState transformed;
  const QState* s = &state;
  if (basis == Basis::kHadamard) {
    transformed = hadamard_all(state);
    s = &transformed;
  }
  double u = stream.next_double();
  double acc = 0;
  std::uint64_t chosen = 0;
  for (std::uint64_t x = 0; x < s->size(); ++x) {
    double p = s->amplitude(x) * s->amplitude(x);
    // Zero-probability strings are never selected, even under rounding.
    if (p <= kDegenerateProbability) continue;
    chosen = x;
    acc += p;
    if (u < acc) break;
  }
  return {gf2::BitVector(state.n_qubits(), chosen), QState::basis_state(state.n_qubits(), chosen, state.n_qubits())};
}

inline double inner_product(const QState& a, const QState& b) {
  if (a.n_qubits() != b.n_qubits()) throw DimensionMismatch("qsim: inner product of different sizes");
  double acc = 0;
  for (std::uint64_t x = 0; x < a.size(); ++x) acc += a.amplitude(x) * b.amplitude(x);
  return acc;
}

// Equality up to one global sign.
inline bool equal_up_to_sign(const QState& a, const QState& b, double tol = kNormTolerance) {
  if (a.n_qubits() != b.n_qubits()) return false;
  auto close = [&](double sign) {
    for (std::uint64_t x = 0; x < a.size(); ++x)
      if (std::abs(a.amplitude(x) - sign * b.amplitude(x)) > tol) return false;
    return true;
  };
  return close(1.0) || close(-1.0);
}

// Binary dump: little-endian uint32 qubit count, then 2^n little-endian doubles.
inline void write_state(std::ostream& out, const QState& s) {
  auto n = static_cast<std::uint32_t>(s.n_qubits());
  unsigned char hdr[4];
  for (int i = 0; i < 4; ++i) hdr[i] = static_cast<unsigned char>(n >> (8 * i));
  out.write(reinterpret_cast<const char*>(hdr), 4);
  for (double a : s.amplitudes()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(a);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!out) throw FormatError("qsim: failed to write state");
}

inline QState read_state(std::istream& in, int max_qubits = kDefaultMaxQubits) {
  unsigned char hdr[4];
  if (!in.read(reinterpret_cast<char*>(hdr), 4)) throw FormatError("qsim: truncated state header");
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(hdr[i]) << (8 * i);
  if (n > static_cast<std::uint32_t>(max_qubits)) throw FormatError("qsim: stored qubit count exceeds cap");
  QState s = detail::QStateAccess::zero(static_cast<int>(n), max_qubits);
  for (auto& a : detail::QStateAccess::amps(s)) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("qsim: truncated amplitude table");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    a = std::bit_cast<double>(bits);
  }
  if (std::abs(s.norm_squared() - 1.0) > kNormTolerance) throw FormatError("qsim: stored state is not normalized");
  return s;
}

// Passkey for operations no physical party can perform: duplicating a register
// or reading its amplitudes. Obtainable only through qmoney/unphysical.hpp.
class UnphysicalAccess {
 private:
  UnphysicalAccess() = default;
  friend UnphysicalAccess grant_unphysical_access();
};

// Single-owner quantum register. Moving out of it, or releasing its state,
// leaves it consumed; further use throws ConsumedRegister.
class Register {
 public:
  Register() = default;
  explicit Register(QState state) : state_(std::move(state)) {}

  Register(Register&& other) noexcept : state_(std::exchange(other.state_, std::nullopt)) {}
  Register& operator=(Register&& other) noexcept {
    state_ = std::exchange(other.state_, std::nullopt);
    return *this;
  }
  Register(const Register&) = delete;
  Register& operator=(const Register&) = delete;

  bool alive() const { return state_.has_value(); }
  int n_qubits() const {
    if (!state_) throw ConsumedRegister();
    return state_->n_qubits();
  }

  QState release() {
    if (!state_) throw ConsumedRegister();
    return *std::exchange(state_, std::nullopt);
  }

  const QState& peek(const UnphysicalAccess&) const {
    if (!state_) throw ConsumedRegister();
    return *state_;
  }
  Register clone(const UnphysicalAccess&) const {
    if (!state_) throw ConsumedRegister();
    return Register(*state_);
  }

 private:
  std::optional<QState> state_;
};

}  // namespace qmoney::qsim
