#pragma once

#include <openssl/evp.h>
#include <openssl/crypto.h>
#include <openssl/hmac.h>

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/error.hpp"
#include "qmoney/qsim.hpp"
#include "qmoney/random.hpp"

// Idealized obfuscation. Programs live sealed inside a registry; callers only
// hold handles, and a handle can only be evaluated. The registry is the
// trusted party standing in for iO, compute-and-compare obfuscation and NIZK.
namespace qmoney::obf {

using HandleId = std::array<std::uint8_t, 16>;
using Digest = std::array<std::uint8_t, 32>;

inline std::string handle_hex(const HandleId& id) { return to_hex(id); }

inline HandleId handle_from_hex(std::string_view hex) {
  auto bytes = from_hex(hex);
  if (bytes.size() != 16) throw FormatError("handle id must be 16 bytes");
  HandleId id{};
  std::copy(bytes.begin(), bytes.end(), id.begin());
  return id;
}

namespace detail {

inline Digest hmac(std::span<const std::uint8_t> key, std::initializer_list<std::span<const std::uint8_t>> parts) {
  std::vector<std::uint8_t> msg;
  for (auto p : parts) {
    // Length-prefix every part so concatenations stay unambiguous.
    std::uint64_t n = p.size();
    for (int i = 0; i < 8; ++i) msg.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
    msg.insert(msg.end(), p.begin(), p.end());
  }
  Digest out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(), out.data(), &len)) {
    throw Error("hmac failed");
  }
  return out;
}

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace detail

// A program the registry can hold. The descriptor must determine the program
// completely; it is what gets hashed into the handle id and what sealing
// persists.
class SealedProgram {
 public:
  virtual ~SealedProgram() = default;
  virtual std::string kind() const = 0;
  virtual std::vector<std::uint8_t> descriptor() const = 0;
};

class ObfRegistry;

using ProgramFactory = std::function<std::shared_ptr<const SealedProgram>(const std::shared_ptr<ObfRegistry>&,
                                                                          std::span<const std::uint8_t>)>;

namespace detail {
struct FactoryTable {
  std::mutex mu;
  std::map<std::string, ProgramFactory> factories;
};
inline FactoryTable& factory_table() {
  static FactoryTable table;
  return table;
}
}  // namespace detail

// Makes a program kind restorable from sealed records.
inline bool register_program_kind(const std::string& kind, ProgramFactory factory) {
  auto& t = detail::factory_table();
  std::lock_guard lock(t.mu);
  t.factories[kind] = std::move(factory);
  return true;
}

inline ProgramFactory find_program_kind(const std::string& kind) {
  auto& t = detail::factory_table();
  std::lock_guard lock(t.mu);
  auto it = t.factories.find(kind);
  if (it == t.factories.end()) throw FormatError("unknown program kind: " + kind);
  return it->second;
}

template <class P>
class ProgramHandle {
 public:
  ProgramHandle() = default;

  const HandleId& id() const { return id_; }
  const std::shared_ptr<ObfRegistry>& oracle() const { return registry_; }
  explicit operator bool() const { return registry_ != nullptr; }

  template <class... Args>
  decltype(auto) operator()(Args&&... args) const {
    return program()->evaluate(std::forward<Args>(args)...);
  }

  // Fixes the classical part of the input for coherent evaluation on a register.
  template <class... Args>
  auto bind(Args&&... args) const {
    return program()->bind(std::forward<Args>(args)...);
  }

  // Batched compute-and-compare evaluation over a range of shifted inputs.
  template <class... Args>
  bool fires_in_window(Args&&... args) const {
    return program()->fires_in_window(std::forward<Args>(args)...);
  }

  bool operator==(const ProgramHandle& other) const { return id_ == other.id_ && registry_ == other.registry_; }

 private:
  friend class ObfRegistry;
  ProgramHandle(std::shared_ptr<ObfRegistry> registry, const HandleId& id) : registry_(std::move(registry)), id_(id) {}

  std::shared_ptr<const P> program() const;

  std::shared_ptr<ObfRegistry> registry_;
  HandleId id_{};
};

struct SealedRecord {
  HandleId id{};
  std::vector<std::uint8_t> blob;  // AES-256-GCM ciphertext || tag
};

struct CreationLogEntry {
  HandleId id{};
  std::string kind;
};

using NizkProof = Digest;

class ObfRegistry : public std::enable_shared_from_this<ObfRegistry> {
 public:
  static std::shared_ptr<ObfRegistry> create(const Seed& world_key) {
    return std::shared_ptr<ObfRegistry>(new ObfRegistry(world_key));
  }

  const Seed& world_key() const { return world_key_; }

  // Deterministic in (program, tape) for a fixed world.
  HandleId handle_id_for(std::string_view kind, std::span<const std::uint8_t> descriptor,
                         std::span<const std::uint8_t> tape) const {
    auto d = detail::hmac(world_key_, {detail::as_bytes("qmoney/handle"), detail::as_bytes(kind), descriptor, tape});
    HandleId id{};
    std::copy_n(d.begin(), id.size(), id.begin());
    return id;
  }

  template <class P>
  ProgramHandle<P> obfuscate(std::shared_ptr<const P> program, std::span<const std::uint8_t> tape = {}) {
    auto kind = program->kind();
    auto desc = program->descriptor();
    auto id = handle_id_for(kind, desc, tape);
    {
      std::unique_lock lock(mu_);
      if (!programs_.count(id)) {
        programs_.emplace(id, Entry{kind, std::move(desc), {tape.begin(), tape.end()}, program});
        log_.push_back({id, kind});
      }
    }
    return ProgramHandle<P>(shared_from_this(), id);
  }

  // Re-attaches to an existing program by id, checking its type.
  template <class P>
  ProgramHandle<P> handle(const HandleId& id) {
    lookup<P>(id);
    return ProgramHandle<P>(shared_from_this(), id);
  }

  bool contains(const HandleId& id) const {
    std::shared_lock lock(mu_);
    return programs_.count(id) != 0;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return programs_.size();
  }

  // Encrypts every record under the world key, in creation order.
  std::vector<SealedRecord> seal() const {
    std::shared_lock lock(mu_);
    std::vector<SealedRecord> out;
    for (const auto& entry : log_) {
      const auto& e = programs_.at(entry.id);
      ByteWriter w;
      w.str(e.kind).bytes(e.descriptor).bytes(e.tape);
      out.push_back({entry.id, gcm(true, entry.id, w.data())});
    }
    return out;
  }

  // Rebuilds sealed programs; records must come in creation order so that
  // programs referring to earlier handles can resolve them.
  void restore(std::span<const SealedRecord> records) {
    for (const auto& r : records) {
      auto plain = gcm(false, r.id, r.blob);
      ByteReader rd(plain);
      auto kind = rd.str();
      auto desc = rd.bytes();
      auto tape = rd.bytes();
      if (!rd.done()) throw FormatError("sealed record has trailing bytes");
      if (handle_id_for(kind, desc, tape) != r.id) throw FormatError("sealed record does not match its handle id");
      auto program = find_program_kind(kind)(shared_from_this(), desc);
      std::unique_lock lock(mu_);
      if (!programs_.count(r.id)) {
        programs_.emplace(r.id, Entry{kind, std::move(desc), std::move(tape), std::move(program)});
        log_.push_back({r.id, kind});
      }
    }
  }

  // Kinds and ids of every registered program. Harness-only.
  std::vector<CreationLogEntry> creation_log(const qsim::UnphysicalAccess&) const {
    std::shared_lock lock(mu_);
    return log_;
  }

  // NIZK stub. A proof is a MAC the oracle issues for (crs, statement).
  NizkProof nizk_prove(std::span<const std::uint8_t> crs, const HandleId& statement, const SealedProgram& witness_program,
                       std::span<const std::uint8_t> witness_tape) const {
    if (!contains(statement) ||
        handle_id_for(witness_program.kind(), witness_program.descriptor(), witness_tape) != statement) {
      throw InvalidParameters("nizk: witness does not satisfy the relation");
    }
    return proof_for(crs, statement);
  }

  bool nizk_verify(std::span<const std::uint8_t> crs, const HandleId& statement, const NizkProof& proof) const {
    auto expect = proof_for(crs, statement);
    return CRYPTO_memcmp(expect.data(), proof.data(), expect.size()) == 0;
  }

  struct SimulatedCrs {
    std::vector<std::uint8_t> crs;
    Digest trapdoor{};
  };

  SimulatedCrs nizk_simulate_crs(RandomStream& stream) const {
    SimulatedCrs out;
    out.crs.resize(32);
    stream.fill(out.crs);
    out.trapdoor = trapdoor_for(out.crs);
    return out;
  }

  // Proves any statement, given the trapdoor of the crs.
  NizkProof nizk_simulate(std::span<const std::uint8_t> crs, const Digest& trapdoor, const HandleId& statement) const {
    auto expect = trapdoor_for(crs);
    if (CRYPTO_memcmp(expect.data(), trapdoor.data(), expect.size()) != 0) {
      throw InvalidParameters("nizk: trapdoor does not belong to this crs");
    }
    return proof_for(crs, statement);
  }

 private:
  template <class P>
  friend class ProgramHandle;

  struct Entry {
    std::string kind;
    std::vector<std::uint8_t> descriptor;
    std::vector<std::uint8_t> tape;
    std::shared_ptr<const SealedProgram> program;
  };

  explicit ObfRegistry(const Seed& world_key) : world_key_(world_key) {}

  template <class P>
  std::shared_ptr<const P> lookup(const HandleId& id) const {
    std::shared_ptr<const SealedProgram> base;
    {
      std::shared_lock lock(mu_);
      auto it = programs_.find(id);
      if (it == programs_.end()) throw UnknownHandle("unknown handle " + handle_hex(id));
      base = it->second.program;
    }
    auto typed = std::dynamic_pointer_cast<const P>(base);
    if (!typed) throw ShapeMismatch("handle " + handle_hex(id) + " has a different program shape");
    return typed;
  }

  NizkProof proof_for(std::span<const std::uint8_t> crs, const HandleId& statement) const {
    return detail::hmac(world_key_, {detail::as_bytes("qmoney/nizk-proof"), crs, statement});
  }

  Digest trapdoor_for(std::span<const std::uint8_t> crs) const {
    return detail::hmac(world_key_, {detail::as_bytes("qmoney/nizk-trapdoor"), crs});
  }

  std::vector<std::uint8_t> gcm(bool encrypt, const HandleId& id, std::span<const std::uint8_t> in) const {
    auto key = derive_seed(world_key_, "seal");
    // Ids are unique per (program, tape), so the id-derived nonce never
    // repeats under a different plaintext.
    qmoney::detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    constexpr std::size_t kTag = 16;
    if (!encrypt && in.size() < kTag) throw FormatError("sealed record too short");
    std::size_t body = encrypt ? in.size() : in.size() - kTag;
    std::vector<std::uint8_t> out(body + (encrypt ? kTag : 0));
    int len = 0;
    bool ok = ctx && EVP_CipherInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr, encrypt ? 1 : 0) == 1 &&
              EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, 12, nullptr) == 1 &&
              EVP_CipherInit_ex(ctx.get(), nullptr, nullptr, key.data(), id.data(), encrypt ? 1 : 0) == 1 &&
              EVP_CipherUpdate(ctx.get(), nullptr, &len, id.data(), static_cast<int>(id.size())) == 1 &&
              EVP_CipherUpdate(ctx.get(), out.data(), &len, in.data(), static_cast<int>(body)) == 1;
    if (!ok) throw Error("seal: cipher failure");
    if (encrypt) {
      ok = EVP_CipherFinal_ex(ctx.get(), out.data() + body, &len) == 1 &&
           EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTag, out.data() + body) == 1;
      if (!ok) throw Error("seal: cipher failure");
    } else {
      std::array<std::uint8_t, kTag> tag{};
      std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(body), kTag, tag.begin());
      ok = EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTag, tag.data()) == 1 &&
           EVP_CipherFinal_ex(ctx.get(), out.data() + body, &len) == 1;
      if (!ok) throw FormatError("sealed record failed authentication (wrong world?)");
    }
    return out;
  }

  Seed world_key_;
  mutable std::shared_mutex mu_;
  std::map<HandleId, Entry> programs_;
  std::vector<CreationLogEntry> log_;
};

template <class P>
std::shared_ptr<const P> ProgramHandle<P>::program() const {
  if (!registry_) throw UnknownHandle("empty program handle");
  return registry_->template lookup<P>(id_);
}

// ---------------------------------------------------------------------------
// Compute-and-compare programs over Z_q, q a power of two up to 2^32.

// Inclusive range of offsets [lo, hi] (signed, taken mod q).
struct OffsetRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

class CompareProgram : public SealedProgram {
 public:
  // 1 iff f(a, c) equals the hidden target.
  virtual bool evaluate(std::span<const std::uint32_t> a, std::uint32_t c) const = 0;

  // Same as OR over sh in the ranges of evaluate(a, c + sh), computed in one step.
  virtual bool fires_in_window(std::span<const std::uint32_t> a, std::uint32_t c,
                               std::span<const OffsetRange> ranges) const = 0;

  virtual std::size_t input_dim() const = 0;
  virtual std::uint32_t modulus_mask() const = 0;

 protected:
  void check_shape(std::span<const std::uint32_t> a) const {
    if (a.size() != input_dim()) throw ShapeMismatch("compare program: wrong input dimension");
  }
};

// f_s(a, c) = c - <s, a> mod q compared with target.
class CcProgram final : public CompareProgram {
 public:
  static constexpr const char* kKind = "cc";

  CcProgram(std::vector<std::uint32_t> s, std::uint32_t target, std::uint32_t mask)
      : s_(std::move(s)), target_(target & mask), mask_(mask) {}

  std::string kind() const override { return kKind; }
  std::vector<std::uint8_t> descriptor() const override {
    ByteWriter w;
    w.u32(mask_).u32(target_).words(s_);
    return w.take();
  }
  static std::shared_ptr<const SealedProgram> from_descriptor(std::span<const std::uint8_t> d) {
    ByteReader r(d);
    auto mask = r.u32();
    auto target = r.u32();
    auto s = r.words();
    if (!r.done()) throw FormatError("cc descriptor has trailing bytes");
    return std::make_shared<CcProgram>(std::move(s), target, mask);
  }

  bool evaluate(std::span<const std::uint32_t> a, std::uint32_t c) const override {
    check_shape(a);
    return f(a, c) == target_;
  }

  bool fires_in_window(std::span<const std::uint32_t> a, std::uint32_t c,
                       std::span<const OffsetRange> ranges) const override {
    check_shape(a);
    // c + sh - <s,a> = target  <=>  sh = target - f(a, c).
    std::uint32_t need = (target_ - f(a, c)) & mask_;
    for (const auto& r : ranges) {
      auto lo = static_cast<std::uint32_t>(r.lo) & mask_;
      auto span = static_cast<std::uint64_t>(r.hi - r.lo);
      if (span >= static_cast<std::uint64_t>(mask_)) return true;
      if (((need - lo) & mask_) <= span) return true;
    }
    return false;
  }

  std::size_t input_dim() const override { return s_.size(); }
  std::uint32_t modulus_mask() const override { return mask_; }

 private:
  std::uint32_t f(std::span<const std::uint32_t> a, std::uint32_t c) const {
    std::uint32_t dot = 0;
    for (std::size_t i = 0; i < s_.size(); ++i) dot += s_[i] * a[i];
    return (c - dot) & mask_;
  }

  std::vector<std::uint32_t> s_;
  std::uint32_t target_;
  std::uint32_t mask_;
};

// All-zero simulation: same input shape, never fires.
class CcSimProgram final : public CompareProgram {
 public:
  static constexpr const char* kKind = "cc-sim";

  CcSimProgram(std::size_t dim, std::uint32_t mask) : dim_(dim), mask_(mask) {}

  std::string kind() const override { return kKind; }
  std::vector<std::uint8_t> descriptor() const override {
    ByteWriter w;
    w.u32(mask_).u64(dim_);
    return w.take();
  }
  static std::shared_ptr<const SealedProgram> from_descriptor(std::span<const std::uint8_t> d) {
    ByteReader r(d);
    auto mask = r.u32();
    auto dim = r.u64();
    if (!r.done()) throw FormatError("cc-sim descriptor has trailing bytes");
    return std::make_shared<CcSimProgram>(dim, mask);
  }

  bool evaluate(std::span<const std::uint32_t> a, std::uint32_t) const override {
    check_shape(a);
    return false;
  }
  bool fires_in_window(std::span<const std::uint32_t> a, std::uint32_t, std::span<const OffsetRange>) const override {
    check_shape(a);
    return false;
  }

  std::size_t input_dim() const override { return dim_; }
  std::uint32_t modulus_mask() const override { return mask_; }

 private:
  std::size_t dim_;
  std::uint32_t mask_;
};

using CompareHandle = ProgramHandle<CompareProgram>;

// tape may be empty; it only matters for handle ids.
inline CompareHandle cc_obfuscate(ObfRegistry& registry, std::vector<std::uint32_t> s, std::uint32_t target,
                                  std::uint32_t mask, std::span<const std::uint8_t> tape = {}) {
  std::shared_ptr<const CompareProgram> p = std::make_shared<CcProgram>(std::move(s), target, mask);
  return registry.obfuscate(p, tape);
}

inline CompareHandle cc_simulate(ObfRegistry& registry, std::size_t dim, std::uint32_t mask,
                                 std::span<const std::uint8_t> tape = {}) {
  std::shared_ptr<const CompareProgram> p = std::make_shared<CcSimProgram>(dim, mask);
  return registry.obfuscate(p, tape);
}

namespace detail {
inline const bool kCcKindsRegistered =
    register_program_kind(CcProgram::kKind,
                          [](const std::shared_ptr<ObfRegistry>&, std::span<const std::uint8_t> d) {
                            return CcProgram::from_descriptor(d);
                          }) &&
    register_program_kind(CcSimProgram::kKind, [](const std::shared_ptr<ObfRegistry>&,
                                                  std::span<const std::uint8_t> d) {
      return CcSimProgram::from_descriptor(d);
    });
}  // namespace detail

}  // namespace qmoney::obf
