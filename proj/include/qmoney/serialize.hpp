#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qmoney/bits.hpp"
#include "qmoney/codec.hpp"
#include "qmoney/error.hpp"
#include "qmoney/games.hpp"
#include "qmoney/money_at.hpp"
#include "qmoney/money_ut.hpp"
#include "qmoney/qsim.hpp"
#include "qmoney/qvote.hpp"

// File formats. Classical data is JSON; register amplitudes live in a binary
// sidecar next to the JSON file.
namespace qmoney::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class SchemeKind { kAt, kStrawman, kUt, kVote };

inline std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::kAt:
      return "at";
    case SchemeKind::kStrawman:
      return "strawman";
    case SchemeKind::kUt:
      return "ut";
    case SchemeKind::kVote:
      return "vote";
  }
  return "";
}

inline SchemeKind parse_kind(std::string_view s) {
  if (s == "at") return SchemeKind::kAt;
  if (s == "strawman") return SchemeKind::kStrawman;
  if (s == "ut") return SchemeKind::kUt;
  if (s == "vote") return SchemeKind::kVote;
  throw InvalidParameters("unknown scheme kind '" + std::string(s) + "' (valid: at, strawman, ut, vote)");
}

inline bool uses_crs(SchemeKind k) { return k == SchemeKind::kUt || k == SchemeKind::kVote; }

// ---------------------------------------------------------------------------
// Primitive encodings

template <class T>
T read_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("field '") + key + "' has the wrong type");
  }
}

inline std::string bits_hex(const BitString& b) { return to_hex(b.bytes()); }

inline BitString bits_from_hex(std::string_view hex, std::size_t nbits) {
  auto bytes = from_hex(hex);
  if (bytes.size() != (nbits + 7) / 8) throw FormatError("hex string has the wrong length");
  return BitString::from_bytes(bytes, nbits);
}

inline std::string blob(const std::vector<std::uint8_t>& bytes) { return to_base64(bytes); }

inline std::string limbs_base64(std::span<const std::uint32_t> words) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(words.size() * 4);
  for (auto w : words)
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  return to_base64(bytes);
}

inline std::vector<std::uint32_t> limbs_from_base64(std::string_view text) {
  auto bytes = from_base64(text);
  if (bytes.size() % 4 != 0) throw FormatError("limb array is not a multiple of 4 bytes");
  std::vector<std::uint32_t> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int k = 0; k < 4; ++k) out[i] |= static_cast<std::uint32_t>(bytes[4 * i + static_cast<std::size_t>(k)]) << (8 * k);
  return out;
}

inline json ciphertext_json(const rpke::RpkeCiphertext& ct) {
  return {{"n_lwe", ct.n_lwe}, {"ell", ct.ell}, {"limbs", limbs_base64(ct.words)}};
}

inline rpke::RpkeCiphertext ciphertext_from_json(const json& j) {
  rpke::RpkeCiphertext ct;
  ct.n_lwe = read_field<std::size_t>(j, "n_lwe");
  ct.ell = read_field<std::size_t>(j, "ell");
  ct.words = limbs_from_base64(read_field<std::string>(j, "limbs"));
  if (ct.words.size() != ct.ell * (ct.n_lwe + 1)) throw FormatError("ciphertext limbs do not match its shape");
  return ct;
}

template <class Put>
std::string encode(Put&& put) {
  ByteWriter w;
  put(w);
  return to_base64(w.data());
}

template <class Get>
auto decode(const std::string& text, Get&& get) {
  auto bytes = from_base64(text);
  ByteReader r(bytes);
  auto out = get(r);
  if (!r.done()) throw FormatError("encoded key has trailing bytes");
  return out;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + p.string());
}

inline json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

inline void check_format(const json& j, std::string_view expected) {
  if (read_field<std::string>(j, "format") != expected) throw FormatError("expected a " + std::string(expected) + " file");
}

inline json prf_key_json(const prf::PrfKey& k) {
  return {{"seed", to_hex(k.root)}, {"input_len", k.input_len}, {"output_len", k.output_len}};
}

inline prf::PrfKey prf_key_from_json(const json& j) {
  prf::PrfKey k;
  auto seed = from_hex(read_field<std::string>(j, "seed"));
  if (seed.size() != k.root.size()) throw FormatError("PRF seed has the wrong length");
  std::copy(seed.begin(), seed.end(), k.root.begin());
  k.input_len = read_field<std::size_t>(j, "input_len");
  k.output_len = read_field<std::size_t>(j, "output_len");
  return k;
}

// ---------------------------------------------------------------------------
// CRS

inline json ut_params_json(const money::UtParams& p) {
  return {{"rpke_preset", p.rpke_preset}, {"n_q", p.n_q}, {"lambda", p.lambda}, {"nizk_bytes", p.nizk_bytes}};
}

inline money::UtParams ut_params_from_json(const json& j) {
  money::UtParams p;
  p.rpke_preset = read_field<std::string>(j, "rpke_preset");
  p.n_q = read_field<int>(j, "n_q");
  p.lambda = read_field<std::size_t>(j, "lambda");
  p.nizk_bytes = read_field<std::size_t>(j, "nizk_bytes");
  p.validate();
  return p;
}

inline std::string crs_digest(const money::Crs& crs) {
  auto d = qmoney::detail::sha256(crs.bits().bytes());
  return to_hex(d);
}

inline json crs_json(const money::Crs& crs) {
  return {{"format", "qmoney.crs.v1"},
          {"params", ut_params_json(crs.params())},
          {"nbits", crs.bits().size()},
          {"bits", to_base64(crs.bits().bytes())}};
}

inline money::Crs crs_from_json(const json& j) {
  check_format(j, "qmoney.crs.v1");
  auto params = ut_params_from_json(read_field<json>(j, "params"));
  auto bytes = from_base64(read_field<std::string>(j, "bits"));
  return money::Crs::from_bits(params, BitString::from_bytes(bytes, read_field<std::size_t>(j, "nbits")));
}

// ---------------------------------------------------------------------------
// World: scheme keys plus the sealed oracle records they refer to.

struct World {
  SchemeKind kind = SchemeKind::kAt;
  std::uint64_t seed = 0;
  std::optional<money::AtKeys> at;
  std::optional<money::CrsKeys> crs_keys;
  std::string crs_digest;

  const std::shared_ptr<obf::ObfRegistry>& registry() const { return at ? at->world : crs_keys->world; }
  const money::MembershipHandle& pmem() const { return at ? at->vk.pmem : crs_keys->vk.pmem; }
  std::string preset() const { return at ? at->params.rpke_preset : crs_keys->vk.rpke.preset; }
};

inline World make_at_world(SchemeKind kind, const std::string& preset, std::uint64_t seed) {
  if (kind != SchemeKind::kAt && kind != SchemeKind::kStrawman) throw InvalidParameters("not a money_at world kind");
  money::AtParams params;
  params.rpke_preset = preset;
  World w;
  w.kind = kind;
  w.seed = seed;
  w.at = money::at_setup(params, derive_seed(seed, "keygen"),
                         kind == SchemeKind::kAt ? money::AtVariant::kStandard : money::AtVariant::kStrawman);
  return w;
}

inline World make_crs_world(SchemeKind kind, const money::Crs& crs, std::uint64_t seed) {
  World w;
  w.kind = kind;
  w.seed = seed;
  w.crs_digest = io::crs_digest(crs);
  if (kind == SchemeKind::kUt) {
    w.crs_keys = money::ut_setup(crs, derive_seed(seed, "keygen"));
  } else if (kind == SchemeKind::kVote) {
    w.crs_keys = vote::qv_setup(crs, derive_seed(seed, "keygen"));
  } else {
    throw InvalidParameters("not a CRS world kind");
  }
  return w;
}

inline json records_json(const obf::ObfRegistry& reg) {
  json out = json::array();
  for (const auto& r : reg.seal()) out.push_back({{"id", obf::handle_hex(r.id)}, {"blob", to_base64(r.blob)}});
  return out;
}

inline std::shared_ptr<obf::ObfRegistry> registry_from_json(const json& j) {
  auto key_bytes = from_hex(read_field<std::string>(j, "world_key"));
  Seed key{};
  if (key_bytes.size() != key.size()) throw FormatError("world key has the wrong length");
  std::copy(key_bytes.begin(), key_bytes.end(), key.begin());
  auto reg = obf::ObfRegistry::create(key);
  std::vector<obf::SealedRecord> records;
  for (const auto& r : read_field<json>(j, "records")) {
    records.push_back({obf::handle_from_hex(read_field<std::string>(r, "id")), from_base64(read_field<std::string>(r, "blob"))});
  }
  reg->restore(records);
  return reg;
}

inline json world_json(const World& w) {
  json j{{"format", "qmoney.world.v1"}, {"kind", to_string(w.kind)}, {"preset", w.preset()}, {"seed", w.seed}};
  j["world_key"] = to_hex(w.registry()->world_key());
  if (w.at) {
    const auto& k = *w.at;
    j["params"] = {{"rpke_preset", k.params.rpke_preset},
                   {"n_q", k.params.n_q},
                   {"tag_bits", k.params.tag_bits},
                   {"ict_bits", k.params.ict_bits}};
    j["vk"] = {{"pmem", obf::handle_hex(k.vk.pmem.id())}, {"prerand", obf::handle_hex(k.vk.prerand.id())}};
    j["mk"] = {{"prf_key", prf_key_json(k.mk.deriver->key())},
               {"pk", encode([&](ByteWriter& bw) { codec::put(bw, k.mk.pk); })}};
    j["tk"] = {{"sk", encode([&](ByteWriter& bw) { codec::put(bw, k.tk.sk); })}};
  } else {
    const auto& k = *w.crs_keys;
    j["crs_digest"] = w.crs_digest;
    j["registers"] = k.vk.registers;
    j["vk"] = {{"pmem", obf::handle_hex(k.vk.pmem.id())},
               {"prerand", obf::handle_hex(k.vk.prerand.id())},
               {"proof", to_hex(k.vk.proof)}};
    j["mk"] = {{"prf_key", prf_key_json(k.mk.deriver->key())}};
  }
  j["records"] = records_json(*w.registry());
  return j;
}

// CRS worlds need the CRS they were made with.
inline World world_from_json(const json& j, const money::Crs* crs = nullptr) {
  check_format(j, "qmoney.world.v1");
  World w;
  w.kind = parse_kind(read_field<std::string>(j, "kind"));
  w.seed = read_field<std::uint64_t>(j, "seed");
  auto reg = registry_from_json(j);
  const auto& vk = read_field<json>(j, "vk");
  const auto& mk = read_field<json>(j, "mk");
  auto pmem = reg->handle<money::MembershipProgram>(obf::handle_from_hex(read_field<std::string>(vk, "pmem")));
  auto prerand = reg->handle<money::RerandProgram>(obf::handle_from_hex(read_field<std::string>(vk, "prerand")));
  auto prf_key = prf_key_from_json(read_field<json>(mk, "prf_key"));

  if (!uses_crs(w.kind)) {
    const auto& pj = read_field<json>(j, "params");
    money::AtKeys k;
    k.params.rpke_preset = read_field<std::string>(pj, "rpke_preset");
    k.params.n_q = read_field<int>(pj, "n_q");
    k.params.tag_bits = read_field<std::size_t>(pj, "tag_bits");
    k.params.ict_bits = read_field<std::size_t>(pj, "ict_bits");
    k.params.validate();
    k.variant = w.kind == SchemeKind::kAt ? money::AtVariant::kStandard : money::AtVariant::kStrawman;
    k.world = reg;
    k.vk = {k.params.rpke(), k.params.n_q, pmem, prerand};
    auto pk = decode(read_field<std::string>(mk, "pk"), [](ByteReader& r) { return codec::get_public_key(r); });
    auto keying = k.variant == money::AtVariant::kStandard ? money::Keying::kSerial : money::Keying::kPlaintext;
    k.mk = {k.params, keying, std::make_shared<const money::MapDeriver>(prf_key, k.params.n_q, 1), std::move(pk)};
    auto sk = decode(read_field<std::string>(read_field<json>(j, "tk"), "sk"),
                     [](ByteReader& r) { return codec::get_secret_key(r); });
    k.tk = {std::move(sk), k.params.tag_bits};
    w.at = std::move(k);
    return w;
  }

  if (!crs) throw InvalidParameters("this world needs its CRS file (--crs)");
  w.crs_digest = read_field<std::string>(j, "crs_digest");
  if (w.crs_digest != io::crs_digest(*crs)) throw InvalidParameters("CRS file does not match the world");
  money::CrsKeys k;
  k.world = reg;
  auto registers = read_field<std::size_t>(j, "registers");
  auto rp = crs->params().rpke();
  auto proof = from_hex(read_field<std::string>(vk, "proof"));
  if (proof.size() != k.vk.proof.size()) throw FormatError("proof has the wrong length");
  k.vk = {rp, crs->params().n_q, registers, pmem, prerand, {}};
  std::copy(proof.begin(), proof.end(), k.vk.proof.begin());
  k.mk = {rp, std::make_shared<const money::MapDeriver>(prf_key, crs->params().n_q, registers), crs->public_key()};
  w.crs_keys = std::move(k);
  return w;
}

// ---------------------------------------------------------------------------
// Banknotes and voting tokens. The sidecar holds "QMST", a spent flag byte,
// a little-endian uint32 register count, then one state dump per register.

inline fs::path sidecar_path(const fs::path& json_path) {
  auto p = json_path;
  p += ".state";
  return p;
}

inline void write_registers(const fs::path& p, std::vector<qsim::Register>& regs) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out.write("QMST", 4);
  out.put(0);
  auto n = static_cast<std::uint32_t>(regs.size());
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>(n >> (8 * i)));
  for (auto& r : regs) qsim::write_state(out, r.release());
  if (!out) throw IoError("cannot write " + p.string());
}

inline std::vector<qsim::Register> read_registers(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  char hdr[9];
  if (!in.read(hdr, 9) || std::string_view(hdr, 4) != "QMST") throw FormatError(p.string() + ": not a state file");
  if (hdr[4] != 0) throw ConsumedRegister();
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(static_cast<unsigned char>(hdr[5 + i])) << (8 * i);
  std::vector<qsim::Register> regs;
  for (std::uint32_t i = 0; i < n; ++i) regs.emplace_back(qsim::read_state(in));
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(p.string() + ": trailing bytes");
  return regs;
}

// Overwrites the sidecar with a spent marker and no amplitudes.
inline void mark_spent(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out.write("QMST\x01\0\0\0\0", 9);
}

struct NoteFile {
  std::string kind;  // "banknote" or "token"
  std::string world;
  rpke::RpkeCiphertext serial;
  std::vector<qsim::Register> registers;
};

inline std::string world_fingerprint(const World& w) {
  ByteWriter bw;
  bw.str(to_string(w.kind)).bytes(w.registry()->world_key());
  auto d = qmoney::detail::sha256(bw.data());
  return to_hex(std::span<const std::uint8_t>(d.data(), 8));
}

inline void save_note(const fs::path& p, const World& w, const rpke::RpkeCiphertext& serial,
                      std::vector<qsim::Register>& regs) {
  json j{{"format", "qmoney.note.v1"},
         {"kind", w.kind == SchemeKind::kVote ? "token" : "banknote"},
         {"world", world_fingerprint(w)},
         {"serial", ciphertext_json(serial)},
         {"registers", regs.size()},
         {"state", sidecar_path(p).filename().string()}};
  write_registers(sidecar_path(p), regs);
  write_json(p, j);
}

inline NoteFile load_note(const fs::path& p, const World& w) {
  auto j = read_json(p);
  check_format(j, "qmoney.note.v1");
  NoteFile n;
  n.kind = read_field<std::string>(j, "kind");
  n.world = read_field<std::string>(j, "world");
  if (n.world != world_fingerprint(w)) throw InvalidParameters("note belongs to a different world");
  n.serial = ciphertext_from_json(read_field<json>(j, "serial"));
  n.registers = read_registers(p.parent_path() / read_field<std::string>(j, "state"));
  if (n.registers.size() != read_field<std::size_t>(j, "registers")) throw FormatError("register count mismatch");
  return n;
}

// ---------------------------------------------------------------------------
// Cast votes: one JSON object per line on the bulletin board.

inline std::string vector_hex(const gf2::BitVector& v) {
  BitString b = BitString::from_uint(v.word(), static_cast<std::size_t>(v.dim()));
  return bits_hex(b);
}

inline json vote_json(const vote::CastVote& v) {
  json vecs = json::array();
  for (const auto& x : v.vectors) vecs.push_back(vector_hex(x));
  return {{"c", bits_hex(v.c)}, {"id", ciphertext_json(v.serial)}, {"vectors", vecs}, {"r", bits_hex(v.r)}};
}

inline vote::CastVote vote_from_json(const json& j, std::size_t lambda_tok, int n_q) {
  vote::CastVote v;
  v.c = bits_from_hex(read_field<std::string>(j, "c"), lambda_tok);
  v.serial = ciphertext_from_json(read_field<json>(j, "id"));
  for (const auto& x : read_field<json>(j, "vectors")) {
    if (!x.is_string()) throw FormatError("vote vector is not a string");
    auto b = bits_from_hex(x.get<std::string>(), static_cast<std::size_t>(n_q));
    v.vectors.emplace_back(n_q, b.to_uint());
  }
  v.r = bits_from_hex(read_field<std::string>(j, "r"), lambda_tok);
  return v;
}

inline void append_vote(const fs::path& board, const vote::CastVote& v) {
  std::ofstream out(board, std::ios::binary | std::ios::app);
  if (!out || !(out << vote_json(v).dump() << "\n")) throw IoError("cannot append to " + board.string());
}

inline std::vector<vote::CastVote> read_board(const fs::path& board, std::size_t lambda_tok, int n_q) {
  std::istringstream in(read_text(board));
  std::vector<vote::CastVote> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(vote_from_json(json::parse(line), lambda_tok, n_q));
    } catch (const json::parse_error&) {
      throw FormatError(board.string() + ": line " + std::to_string(n) + " is not JSON");
    }
  }
  return out;
}

inline json tally_json(const vote::TallyReport& t) {
  json counts = json::object();
  for (const auto& [c, k] : t.counts) counts[bits_hex(c)] = k;
  json rejected = json::array();
  for (const auto& r : t.rejected) rejected.push_back({{"index", r.index}, {"reason", r.reason}});
  return {{"counts", counts}, {"counted", t.counted}, {"rejected", rejected}};
}

// ---------------------------------------------------------------------------
// Experiment results

inline std::string fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline json results_json(const std::vector<games::TrialStats>& stats) {
  json out = json::array();
  for (const auto& s : stats) {
    out.push_back({{"game", s.game},
                   {"scheme", s.scheme},
                   {"adversary", s.adversary},
                   {"trials", s.trials()},
                   {"wins", s.wins()},
                   {"rate", s.rate()},
                   {"ci_low", s.ci_low()},
                   {"ci_high", s.ci_high()},
                   {"seed", s.seed}});
  }
  return out;
}

inline std::string results_csv(const std::vector<games::TrialStats>& stats) {
  std::string out = "game,scheme,adversary,trials,wins,rate,ci_low,ci_high,seed\n";
  for (const auto& s : stats) {
    out += s.game + "," + s.scheme + "," + s.adversary + "," + std::to_string(s.trials()) + "," +
           std::to_string(s.wins()) + "," + fixed6(s.rate()) + "," + fixed6(s.ci_low()) + "," + fixed6(s.ci_high()) +
           "," + std::to_string(s.seed) + "\n";
  }
  return out;
}

inline std::string results_table(const std::vector<games::TrialStats>& stats) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-9s %-26s %7s %7s %8s  %s\n", "game", "scheme", "adversary", "trials",
                "wins", "rate", "95% CI");
  out += line;
  for (const auto& s : stats) {
    std::snprintf(line, sizeof line, "%-18s %-9s %-26s %7zu %7zu %8.4f  [%.4f, %.4f]\n", s.game.c_str(),
                  s.scheme.c_str(), s.adversary.c_str(), s.trials(), s.wins(), s.rate(), s.ci_low(), s.ci_high());
    out += line;
  }
  return out;
}

}  // namespace qmoney::io
