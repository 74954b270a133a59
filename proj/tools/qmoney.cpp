#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qmoney/games.hpp"
#include "qmoney/money_at.hpp"
#include "qmoney/money_ut.hpp"
#include "qmoney/qvote.hpp"
#include "qmoney/serialize.hpp"

using namespace qmoney;
namespace fs = std::filesystem;

namespace {

constexpr int kAccept = 0;
constexpr int kReject = 1;
constexpr int kUsage = 2;

struct Options {
  std::uint64_t seed = 1;
  std::string preset = "default";
  std::string kind = "at";
  std::size_t trials = 0;
  std::string world;
  std::string crs;
  std::string in;
  std::string out;
  std::string game = "all";
  std::string format = "csv";
  std::string tag;
  std::string candidate;
};

RandomStream command_stream(const Options& o, std::string_view cmd) {
  return RandomStream(derive_seed(o.seed, std::string("cmd/") + std::string(cmd)));
}

std::optional<money::Crs> load_crs(const Options& o) {
  if (o.crs.empty()) return std::nullopt;
  return io::crs_from_json(io::read_json(o.crs));
}

io::World load_world(const Options& o, const std::optional<money::Crs>& crs) {
  return io::world_from_json(io::read_json(o.world), crs ? &*crs : nullptr);
}

std::string serial_digest(const rpke::RpkeCiphertext& ct) {
  ByteWriter w;
  codec::put(w, ct);
  auto d = qmoney::detail::sha256(w.data());
  return to_hex(std::span<const std::uint8_t>(d.data(), 8));
}

fs::path out_or_in(const Options& o) { return o.out.empty() ? fs::path(o.in) : fs::path(o.out); }

// Writes the surviving registers and spends the input file when the output
// goes elsewhere.
void store(const Options& o, const io::World& w, const rpke::RpkeCiphertext& serial,
           std::vector<qsim::Register>& regs) {
  auto dest = out_or_in(o);
  io::save_note(dest, w, serial, regs);
  if (fs::absolute(dest) != fs::absolute(o.in)) io::mark_spent(io::sidecar_path(o.in));
}

int cmd_crs(const Options& o) {
  money::UtParams params;
  params.rpke_preset = o.preset;
  auto crs = money::ut_crs_gen(params, derive_seed(o.seed, "crs"));
  io::write_json(o.out, io::crs_json(crs));
  std::cout << "crs " << io::crs_digest(crs).substr(0, 16) << " (" << crs.bits().size() << " bits)\n";
  return kAccept;
}

int cmd_keygen(const Options& o) {
  auto kind = io::parse_kind(o.kind);
  io::World w;
  if (io::uses_crs(kind)) {
    auto crs = load_crs(o);
    if (!crs) throw InvalidParameters("kind '" + o.kind + "' needs a CRS file (--crs)");
    w = io::make_crs_world(kind, *crs, o.seed);
  } else {
    w = io::make_at_world(kind, o.preset, o.seed);
  }
  io::write_json(o.out, io::world_json(w));
  std::cout << "world " << io::world_fingerprint(w) << " kind=" << o.kind << " preset=" << w.preset() << "\n";
  return kAccept;
}

int cmd_mint(const Options& o) {
  auto crs = load_crs(o);
  auto w = load_world(o, crs);
  auto rs = command_stream(o, "mint");
  rpke::RpkeCiphertext serial;
  std::vector<qsim::Register> regs;
  if (w.at) {
    if (o.tag.empty()) throw InvalidParameters("mint needs --tag for this world");
    auto note = money::at_gen_banknote(w.at->mk, io::bits_from_hex(o.tag, w.at->params.tag_bits), rs);
    serial = note.serial;
    regs.push_back(std::move(note.reg));
  } else if (w.kind == io::SchemeKind::kUt) {
    auto note = money::ut_gen_banknote(w.crs_keys->mk, rs);
    serial = note.serial;
    regs.push_back(std::move(note.reg));
  } else {
    auto token = vote::qv_gen_voting_token(w.crs_keys->mk, rs);
    serial = token.serial;
    regs = std::move(token.registers);
  }
  io::save_note(o.out, w, serial, regs);
  std::cout << "minted serial=" << serial_digest(serial) << "\n";
  return kAccept;
}

int cmd_verify(const Options& o) {
  auto crs = load_crs(o);
  auto w = load_world(o, crs);
  auto note = io::load_note(o.in, w);
  auto rs = command_stream(o, "verify");
  bool ok = false;
  std::string reason;
  rpke::RpkeCiphertext serial;
  std::vector<qsim::Register> regs;
  if (w.at) {
    if (note.registers.size() != 1) throw ShapeMismatch("banknote must hold one register");
    auto r = money::at_verify(w.at->vk, {note.serial, std::move(note.registers[0])}, rs);
    ok = r.accepted;
    serial = r.note.serial;
    regs.push_back(std::move(r.note.reg));
  } else {
    if (!crs) throw InvalidParameters("this world needs its CRS file (--crs)");
    if (w.kind == io::SchemeKind::kUt) {
      if (note.registers.size() != 1) throw ShapeMismatch("banknote must hold one register");
      auto r = money::ut_verify(*crs, w.crs_keys->vk, {note.serial, std::move(note.registers[0])}, rs);
      ok = r.accepted;
      reason = money::to_string(r.reason);
      serial = r.note.serial;
      regs.push_back(std::move(r.note.reg));
    } else {
      auto r = vote::qv_verify_voting_token(*crs, w.crs_keys->vk, {note.serial, std::move(note.registers)}, rs);
      ok = r.accepted;
      reason = money::to_string(r.reason);
      serial = r.token.serial;
      regs = std::move(r.token.registers);
    }
  }
  if (!ok) {
    io::mark_spent(io::sidecar_path(o.in));
    std::cout << "reject" << (reason.empty() ? "" : ": " + reason) << "\n";
    return kReject;
  }
  store(o, w, serial, regs);
  std::cout << "accept serial=" << serial_digest(serial) << "\n";
  return kAccept;
}

int cmd_rerand(const Options& o) {
  auto w = load_world(o, std::nullopt);
  if (!w.at) throw InvalidParameters("rerand applies to at and strawman worlds; ut and vote verify rerandomizes");
  auto note = io::load_note(o.in, w);
  if (note.registers.size() != 1) throw ShapeMismatch("banknote must hold one register");
  auto rs = command_stream(o, "rerand");
  try {
    auto out = money::at_rerandomize(w.at->vk, {note.serial, std::move(note.registers[0])}, rs);
    std::vector<qsim::Register> regs;
    regs.push_back(std::move(out.reg));
    store(o, w, out.serial, regs);
    std::cout << "rerandomized serial=" << serial_digest(out.serial) << "\n";
    return kAccept;
  } catch (const RerandomizationRefused& e) {
    std::cout << "reject: " << e.what() << "\n";
    return kReject;
  }
}

int cmd_trace(const Options& o) {
  auto w = load_world(o, std::nullopt);
  if (!w.at) throw InvalidParameters("trace applies to at and strawman worlds");
  auto j = io::read_json(o.in);
  io::check_format(j, "qmoney.note.v1");
  money::Banknote note{io::ciphertext_from_json(io::read_field<io::json>(j, "serial")), {}};
  std::cout << io::bits_hex(money::at_trace(w.at->tk, note)) << "\n";
  return kAccept;
}

int cmd_vote(const Options& o) {
  auto crs = load_crs(o);
  auto w = load_world(o, crs);
  if (w.kind != io::SchemeKind::kVote) throw InvalidParameters("vote needs a vote world");
  auto lt = vote::lambda_tok(w.crs_keys->vk);
  if (o.candidate.empty()) throw InvalidParameters("vote needs --candidate");
  auto c = io::bits_from_hex(o.candidate, lt);
  auto note = io::load_note(o.in, w);
  auto rs = command_stream(o, "vote");
  auto v = vote::qv_vote({note.serial, std::move(note.registers)}, c, rs);
  io::mark_spent(io::sidecar_path(o.in));
  io::append_vote(o.out, v);
  std::cout << "cast c=" << io::bits_hex(v.c) << " r=" << io::bits_hex(v.r) << "\n";
  return kAccept;
}

int cmd_tally(const Options& o) {
  auto crs = load_crs(o);
  auto w = load_world(o, crs);
  if (w.kind != io::SchemeKind::kVote) throw InvalidParameters("tally needs a vote world");
  const auto& vk = w.crs_keys->vk;
  auto votes = io::read_board(o.in, vote::lambda_tok(vk), vk.n_q);
  std::cout << io::tally_json(vote::qv_tally(vk, votes)).dump(2) << "\n";
  return kAccept;
}

int cmd_experiment(const Options& o) {
  std::vector<std::string> names;
  if (o.game == "all") {
    names = games::suite_names();
  } else {
    names.push_back(o.game);
  }
  std::vector<games::TrialStats> stats;
  for (const auto& n : names) {
    auto s = games::run_suite(n, o.trials == 0 ? 200 : o.trials, o.seed);
    stats.insert(stats.end(), s.begin(), s.end());
  }
  std::string body = o.format == "json" ? io::results_json(stats).dump(2) + "\n" : io::results_csv(stats);
  if (!o.out.empty()) io::write_text(o.out, body);
  std::cout << io::results_table(stats);
  return kAccept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rerandomizable quantum money and voting on a dense simulator"};
  app.require_subcommand(1);
  Options o;

  auto seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "64-bit seed")->capture_default_str(); };
  auto preset = [&](CLI::App* c) {
    c->add_option("--preset", o.preset, "parameter preset")
        ->check(CLI::IsMember({"default", "exhaustive"}))
        ->capture_default_str();
  };
  auto world = [&](CLI::App* c) {
    c->add_option("--world", o.world, "world file")->required();
    c->add_option("--crs", o.crs, "CRS file (ut and vote worlds)");
  };

  auto* crs = app.add_subcommand("crs", "Sample a common reference string");
  seed(crs);
  preset(crs);
  crs->add_option("--out", o.out, "CRS file to write")->required();

  auto* keygen = app.add_subcommand("keygen", "Create a world: keys plus sealed oracle records");
  seed(keygen);
  preset(keygen);
  keygen->add_option("--kind", o.kind, "at, strawman, ut or vote")->capture_default_str();
  keygen->add_option("--crs", o.crs, "CRS file (ut and vote)");
  keygen->add_option("--out", o.out, "world file to write")->required();

  auto* mint = app.add_subcommand("mint", "Mint a banknote or voting token");
  seed(mint);
  world(mint);
  mint->add_option("--tag", o.tag, "tag as hex (at and strawman)");
  mint->add_option("--out", o.out, "note file to write")->required();

  auto* verify = app.add_subcommand("verify", "Verify a banknote or voting token");
  seed(verify);
  world(verify);
  verify->add_option("--in", o.in, "note file")->required();
  verify->add_option("--out", o.out, "where to write the verified note (default: in place)");

  auto* rerand = app.add_subcommand("rerand", "Rerandomize a banknote");
  seed(rerand);
  world(rerand);
  rerand->add_option("--in", o.in, "note file")->required();
  rerand->add_option("--out", o.out, "where to write the new note (default: in place)");

  auto* trace = app.add_subcommand("trace", "Print the tag of a banknote");
  world(trace);
  trace->add_option("--in", o.in, "note file")->required();

  auto* vote_cmd = app.add_subcommand("vote", "Cast a vote with a token and append it to a board");
  seed(vote_cmd);
  world(vote_cmd);
  vote_cmd->add_option("--in", o.in, "token file")->required();
  vote_cmd->add_option("--candidate", o.candidate, "candidate as hex")->required();
  vote_cmd->add_option("--out", o.out, "bulletin board file")->required();

  auto* tally = app.add_subcommand("tally", "Count the votes on a board");
  world(tally);
  tally->add_option("--in", o.in, "bulletin board file")->required();

  auto* experiment = app.add_subcommand("experiment", "Run security game suites");
  seed(experiment);
  experiment->add_option("--game", o.game, "suite name or 'all'")->capture_default_str();
  experiment->add_option("--trials", o.trials, "trials per game (default 200)");
  experiment->add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  experiment->add_option("--out", o.out, "results file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*crs) return cmd_crs(o);
    if (*keygen) return cmd_keygen(o);
    if (*mint) return cmd_mint(o);
    if (*verify) return cmd_verify(o);
    if (*rerand) return cmd_rerand(o);
    if (*trace) return cmd_trace(o);
    if (*vote_cmd) return cmd_vote(o);
    if (*tally) return cmd_tally(o);
    if (*experiment) return cmd_experiment(o);
  } catch (const qmoney::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
