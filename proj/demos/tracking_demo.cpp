// A bank that wants to follow a note around remembers its serial at mint
// time. Later it sees a note and runs the dual-basis check under the old
// serial. Against the strawman the note is recognized every time; against
// money_at the rerandomized note looks like any other.

#include <cstdio>
#include <cstdlib>
#include <span>

#include "qmoney/money_at.hpp"

using namespace qmoney;
using namespace qmoney::money;

namespace {

double recognition_rate(AtVariant variant, int trials, std::uint64_t seed) {
  auto keys = at_setup(AtParams{}, derive_seed(seed, "setup"), variant);
  RandomStream rs(derive_seed(seed, "demo"));
  int recognized = 0;
  for (int i = 0; i < trials; ++i) {
    auto note = at_gen_banknote(keys.mk, rs.next_bits(keys.params.tag_bits), rs);
    auto remembered = note.serial;
    note = at_rerandomize(keys.vk, std::move(note), rs);
    if (dual_basis_check(keys.vk.pmem, remembered, std::span(&note.reg, 1), rs)) ++recognized;
  }
  return static_cast<double>(recognized) / trials;
}

}  // namespace

int main(int argc, char** argv) {
  int trials = argc > 1 ? std::atoi(argv[1]) : 200;
  std::printf("notes rerandomized, then checked against the serial they were minted with (%d trials)\n", trials);
  std::printf("  strawman : recognized %.3f\n", recognition_rate(AtVariant::kStrawman, trials, 1));
  std::printf("  money_at : recognized %.3f\n", recognition_rate(AtVariant::kStandard, trials, 1));
  return 0;
}
