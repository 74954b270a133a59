// Three voters, two candidates, one attempt at voting twice with one token.

#include <cstdio>

#include "qmoney/qvote.hpp"

using namespace qmoney;
using namespace qmoney::vote;

int main() {
  auto crs = money::ut_crs_gen(money::UtParams{}, seed_from_u64(1));
  auto keys = qv_setup(crs, seed_from_u64(2));
  RandomStream rs(seed_from_u64(3));

  const BitString alice = BitString::from_uint(0x01, kDefaultLambdaTok);
  const BitString bob = BitString::from_uint(0x02, kDefaultLambdaTok);
  std::vector<CastVote> board;
  for (const auto& choice : {alice, bob, alice}) {
    auto checked = qv_verify_voting_token(crs, keys.vk, qv_gen_voting_token(keys.mk, rs), rs);
    if (!checked.accepted) {
      std::printf("token rejected: %s\n", money::to_string(checked.reason));
      return 1;
    }
    board.push_back(qv_vote(std::move(checked.token), choice, rs));
  }
  // Replaying a ballot repeats its tag.
  board.push_back(board.front());

  auto report = qv_tally(keys.vk, board);
  for (const auto& [c, n] : report.counts) std::printf("candidate %s: %zu\n", c.to_string().c_str(), n);
  for (const auto& r : report.rejected) std::printf("ballot %zu rejected: %s\n", r.index, r.reason.c_str());
  return 0;
}
