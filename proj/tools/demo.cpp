// End-to-end run of both schemes and the threshold variant, in one process.
#include <iostream>

#include "evote/evote.hpp"
#include "evote/threshold.hpp"

using namespace evote;

int main() {
  Rng rng = make_rng(2024);
  auto gp = GroupParams::create(101);
  auto codec = PlaintextCodec::standard(gp, 2);
  auto ctx = SchemeContext::make(gp, TallyConfig::sum(3, codec.message_set()), codec);

  for (auto variant : {Variant::Weak, Variant::Full}) {
    Scheme scheme(variant, ctx, make_backend(BackendId::Direct));
    auto [pk, sk] = scheme.setup(rng);
    std::vector<BallotSlot> board{scheme.cast(pk, 1, 1, rng), scheme.cast(pk, 2, kBot, rng), Abstained{}};
    auto out = scheme.eval_tally(pk, sk, board);
    bool ok = scheme.verify_tally(pk, board, out.y, out.gamma);
    std::cout << variant_name(variant) << ": votes (1, blank, abstain) -> y = " << tally_to_string(out.y)
              << ", verify_tally " << (ok ? "OK" : "BOT") << "\n";
  }

  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(1009), 3, 2, 4), make_backend(BackendId::Direct));
  auto keys = ts.setup(rng);
  std::vector<AuthorityPublic> auth;
  for (const auto& k : keys) auth.push_back(k.pub);
  std::vector<ThresholdSlot> board;
  for (int j = 1; j <= 3; ++j) board.emplace_back(ts.cast(auth, j, j % 2, rng));
  std::vector<TallyOutcome> outs;
  for (int k = 1; k <= 2; ++k) {
    outs.push_back(ts.eval_tally_authority(k, auth, keys[static_cast<std::size_t>(k - 1)], board));
    std::cout << "authority " << k << ": share sum " << tally_to_string(outs.back().y) << ", verifies "
              << (ts.verify_tally_authority(k, auth, board, outs.back().y, outs.back().gamma) ? "OK" : "BOT") << "\n";
  }
  std::cout << "threshold: votes (1, 0, 1) -> combined y = " << tally_to_string(ts.combine_tallies(outs)) << "\n";
  return 0;
}
