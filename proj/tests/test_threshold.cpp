#include <gtest/gtest.h>

#include <numeric>

#include "evote/threshold.hpp"

using namespace evote;

namespace {

std::vector<AuthorityPublic> publics(const std::vector<AuthorityKey>& keys) {
  std::vector<AuthorityPublic> out;
  for (const auto& k : keys) out.push_back(k.pub);
  return out;
}

// Interpolates the shares at x = 1..m and evaluates at 0 with exact fractions.
std::int64_t lagrange_at_zero(const std::vector<std::int64_t>& shares) {
  const auto m = static_cast<std::int64_t>(shares.size());
  std::int64_t num = 0, den = 1;
  for (std::int64_t k = 1; k <= m; ++k) {
    std::int64_t a = 1, b = 1;
    for (std::int64_t i = 1; i <= m; ++i)
      if (i != k) {
        a *= i;
        b *= i - k;
      }
    // num/den += shares[k-1] * a/b
    num = num * b + shares[static_cast<std::size_t>(k - 1)] * a * den;
    den *= b;
    auto g = std::gcd(num, den);
    if (g) {
      num /= g;
      den /= g;
    }
  }
  EXPECT_EQ(num % den, 0);
  return num / den;
}

}  // namespace

TEST(Threshold, ParameterChecks) {
  EXPECT_THROW(ThresholdParams::create(GroupParams::create(1009), 3, 1, 4), ParameterError);
  EXPECT_THROW(ThresholdParams::create(GroupParams::create(1009), 3, 2, 0), ParameterError);
  // p must exceed 2 N p' + 2
  EXPECT_THROW(ThresholdParams::create(GroupParams::create(17), 2, 2, 4), ParameterError);
  EXPECT_NO_THROW(ThresholdParams::create(GroupParams::create(19), 2, 2, 4));
  auto tp = ThresholdParams::create(GroupParams::create(1009), 3, 3, 4);
  EXPECT_EQ(tp.weights(), (std::vector<std::int64_t>{3, -3, 1}));
  EXPECT_EQ(tp.bound(1), 1 + 4 * (1 + 1));
  EXPECT_EQ(tp.bound(3), 1 + 4 * (3 + 9));
}

TEST(Threshold, SplitExamples) {
  Rng rng = make_rng(1);
  auto tp2 = ThresholdParams::create(GroupParams::create(101), 3, 2, 4);
  for (int i = 0; i < 50; ++i) {
    for (std::int64_t v : {0, 1}) {
      auto s = split_vote(tp2, v, rng);
      ASSERT_EQ(s.size(), 2u);
      EXPECT_EQ(s[0] + s[1], v);
    }
  }
  auto tp3 = ThresholdParams::create(GroupParams::create(1009), 3, 3, 4);
  for (int i = 0; i < 50; ++i)
    for (std::int64_t v : {0, 1}) {
      auto s = split_vote(tp3, v, rng);
      EXPECT_EQ(lagrange_at_zero(s), v);
      EXPECT_EQ(tp3.reconstruct(s), v);
    }
  EXPECT_THROW(split_vote(tp2, 2, rng), UsageError);
}

TEST(Threshold, ReconstructionExhaustive) {
  for (int m : {2, 3})
    for (std::int64_t pp = 1; pp <= 4; ++pp) {
      auto tp = ThresholdParams::create(GroupParams::create(1009), 3, m, pp);
      for (std::int64_t v : {0, 1})
        for (const auto& coins : tp.coin_space(v)) {
          auto s = tp.split_with(v, coins);
          ASSERT_EQ(tp.reconstruct(s), v);
          for (int k = 1; k <= m; ++k) {
            ASSERT_LE(std::abs(s[static_cast<std::size_t>(k - 1)]), tp.bound(k));
          }
        }
    }
}

TEST(Threshold, ShareMarginalCoverage) {
  for (std::int64_t pp = 1; pp <= 4; ++pp) {
    auto tp = ThresholdParams::create(GroupParams::create(101), 3, 2, pp);
    std::array<std::array<std::set<std::int64_t>, 2>, 2> seen;  // [v][share index]
    for (std::int64_t v : {0, 1})
      for (const auto& coins : tp.coin_space(v)) {
        auto s = tp.split_with(v, coins);
        for (std::size_t k = 0; k < 2; ++k) seen[static_cast<std::size_t>(v)][k].insert(s[k]);
      }
    for (std::size_t k = 0; k < 2; ++k)
      for (std::int64_t x = -pp; x <= pp; ++x) {
        bool under0 = seen[0][k].count(x), under1 = seen[1][k].count(x);
        EXPECT_TRUE(under0);
        if (x == -pp)
          EXPECT_FALSE(under1) << "boundary share reachable under v=1";
        else
          EXPECT_TRUE(under1);
      }
  }
}

TEST(Threshold, TwoAuthorityElection) {
  Rng rng = make_rng(2);
  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(101), 3, 2, 4), make_backend(BackendId::Direct));
  auto keys = ts.setup(rng);
  auto auth = publics(keys);
  std::vector<ThresholdSlot> board;
  for (std::int64_t v : {1, 0, 1}) board.emplace_back(ts.cast(auth, static_cast<int>(board.size() + 1), v, rng));
  for (int j = 1; j <= 3; ++j) EXPECT_TRUE(ts.verify_ballot(auth, j, board[static_cast<std::size_t>(j - 1)]));

  std::vector<TallyOutcome> outs;
  std::int64_t share_sum = 0;
  for (int k = 1; k <= 2; ++k) {
    outs.push_back(ts.eval_tally_authority(k, auth, keys[static_cast<std::size_t>(k - 1)], board));
    ASSERT_TRUE(outs.back().y.has_value());
    share_sum += *outs.back().y;
    EXPECT_TRUE(ts.verify_tally_authority(k, auth, board, outs.back().y, outs.back().gamma));
    EXPECT_FALSE(ts.verify_tally_authority(k, auth, board, *outs.back().y + 1, outs.back().gamma));
  }
  EXPECT_EQ(share_sum, 2);
  EXPECT_EQ(ts.combine_tallies(outs), 2);
  EXPECT_EQ(ts.combine_tallies({outs[0]}), kBot);
}

TEST(Threshold, AllAbstainIsBottom) {
  Rng rng = make_rng(3);
  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(101), 3, 2, 4), make_backend(BackendId::Direct));
  auto keys = ts.setup(rng);
  auto auth = publics(keys);
  std::vector<ThresholdSlot> board(3, Abstained{});
  std::vector<TallyOutcome> outs;
  for (int k = 1; k <= 2; ++k) {
    outs.push_back(ts.eval_tally_authority(k, auth, keys[static_cast<std::size_t>(k - 1)], board));
    EXPECT_EQ(outs.back().y, kBot);
    EXPECT_TRUE(ts.verify_tally_authority(k, auth, board, kBot, std::nullopt));
  }
  EXPECT_EQ(ts.combine_tallies(outs), kBot);
}

TEST(Threshold, DecryptedSharesReconstruct) {
  Rng rng = make_rng(4);
  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(23), 2, 2, 4), make_backend(BackendId::Direct));
  auto keys = ts.setup(rng);
  auto auth = publics(keys);
  const auto& tp = ts.params();
  for (int i = 0; i < 10; ++i)
    for (std::int64_t v : {0, 1}) {
      auto b = ts.cast(auth, 1, v, rng);
      std::vector<std::int64_t> shares;
      for (int k = 1; k <= 2; ++k) {
        auto sks = unique_sk_oracle(auth[static_cast<std::size_t>(k - 1)].pk.pks[0]);
        ASSERT_EQ(sks.size(), 1u);
        auto dec = tp.authority_ctx(k).codec.decode(pke_decrypt(sks[0], b.parts[static_cast<std::size_t>(k - 1)].cts[0]));
        ASSERT_EQ(dec.kind, DecodeKind::Vote);
        shares.push_back(dec.vote);
      }
      EXPECT_EQ(tp.reconstruct(shares), v);
    }
}

TEST(Threshold, EncRelationExamples) {
  Rng rng = make_rng(5);
  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(101), 3, 2, 4), make_backend(BackendId::Direct));
  const auto& tp = ts.params();
  auto keys = ts.setup(rng);
  auto auth = publics(keys);

  // shares (v1, 1 - v1) through the real branch
  auto b = ts.cast_shares(auth, 2, {3, -2}, rng);
  EXPECT_TRUE(ts.verify_ballot(auth, 2, b));

  // shares summing to 2 have no real witness
  EXPECT_THROW(ts.cast_shares(auth, 2, {3, -1}, rng), WitnessError);
  std::vector<std::array<EncCoins, 3>> coins(2);
  ThresholdEncStatement x;
  x.j = 2;
  for (int k = 1; k <= 2; ++k) {
    for (auto& c : coins[static_cast<std::size_t>(k - 1)]) c = EncCoins::sample(rng, 101);
    std::int64_t s = k == 1 ? 3 : -1;
    x.cts.push_back(ts.authority_scheme(k)
                        .cast_columns(auth[static_cast<std::size_t>(k - 1)].pk, 2, {s, s, s},
                                      coins[static_cast<std::size_t>(k - 1)], std::nullopt)
                        .cts);
    x.pks.push_back(auth[static_cast<std::size_t>(k - 1)].pk.pks);
    x.com.push_back(auth[static_cast<std::size_t>(k - 1)].com);
  }
  EXPECT_FALSE(check_threshold_enc(tp, x, ThresholdEncWitness{ThresholdEncReal{{3, -1}, coins}}));
  // a share outside S^k fails even when the sum is a vote
  EXPECT_FALSE(check_threshold_enc(tp, x, ThresholdEncWitness{ThresholdEncReal{{5, -4}, coins}}));

  // a tampered part breaks the combined proof
  auto t = std::get<ThresholdBallot>(ThresholdSlot{b});
  t.parts[1] = ts.authority_scheme(2).cast(auth[1].pk, 2, -1, rng);
  EXPECT_FALSE(ts.verify_ballot(auth, 2, t));
}

TEST(Threshold, EncTrapdoorBranchWithCommittedBoard) {
  Rng rng = make_rng(6);
  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(101), 2, 2, 4), make_backend(BackendId::Direct));
  const auto& tp = ts.params();
  auto keys = ts.setup(rng);
  auto auth = publics(keys);
  // a ballot whose shares do not reconstruct to a vote, cast part by part
  ThresholdBallot b;
  for (int k = 1; k <= 2; ++k) b.parts.push_back(ts.authority_scheme(k).cast(auth[static_cast<std::size_t>(k - 1)].pk, 1, 4, rng));
  std::vector<CtTriple> cts{b.parts[0].cts, b.parts[1].cts};
  auto flat = flatten_ballot(cts);
  // each authority's com commits to that ballot at slot 1 and zeros elsewhere
  const auto ck = CommitKey::derive(tp.gp());
  std::vector<Scalar> values(flat);
  values.resize(static_cast<std::size_t>(tp.n()) * tp.flat_len(), 0);
  ThresholdEncWitness w{ThresholdEncTrapdoor{}};
  auto& openings = std::get<ThresholdEncTrapdoor>(w.branch).openings;
  for (auto& a : auth) {
    auto t = commit_tuple(ck, values, rng);
    a.com = t.commitments;
    openings.emplace_back(t.openings.begin(), t.openings.begin() + static_cast<std::ptrdiff_t>(tp.flat_len()));
  }
  auto x = ts.enc_statement(auth, 1, b);
  EXPECT_TRUE(check_threshold_enc(tp, x, w));
  auto other = x;
  other.j = 2;
  EXPECT_FALSE(check_threshold_enc(tp, other, w));
  b.pi = ts.proofs().prove(threshold_enc_target(tp, x), w.encode());
  EXPECT_TRUE(ts.verify_ballot(auth, 1, b));
  // honest commitments to zero leave no trapdoor
  EXPECT_FALSE(check_threshold_enc(tp, ts.enc_statement(publics(keys), 1, b), w));
}

TEST(Threshold, DecRelationBranches) {
  Rng rng = make_rng(7);
  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(101), 2, 2, 4), make_backend(BackendId::Direct));
  const auto& tp = ts.params();
  auto keys = ts.setup(rng);
  auto auth = publics(keys);
  std::vector<ThresholdSlot> board{ts.cast(auth, 1, 1, rng), Abstained{}};
  auto eff = ts.effective_board(auth, board);
  auto out = ts.eval_tally_authority(1, auth, keys[0], board);
  ThresholdDecStatement x{1, eff, auth[0].pk.pks, auth[0].com, out.y};
  ThresholdDecWitness real{DecWitness{keys[0].ext.sks[0], keys[0].ext.sks[1], keys[0].ext.seeds[0], keys[0].ext.seeds[1], 1, 2},
                           keys[0].com_openings};
  EXPECT_TRUE(check_threshold_dec(tp, x, real));
  auto wrong = x;
  wrong.y = *out.y + 1;
  EXPECT_FALSE(check_threshold_dec(tp, wrong, real));

  // trapdoor: com_1 commits to the flattened board
  std::vector<Scalar> flat;
  for (const auto& e : eff) {
    auto f = e ? flatten_ballot(*e) : std::vector<Scalar>(tp.flat_len(), 0);
    flat.insert(flat.end(), f.begin(), f.end());
  }
  auto t = commit_tuple(CommitKey::derive(tp.gp()), flat, rng);
  auto rigged = wrong;
  rigged.com = t.commitments;
  EXPECT_TRUE(check_threshold_dec(tp, rigged, ThresholdDecWitness{std::nullopt, t.openings}));
  EXPECT_FALSE(check_threshold_dec(tp, wrong, ThresholdDecWitness{std::nullopt, keys[0].com_openings}));
}

TEST(Threshold, ThreeAuthoritiesMatchSingleAuthority) {
  Rng rng = make_rng(8);
  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(1009), 3, 3, 4), make_backend(BackendId::Direct));
  auto gp = GroupParams::create(101);
  auto codec = PlaintextCodec::standard(gp, 2);
  Scheme single(Variant::Full, SchemeContext::make(gp, TallyConfig::sum(3, 2), codec), make_backend(BackendId::Direct));
  auto keys = ts.setup(rng);
  auto auth = publics(keys);
  auto [pk, sk] = single.setup(rng);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<ThresholdSlot> board;
    std::vector<BallotSlot> plain;
    for (int j = 1; j <= 3; ++j) {
      auto r = uniform_below(rng, 3);
      if (r == 2) {
        board.emplace_back(Abstained{});
        plain.emplace_back(Abstained{});
      } else {
        board.emplace_back(ts.cast(auth, j, static_cast<std::int64_t>(r), rng));
        plain.emplace_back(single.cast(pk, j, static_cast<std::int64_t>(r), rng));
      }
    }
    std::vector<TallyOutcome> outs;
    for (int k = 1; k <= 3; ++k) {
      outs.push_back(ts.eval_tally_authority(k, auth, keys[static_cast<std::size_t>(k - 1)], board));
      EXPECT_TRUE(ts.verify_tally_authority(k, auth, board, outs.back().y, outs.back().gamma));
    }
    EXPECT_EQ(ts.combine_tallies(outs), single.eval_tally(pk, sk, plain).y);
  }
}

TEST(Threshold, InvalidBallotFilteredByEveryAuthority) {
  Rng rng = make_rng(9);
  ThresholdScheme ts(ThresholdParams::create(GroupParams::create(101), 3, 2, 4), make_backend(BackendId::Escrow));
  auto keys = ts.setup(rng);
  auto auth = publics(keys);
  auto bad = ts.cast(auth, 2, 1, rng);
  bad.pi.reset();
  std::vector<ThresholdSlot> board{ts.cast(auth, 1, 1, rng), bad, Unparsed{"junk"}};
  EXPECT_FALSE(ts.verify_ballot(auth, 2, board[1]));
  std::vector<TallyOutcome> outs;
  for (int k = 1; k <= 2; ++k) {
    outs.push_back(ts.eval_tally_authority(k, auth, keys[static_cast<std::size_t>(k - 1)], board));
    EXPECT_TRUE(ts.verify_tally_authority(k, auth, board, outs.back().y, outs.back().gamma));
  }
  EXPECT_EQ(ts.combine_tallies(outs), 1);
}
