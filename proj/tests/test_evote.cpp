#include <gtest/gtest.h>

#include "evote/harness.hpp"

using namespace evote;

namespace {

SchemeContext ctx_for(std::uint64_t p, int n) {
  auto gp = GroupParams::create(p);
  return SchemeContext::make(gp, TallyConfig::sum(n, 2), PlaintextCodec::standard(gp, 2));
}

Scheme make(Variant v, std::uint64_t p = 11, int n = 3, BackendId id = BackendId::Direct) {
  return Scheme(v, ctx_for(p, n), make_backend(id));
}

std::array<EncCoins, 3> coins(Rng& rng, std::uint64_t p) {
  std::array<EncCoins, 3> c;
  for (auto& e : c) e = EncCoins::sample(rng, p);
  return c;
}

}  // namespace

TEST(Setup, Shapes) {
  Rng rng = make_rng(1);
  auto weak = make(Variant::Weak), full = make(Variant::Full);
  auto [wpk, wsk] = weak.setup(rng);
  EXPECT_FALSE(wpk.z.has_value());
  EXPECT_FALSE(wsk.r.has_value());
  auto [fpk, fsk] = full.setup(rng);
  ASSERT_TRUE(fpk.z && fsk.r);
  EXPECT_EQ(fsk.r->value, 1u);
  EXPECT_TRUE(verify_opening(full.ctx().ck, *fpk.z, *fsk.r));
  EXPECT_EQ(fsk.sk1, pke_setup(full.ctx().gp, fsk.s1).sk);
  EXPECT_EQ(fsk.sk2, pke_setup(full.ctx().gp, fsk.s2).sk);
  EXPECT_EQ(fsk.sk1.pk, fpk.pks[0]);
  EXPECT_EQ(fsk.sk2.pk, fpk.pks[1]);
}

TEST(Setup, DeterministicUnderSeed) {
  auto full = make(Variant::Full);
  Rng a = make_rng(42), b = make_rng(42);
  auto ka = full.setup_extended(a), kb = full.setup_extended(b);
  EXPECT_EQ(ka.pk, kb.pk);
  EXPECT_EQ(ka.sk, kb.sk);
}

TEST(Cast, FullBallotsVerify) {
  Rng rng = make_rng(2);
  auto full = make(Variant::Full);
  auto [pk, sk] = full.setup(rng);
  for (MaybeVote v : {MaybeVote{0}, MaybeVote{1}, MaybeVote{kBot}}) {
    auto b = full.cast(pk, 2, v, rng);
    EXPECT_TRUE(full.verify_ballot(pk, 2, b));
    // j enters the statement only as a range check, so the proof transplants
    EXPECT_TRUE(full.verify_ballot(pk, 1, b));
  }
  EXPECT_THROW(full.cast(pk, 1, 2, rng), UsageError);
  EXPECT_THROW(full.cast(pk, 4, 1, rng), UsageError);
  EXPECT_THROW(make(Variant::Weak).cast(pk, 0, 1, rng), UsageError);
}

TEST(Cast, BruteForceDecryptionRecoversVote) {
  Rng rng = make_rng(3);
  auto full = make(Variant::Full);
  auto [pk, sk] = full.setup(rng);
  const auto& codec = full.ctx().codec;
  for (MaybeVote v : {MaybeVote{0}, MaybeVote{1}, MaybeVote{kBot}}) {
    auto b = full.cast(pk, 1, v, rng);
    for (std::size_t l = 0; l < 3; ++l) {
      auto keys = unique_sk_oracle(pk.pks[l]);
      ASSERT_EQ(keys.size(), 1u);
      auto dec = codec.decode(pke_decrypt(keys[0], b.cts[l]));
      EXPECT_EQ(dec.as_tally_input(), v);
      EXPECT_NE(dec.kind, DecodeKind::NotInMessageSpace);
    }
  }
}

TEST(VerifyBallot, WeakAcceptsAnything) {
  Rng rng = make_rng(4);
  auto weak = make(Variant::Weak);
  auto [pk, sk] = weak.setup(rng);
  EXPECT_TRUE(weak.verify_ballot(pk, 1, Unparsed{"garbage"}));
  EXPECT_TRUE(weak.verify_ballot(pk, 1, detail::garbage_slot(weak, pk, 1, 1, rng)));
  EXPECT_FALSE(weak.verify_ballot(pk, 1, Abstained{}));
  EXPECT_FALSE(weak.verify_ballot(pk, 1, Invalidated{}));
}

TEST(VerifyBallot, FullRejectsGarbage) {
  Rng rng = make_rng(5);
  auto full = make(Variant::Full);
  auto [pk, sk] = full.setup(rng);
  for (int kind = 0; kind < 3; ++kind) EXPECT_FALSE(full.verify_ballot(pk, 1, detail::garbage_slot(full, pk, 1, kind, rng)));
  auto b = full.cast(pk, 1, 1, rng);
  b.pi.reset();
  EXPECT_FALSE(full.verify_ballot(pk, 1, b));
  auto other = full.cast(pk, 1, 0, rng);
  auto stolen = full.cast(pk, 1, 1, rng);
  stolen.pi = other.pi;
  EXPECT_FALSE(full.verify_ballot(pk, 1, stolen));
}

// Columns (0,0,1) under a binding Z: no witness in the whole space yields an
// accepted proof, with either backend.
TEST(VerifyBallot, MixedColumnsUnprovableUnderBindingZ) {
  Rng rng = make_rng(6);
  const std::uint64_t p = 5;
  auto full = make(Variant::Full, p, 2);
  auto keys = full.setup_extended(rng, 1);
  const auto& codec = full.ctx().codec;
  Ballot b;
  auto c = coins(rng, p);
  for (std::size_t l = 0; l < 3; ++l) b.cts[l] = pke_encrypt(keys.pk.pks[l], codec.encode(l == 2 ? 1 : 0), c[l]);
  auto target = enc_target(full.ctx(), full.enc_statement(keys.pk, 1, b.cts));
  EscrowBackend escrow;
  std::size_t tried = 0;
  auto attempt = [&](const EncWitness& w) {
    ++tried;
    b.pi = Proof{BackendId::Direct, w.encode()};
    ASSERT_FALSE(full.verify_ballot(keys.pk, 1, b));
    ASSERT_THROW(escrow.prove(target, w.encode()), WitnessError);
  };
  for (MaybeVote m : {MaybeVote{kBot}, MaybeVote{0}, MaybeVote{1}}) {
    std::array<Scalar, 6> k{};
    for (;;) {
      attempt(EncWitness{EncReal{m, {EncCoins{k[0], k[1]}, EncCoins{k[2], k[3]}, EncCoins{k[4], k[5]}}}});
      std::size_t i = 0;
      while (i < k.size() && ++k[i] == p) k[i++] = 0;
      if (i == k.size()) break;
    }
  }
  for (Scalar v = 0; v < p; ++v)
    for (Scalar r1 = 0; r1 < p; ++r1)
      for (Scalar r2 = 0; r2 < p; ++r2) attempt(EncWitness{EncTrapdoor{{v, r1, r2}}});
  EXPECT_EQ(tried, 3 * 15625u + 125u);
  EXPECT_FALSE(escrow.verify(target, Proof{BackendId::Escrow, EscrowBackend::token(target)}));
}

TEST(EvalTallyWeak, Examples) {
  Rng rng = make_rng(7);
  auto weak = make(Variant::Weak);
  auto keys = weak.setup_extended(rng);
  const auto& pk = keys.pk;
  std::vector<BallotSlot> board{weak.cast(pk, 1, 1, rng), weak.cast(pk, 2, 0, rng), weak.cast(pk, 3, 1, rng)};
  auto out = weak.eval_tally(pk, keys.sk, board);
  EXPECT_EQ(out.y, 2);
  EXPECT_TRUE(weak.verify_tally(pk, board, out.y, out.gamma));
  EXPECT_FALSE(weak.verify_tally(pk, board, 1, out.gamma));

  std::vector<BallotSlot> empty(3, Abstained{});
  auto none = weak.eval_tally(pk, keys.sk, empty);
  EXPECT_EQ(none.y, kBot);
  ASSERT_TRUE(none.gamma.has_value());
  EXPECT_TRUE(weak.verify_tally(pk, empty, none.y, none.gamma));
  EXPECT_FALSE(weak.verify_tally(pk, empty, kBot, std::nullopt));

  // a raw triple whose first two columns disagree forces y = ⊥
  auto mixed = weak.cast_columns(pk, 1, {1, 0, 0}, coins(rng, 11), std::nullopt);
  std::vector<BallotSlot> odd{mixed, weak.cast(pk, 2, 1, rng), Abstained{}};
  auto o = weak.eval_tally(pk, keys.sk, odd);
  EXPECT_EQ(o.y, kBot);
  EXPECT_FALSE(o.anomaly);
  EXPECT_TRUE(weak.verify_tally(pk, odd, o.y, o.gamma));
}

TEST(EvalTallyFull, Examples) {
  Rng rng = make_rng(8);
  auto full = make(Variant::Full);
  auto [pk, sk] = full.setup(rng);
  std::vector<BallotSlot> board{full.cast(pk, 1, 1, rng), detail::garbage_slot(full, pk, 2, 2, rng),
                                full.cast(pk, 3, 1, rng)};
  auto out = full.eval_tally(pk, sk, board);
  EXPECT_EQ(out.y, 2);
  EXPECT_TRUE(full.verify_tally(pk, board, out.y, out.gamma));

  std::vector<BallotSlot> empty(3, Abstained{});
  auto none = full.eval_tally(pk, sk, empty);
  EXPECT_EQ(none.y, kBot);
  EXPECT_FALSE(none.gamma.has_value());
  EXPECT_TRUE(full.verify_tally(pk, empty, kBot, std::nullopt));
  EXPECT_FALSE(full.verify_tally(pk, empty, 0, std::nullopt));

  std::vector<BallotSlot> blank{full.cast(pk, 1, 1, rng), full.cast(pk, 2, 1, rng), full.cast(pk, 3, kBot, rng)};
  auto b = full.eval_tally(pk, sk, blank);
  EXPECT_EQ(b.y, 2);
  EXPECT_TRUE(full.verify_tally(pk, blank, b.y, b.gamma));
}

TEST(EvalTallyFull, BottomClaimRejectedWithValidBallot) {
  Rng rng = make_rng(9);
  auto full = make(Variant::Full);
  auto keys = full.setup_extended(rng);
  std::vector<BallotSlot> board{full.cast(keys.pk, 1, 0, rng), Abstained{}, Abstained{}};
  EXPECT_FALSE(full.verify_tally(keys.pk, board, kBot, std::nullopt));
  auto out = full.eval_tally(keys.pk, keys.sk, board);
  EXPECT_EQ(out.y, 0);
  EXPECT_FALSE(full.verify_tally(keys.pk, board, kBot, out.gamma));
  DecWitness w{keys.ext.sks[0], keys.ext.sks[1], keys.ext.seeds[0], keys.ext.seeds[1], 1, 2};
  EXPECT_THROW(full.proofs().prove(dec_target(full.ctx(), DecStatement{full.effective_entries(keys.pk, board),
                                                                        keys.pk.pks, kBot},
                                              kRelDecBlank),
                                   w.encode()),
               WitnessError);
}

TEST(EvalTallyFull, AllBlankBoard) {
  Rng rng = make_rng(10);
  auto full = make(Variant::Full);
  auto [pk, sk] = full.setup(rng);
  std::vector<BallotSlot> board{full.cast(pk, 1, kBot, rng), Abstained{}, full.cast(pk, 3, kBot, rng)};
  auto out = full.eval_tally(pk, sk, board);
  EXPECT_EQ(out.y, kBot);
  ASSERT_TRUE(out.gamma.has_value());
  EXPECT_TRUE(full.verify_tally(pk, board, kBot, out.gamma));
  EXPECT_FALSE(full.verify_tally(pk, board, kBot, std::nullopt));
  EXPECT_FALSE(full.verify_tally(pk, board, 0, out.gamma));
}

TEST(WitnessIndices, HonestBoardsAgree) {
  Rng rng = make_rng(11);
  for (auto id : {BackendId::Direct, BackendId::Escrow}) {
    auto full = make(Variant::Full, 11, 3, id);
    auto keys = full.setup_extended(rng);
    std::vector<BallotSlot> board{full.cast(keys.pk, 1, 1, rng), full.cast(keys.pk, 2, kBot, rng),
                                  full.cast(keys.pk, 3, 1, rng)};
    std::optional<Proof> first;
    for (auto [i1, i2] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}, std::pair{3, 1}}) {
      auto out = full.eval_tally_with_witness_indices(keys.pk, keys.ext, board, i1, i2);
      EXPECT_EQ(out.y, 2);
      EXPECT_TRUE(full.verify_tally(keys.pk, board, out.y, out.gamma));
      if (!first) first = out.gamma;
      if (id == BackendId::Escrow) {
        EXPECT_EQ(out.gamma, first);
      }
    }
    EXPECT_THROW(full.eval_tally_with_witness_indices(keys.pk, keys.ext, board, 2, 2), UsageError);
    EXPECT_THROW(full.eval_tally(keys.pk, keys.sk, {board[0]}), UsageError);
  }
}

TEST(WitnessIndices, RiggedZLetsColumnsDiverge) {
  Rng rng = make_rng(12);
  auto full = make(Variant::Full);
  auto keys = full.setup_extended(rng, 0);
  auto mixed = full.cast_columns(keys.pk, 1, {1, 1, 0}, coins(rng, 11), keys.ext.z_opening);
  ASSERT_TRUE(full.verify_ballot(keys.pk, 1, mixed));
  std::vector<BallotSlot> board{mixed, full.cast(keys.pk, 2, 1, rng), Abstained{}};
  auto a = full.eval_tally_with_witness_indices(keys.pk, keys.ext, board, 1, 2);
  EXPECT_EQ(a.y, 2);
  EXPECT_TRUE(full.verify_tally(keys.pk, board, a.y, a.gamma));
  auto b = full.eval_tally_with_witness_indices(keys.pk, keys.ext, board, 2, 3);
  EXPECT_EQ(b.y, kBot);
  EXPECT_TRUE(b.anomaly);
  auto c = full.eval_tally_with_witness_indices(keys.pk, keys.ext, board, 1, 3);
  EXPECT_TRUE(c.anomaly);
}

TEST(Totality, HonestAuthorityNeverReturnsBottomOnLiveBoards) {
  Rng rng = make_rng(13);
  auto full = make(Variant::Full);
  auto [pk, sk] = full.setup(rng);
  for (int i = 0; i < 500; ++i) {
    auto board = random_board(full, pk, rng);
    auto entries = full.effective_entries(pk, board);
    bool all_bottom = std::all_of(entries.begin(), entries.end(), is_bottom);
    auto out = full.eval_tally(pk, sk, board);
    EXPECT_FALSE(out.anomaly);
    bool all_blank = true;
    for (const auto& e : entries)
      if (const auto* t = std::get_if<CtTriple>(&e))
        all_blank = all_blank && !full.ctx().codec.decode(pke_decrypt(sk.sk1, (*t)[0])).as_tally_input();
    EXPECT_EQ(!out.y.has_value(), all_bottom || all_blank);
    EXPECT_TRUE(full.verify_tally(pk, board, out.y, out.gamma));
  }
}

TEST(Correctness, SmallExhaustive) {
  Rng rng = make_rng(14);
  for (auto v : {Variant::Weak, Variant::Full}) {
    auto rep = correctness_suite(make(v, 11, 2), rng);
    EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures.front());
    EXPECT_EQ(rep.vectors, 16u);
  }
}
