#include <gtest/gtest.h>

#include "evote/pke.hpp"

using namespace evote;

namespace {
// Finds a seed whose expansion is exactly km by scanning the seed classes.
KeyRandomness seed_for(const GroupParams& gp, KeyMaterial km) { return seed_classes(gp).at(km); }

// log_h(target) by brute force.
std::optional<Scalar> dlog(const GroupElement& h, const GroupElement& target) {
  for (Scalar k = 0; k < h.p(); ++k)
    if (g_exp(h, k) == target) return k;
  return std::nullopt;
}
}  // namespace

TEST(Pke, SetupIsDeterministic) {
  auto gp = GroupParams::create(101);
  Rng rng = make_rng(7);
  for (int i = 0; i < 20; ++i) {
    auto s = KeyRandomness::sample(rng);
    EXPECT_EQ(pke_setup(gp, s).sk, pke_setup(gp, s).sk);
  }
}

TEST(Pke, UnitKeyMaterialGivesEqualGenerators) {
  auto gp = GroupParams::create(11);
  auto kp = pke_setup(gp, seed_for(gp, {4, 1, 1}));
  EXPECT_EQ(kp.pk.g1, kp.pk.g3);
  EXPECT_EQ(kp.pk.g2, kp.pk.g3);
}

TEST(Pke, WorkedKeyExample) {
  auto gp = GroupParams::create(11);
  auto kp = pke_setup(gp, seed_for(gp, {2, 3, 5}));
  EXPECT_EQ(kp.pk.g3.exp(), 2u);
  EXPECT_EQ(kp.pk.g1.exp(), 8u);
  EXPECT_EQ(kp.pk.g2.exp(), 7u);
  // brute-force dlog confirms g1^x = g3, g2^y = g3
  EXPECT_EQ(dlog(kp.pk.g1, kp.pk.g3), Scalar{3});
  EXPECT_EQ(dlog(kp.pk.g2, kp.pk.g3), Scalar{5});
}

TEST(Pke, WorkedEncryptionExample) {
  auto gp = GroupParams::create(11);
  auto kp = pke_keygen_from(gp, {2, 3, 5});
  GroupElement m{gp, 4};
  auto ct = pke_encrypt(kp.pk, m, 2, 3);
  EXPECT_EQ(ct.c1.exp(), 5u);
  EXPECT_EQ(ct.c2.exp(), 10u);
  EXPECT_EQ(ct.c3.exp(), 3u);
  EXPECT_EQ(pke_decrypt(kp.sk, ct), m);
}

TEST(Pke, ZeroRandomnessAndIdentityPlaintext) {
  auto gp = GroupParams::create(11);
  auto kp = pke_keygen_from(gp, {2, 3, 5});
  GroupElement m{gp, 6};
  auto ct = pke_encrypt(kp.pk, m, 0, 0);
  EXPECT_TRUE(ct.c1.is_identity());
  EXPECT_TRUE(ct.c2.is_identity());
  EXPECT_EQ(ct.c3, m);
  EXPECT_EQ(pke_decrypt(kp.sk, PkeCiphertext{identity(gp), identity(gp), m}), m);
  auto ct2 = pke_encrypt(kp.pk, identity(gp), 4, 9);
  EXPECT_EQ(ct2.c3, g_exp(kp.pk.g3, 13));
  EXPECT_THROW(pke_encrypt(kp.pk, generator(GroupParams::create(13)), 1, 1), UsageError);
}

TEST(Pke, PerfectCorrectnessExhaustiveP5) {
  auto gp = GroupParams::create(5);
  for (Scalar g3 = 1; g3 < 5; ++g3)
    for (Scalar x = 1; x < 5; ++x)
      for (Scalar y = 1; y < 5; ++y) {
        auto kp = pke_keygen_from(gp, {g3, x, y});
        for (Scalar m = 0; m < 5; ++m)
          for (Scalar a = 0; a < 5; ++a)
            for (Scalar b = 0; b < 5; ++b)
              ASSERT_EQ(pke_decrypt(kp.sk, pke_encrypt(kp.pk, GroupElement{gp, m}, a, b)).exp(), m);
      }
}

TEST(Pke, PerfectCorrectnessSampledP101) {
  auto gp = GroupParams::create(101);
  Rng rng = make_rng(99);
  for (int i = 0; i < 2000; ++i) {
    auto kp = pke_setup(gp, KeyRandomness::sample(rng));
    GroupElement m{gp, uniform_below(rng, 101)};
    auto c = EncCoins::sample(rng, 101);
    ASSERT_EQ(pke_decrypt(kp.sk, pke_encrypt(kp.pk, m, c)), m);
  }
}

TEST(Pke, DecryptionOfArbitraryTriplesIsKeyIndependent) {
  auto gp = GroupParams::create(11);
  Rng rng = make_rng(3);
  for (int i = 0; i < 200; ++i) {
    auto kp = pke_setup(gp, KeyRandomness::sample(rng));
    PkeCiphertext ct{GroupElement{gp, uniform_below(rng, 11)}, GroupElement{gp, uniform_below(rng, 11)},
                     GroupElement{gp, uniform_below(rng, 11)}};
    auto m = pke_decrypt(kp.sk, ct);
    Scalar expect = mod_sub(mod_sub(ct.c3.exp(), mod_mul(kp.sk.x, ct.c1.exp(), 11), 11),
                            mod_mul(kp.sk.y, ct.c2.exp(), 11), 11);
    EXPECT_EQ(m.exp(), expect);
    auto recovered = unique_sk_oracle(kp.pk);
    ASSERT_EQ(recovered.size(), 1u);
    EXPECT_EQ(pke_decrypt(recovered[0], ct), m);
  }
}

TEST(Pke, UniqueSecretKeyExhaustiveP11) {
  auto gp = GroupParams::create(11);
  std::size_t checked = 0;
  for (Scalar g3 = 1; g3 < 11; ++g3)
    for (Scalar x = 1; x < 11; ++x)
      for (Scalar y = 1; y < 11; ++y) {
        auto kp = pke_keygen_from(gp, {g3, x, y});
        auto sks = unique_sk_oracle(kp.pk);
        ASSERT_EQ(sks.size(), 1u);
        EXPECT_EQ(sks[0], kp.sk);
        ++checked;
      }
  EXPECT_EQ(checked, 1000u);
}

TEST(Pke, UniqueSkOracleEdgeCases) {
  auto gp = GroupParams::create(11);
  PkePublicKey bad{identity(gp), GroupElement{gp, 3}, GroupElement{gp, 2}};
  EXPECT_TRUE(unique_sk_oracle(bad).empty());
  auto big = pke_keygen_from(GroupParams::create(103), {1, 1, 1});
  EXPECT_THROW(unique_sk_oracle(big.pk), ResourceError);
}

TEST(Pke, SeedClassesCoverKeySpace) {
  auto gp = GroupParams::create(5);
  const auto& classes = seed_classes(gp);
  EXPECT_EQ(classes.size(), 64u);
  for (const auto& [km, s] : classes) EXPECT_EQ(expand_key_randomness(gp, s), km);
}

TEST(Codec, StandardCodec) {
  auto gp = GroupParams::create(11);
  auto codec = PlaintextCodec::standard(gp, 2);
  EXPECT_EQ(codec.encode(kBot).exp(), 0u);
  EXPECT_EQ(codec.encode(0).exp(), 1u);
  EXPECT_EQ(codec.encode(1).exp(), 2u);
  EXPECT_EQ(codec.decode(GroupElement{gp, 2}), (Decoded{DecodeKind::Vote, 1}));
  EXPECT_EQ(codec.decode(GroupElement{gp, 0}).kind, DecodeKind::Bottom);
  EXPECT_EQ(codec.decode(GroupElement{gp, 7}).kind, DecodeKind::NotInMessageSpace);
  EXPECT_EQ(codec.decode(GroupElement{gp, 7}).as_tally_input(), kBot);
  EXPECT_THROW(codec.encode(2), UsageError);
}

TEST(Codec, SignedRangeCodec) {
  auto gp = GroupParams::create(101);
  auto codec = PlaintextCodec::signed_range(gp, 4);
  EXPECT_EQ(codec.encode(-3).exp(), 98u);
  EXPECT_EQ(codec.decode(GroupElement{gp, 98}), (Decoded{DecodeKind::Vote, -3}));
  EXPECT_EQ(codec.encode(kBot).exp(), 5u);
  EXPECT_EQ(codec.decode(GroupElement{gp, 50}).kind, DecodeKind::NotInMessageSpace);
  EXPECT_THROW(PlaintextCodec::signed_range(GroupParams::create(7), 4), ParameterError);
}

TEST(Codec, InjectiveRoundTrip) {
  for (std::uint64_t p : {5ull, 11ull, 101ull}) {
    auto gp = GroupParams::create(p);
    std::vector<PlaintextCodec> codecs{PlaintextCodec::standard(gp, 2), PlaintextCodec::standard(gp, 3)};
    if (p >= 11) codecs.push_back(PlaintextCodec::signed_range(gp, (static_cast<std::int64_t>(p) - 3) / 2));
    for (const auto& c : codecs) {
      std::set<Scalar> seen;
      std::vector<MaybeVote> all{kBot};
      for (auto v : c.message_set()) all.push_back(v);
      for (const auto& v : all) {
        auto e = c.encode(v);
        EXPECT_TRUE(seen.insert(e.exp()).second);
        EXPECT_EQ(c.decode(e).as_tally_input(), v);
        EXPECT_EQ(c.decode(e).kind, v ? DecodeKind::Vote : DecodeKind::Bottom);
      }
    }
  }
  auto gp = GroupParams::create(5);
  EXPECT_THROW(PlaintextCodec(gp, {0, 1}, 1, {1, 2}), ParameterError);
}
