#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "evote/commit.hpp"
#include "evote/niwi.hpp"
#include "evote/pke.hpp"
#include "evote/relations.hpp"
#include "evote/tally.hpp"

namespace evote {

enum class Variant { Weak, Full };

inline std::string variant_name(Variant v) { return v == Variant::Weak ? "weak" : "full"; }

struct ElectionPk {
  PkTriple pks;
  std::optional<Commitment> z;  // full scheme only
  friend bool operator==(const ElectionPk&, const ElectionPk&) = default;
};

struct ElectionSk {
  PkeSecretKey sk1, sk2;
  KeyRandomness s1, s2;
  std::optional<CommitOpening> r;  // opening of Z, full scheme only
  friend bool operator==(const ElectionSk&, const ElectionSk&) = default;
};

// All three key pairs and seeds. Only the experiment harness holds this.
struct ExtendedSk {
  std::array<PkeSecretKey, 3> sks;
  std::array<KeyRandomness, 3> seeds;
  std::optional<CommitOpening> z_opening;

  ElectionSk restrict() const { return ElectionSk{sks[0], sks[1], seeds[0], seeds[1], z_opening}; }
};

struct Ballot {
  CtTriple cts;
  std::optional<Proof> pi;
  friend bool operator==(const Ballot&, const Ballot&) = default;
};

struct Abstained {
  friend bool operator==(const Abstained&, const Abstained&) = default;
};
struct Invalidated {
  friend bool operator==(const Invalidated&, const Invalidated&) = default;
};

using BallotSlot = std::variant<Abstained, Invalidated, Ballot, Unparsed>;

struct TallyOutcome {
  TallyValue y;
  std::optional<Proof> gamma;
  bool anomaly = false;  // the full scheme's y1 != y2 branch was taken
};

// Per-column plaintexts for a harness-crafted ballot.
using ColumnVotes = std::array<MaybeVote, 3>;

class Scheme {
 public:
  Scheme(Variant variant, SchemeContext ctx, std::shared_ptr<ProofSystem> ps)
      : variant_(variant), ctx_(std::move(ctx)), ps_(std::move(ps)) {
    if (!ps_) throw UsageError("proof system required");
  }

  Variant variant() const { return variant_; }
  const SchemeContext& ctx() const { return ctx_; }
  const ProofSystem& proofs() const { return *ps_; }
  std::shared_ptr<ProofSystem> proofs_ptr() const { return ps_; }

  // --- Setup -------------------------------------------------------------

  struct SetupResult {
    ElectionPk pk;
    ElectionSk sk;
    ExtendedSk ext;
  };

  // z_value selects what Z commits to; honest setup uses 1. The hybrid runner
  // uses 0 so mixed-column ballots can be proven through the opening.
  SetupResult setup_extended(Rng& rng, Scalar z_value = 1) const {
    SetupResult out;
    if (variant_ == Variant::Full) {
      auto o = sample_opening(rng, ctx_.p(), z_value);
      out.pk.z = commit(ctx_.ck, o);
      out.ext.z_opening = o;
    }
    for (std::size_t l = 0; l < 3; ++l) {
      out.ext.seeds[l] = KeyRandomness::sample(rng);
      auto kp = pke_setup(ctx_.gp, out.ext.seeds[l]);
      out.pk.pks[l] = kp.pk;
      out.ext.sks[l] = kp.sk;
    }
    out.sk = out.ext.restrict();
    return out;
  }

  std::pair<ElectionPk, ElectionSk> setup(Rng& rng) const {
    auto r = setup_extended(rng);
    return {r.pk, r.sk};
  }

  // --- Cast ----------------------------------------------------------------

  Ballot cast(const ElectionPk& pk, int j, const MaybeVote& v, Rng& rng) const {
    check_voter(j);
    if (v && !ctx_.codec.contains(*v)) throw UsageError("vote " + std::to_string(*v) + " is not in M");
    std::array<EncCoins, 3> coins;
    for (auto& c : coins) c = EncCoins::sample(rng, ctx_.p());
    return cast_columns(pk, j, ColumnVotes{v, v, v}, coins, std::nullopt);
  }

  // Encrypts the given per-column votes with the given coins. In the full
  // scheme the proof uses the real branch when the columns agree and no
  // trapdoor is supplied, otherwise the Z opening.
  Ballot cast_columns(const ElectionPk& pk, int j, const ColumnVotes& votes, const std::array<EncCoins, 3>& coins,
                      const std::optional<CommitOpening>& trapdoor) const {
    check_voter(j);
    Ballot b;
    for (std::size_t l = 0; l < 3; ++l) b.cts[l] = pke_encrypt(pk.pks[l], ctx_.codec.encode(votes[l]), coins[l]);
    if (variant_ == Variant::Full) {
      EncWitness w;
      if (trapdoor) {
        w.branch = EncTrapdoor{*trapdoor};
      } else {
        if (votes[0] != votes[1] || votes[1] != votes[2]) throw WitnessError("mixed columns need the Z opening");
        w.branch = EncReal{votes[0], coins};
      }
      b.pi = ps_->prove(enc_target(ctx_, enc_statement(pk, j, b.cts)), w.encode());
    }
    return b;
  }

  // --- VerifyBallot --------------------------------------------------------

  // Abstained and Invalidated slots are not ballots and never verify.
  bool verify_ballot(const ElectionPk& pk, int j, const BallotSlot& slot) const {
    if (std::holds_alternative<Abstained>(slot) || std::holds_alternative<Invalidated>(slot)) return false;
    if (variant_ == Variant::Weak) return true;
    const auto* b = std::get_if<Ballot>(&slot);
    if (!b || !b->pi || !pk.z || j < 1 || j > ctx_.n()) return false;
    return ps_->verify(enc_target(ctx_, enc_statement(pk, j, b->cts)), *b->pi);
  }

  // The board as the tally relations see it: weak keeps every submitted
  // string, full replaces ballots rejected by verify_ballot with ⊥.
  std::vector<StatementEntry> effective_entries(const ElectionPk& pk, const std::vector<BallotSlot>& slots) const {
    check_arity(slots);
    std::vector<StatementEntry> out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& s = slots[i];
      if (variant_ == Variant::Full && !verify_ballot(pk, static_cast<int>(i + 1), s)) {
        out.emplace_back(BottomEntry{});
      } else if (const auto* b = std::get_if<Ballot>(&s)) {
        out.emplace_back(b->cts);
      } else if (const auto* u = std::get_if<Unparsed>(&s)) {
        out.emplace_back(*u);
      } else {
        out.emplace_back(BottomEntry{});
      }
    }
    return out;
  }

  // --- EvalTally -----------------------------------------------------------

  TallyOutcome eval_tally(const ElectionPk& pk, const ElectionSk& sk, const std::vector<BallotSlot>& slots) const {
    std::array<std::optional<PkeSecretKey>, 3> sks{sk.sk1, sk.sk2, std::nullopt};
    std::array<std::optional<KeyRandomness>, 3> seeds{sk.s1, sk.s2, std::nullopt};
    return eval_with(pk, sks, seeds, slots, 1, 2);
  }

  // Same computation, with the tally taken from columns (i1, i2) and the proof
  // witnessed by those keys.
  TallyOutcome eval_tally_with_witness_indices(const ElectionPk& pk, const ExtendedSk& ext,
                                               const std::vector<BallotSlot>& slots, int i1, int i2) const {
    std::array<std::optional<PkeSecretKey>, 3> sks{ext.sks[0], ext.sks[1], ext.sks[2]};
    std::array<std::optional<KeyRandomness>, 3> seeds{ext.seeds[0], ext.seeds[1], ext.seeds[2]};
    return eval_with(pk, sks, seeds, slots, i1, i2);
  }

  // --- VerifyTally ---------------------------------------------------------

  bool verify_tally(const ElectionPk& pk, const std::vector<BallotSlot>& slots, const TallyValue& y,
                    const std::optional<Proof>& gamma) const {
    if (static_cast<int>(slots.size()) != ctx_.n()) return false;
    auto entries = effective_entries(pk, slots);
    if (variant_ == Variant::Weak) {
      if (!gamma) return false;
      return ps_->verify(dec_target(ctx_, DecStatement{entries, pk.pks, y}, kRelDec), *gamma);
    }
    bool all_bottom = std::all_of(entries.begin(), entries.end(), is_bottom);
    if (all_bottom) return !y.has_value();
    if (!gamma) return false;
    return ps_->verify(dec_target(ctx_, DecStatement{entries, pk.pks, y}, y ? kRelDecFull : kRelDecBlank), *gamma);
  }

  EncStatement enc_statement(const ElectionPk& pk, int j, const CtTriple& cts) const {
    return EncStatement{j, cts, pk.pks, pk.z.value_or(Commitment{})};
  }

  const char* dec_relation_for(const TallyValue& y) const {
    if (variant_ == Variant::Weak) return kRelDec;
    return y ? kRelDecFull : kRelDecBlank;
  }

 private:
  void check_voter(int j) const {
    if (j < 1 || j > ctx_.n()) throw UsageError("voter index out of range");
  }
  void check_arity(const std::vector<BallotSlot>& slots) const {
    if (static_cast<int>(slots.size()) != ctx_.n()) throw UsageError("expected exactly N ballot slots");
  }

  TallyOutcome eval_with(const ElectionPk& pk, const std::array<std::optional<PkeSecretKey>, 3>& sks,
                         const std::array<std::optional<KeyRandomness>, 3>& seeds,
                         const std::vector<BallotSlot>& slots, int i1, int i2) const {
    if (i1 > i2) std::swap(i1, i2);
    if (!(1 <= i1 && i1 < i2 && i2 <= 3)) throw UsageError("witness indices must be two distinct columns");
    const auto& k1 = sks[static_cast<std::size_t>(i1 - 1)];
    const auto& k2 = sks[static_cast<std::size_t>(i2 - 1)];
    const auto& s1 = seeds[static_cast<std::size_t>(i1 - 1)];
    const auto& s2 = seeds[static_cast<std::size_t>(i2 - 1)];
    if (!k1 || !k2 || !s1 || !s2) throw UsageError("no secret key available for the requested column");

    auto entries = effective_entries(pk, slots);
    if (variant_ == Variant::Full && std::all_of(entries.begin(), entries.end(), is_bottom)) return {};

    TallyValue y1 = ctx_.cfg.eval(decrypt_column(ctx_, entries, *k1, i1));
    TallyValue y2 = ctx_.cfg.eval(decrypt_column(ctx_, entries, *k2, i2));
    TallyOutcome out;
    if (y1 == y2) {
      out.y = y1;
    } else if (variant_ == Variant::Full) {
      out.anomaly = true;
      return out;
    }
    DecWitness w{*k1, *k2, *s1, *s2, i1, i2};
    out.gamma = ps_->prove(dec_target(ctx_, DecStatement{entries, pk.pks, out.y}, dec_relation_for(out.y)), w.encode());
    return out;
  }

  Variant variant_;
  SchemeContext ctx_;
  std::shared_ptr<ProofSystem> ps_;
};

}  // namespace evote
