#pragma once

#include <memory>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "evote/evote.hpp"

namespace evote {

// Multi-authority variant. Each voter splits a vote v ∈ {0,1} into m shares,
// encrypts share k to authority k with the full scheme, and proves that the
// shares reconstruct to a vote. Each authority tallies its own column of
// shares; the public combination of the per-authority tallies is the result.
//
// m = 2: additive shares (v1 uniform, v2 = v - v1), combined with weights (1, 1).
// m > 2: a random degree m-1 polynomial with constant term v evaluated at
// 1..m, combined with the Lagrange weights for x = 0.
class ThresholdParams {
 public:
  static ThresholdParams create(const GroupParams& gp, int n, int m, std::int64_t share_bound) {
    if (m < 2) throw ParameterError("threshold scheme needs at least two authorities");
    if (share_bound < 1) throw ParameterError("share bound must be positive");
    if (n < 2) throw ParameterError("threshold scheme needs N >= 2");
    ThresholdParams tp(gp, n, m, share_bound);
    for (auto b : tp.bounds_)
      if (static_cast<double>(gp.p()) <= 2.0 * n * static_cast<double>(b) + 2)
        throw ParameterError("group order too small for N * share bound");
    auto ctxs = std::make_shared<std::vector<SchemeContext>>();
    for (auto b : tp.bounds_) {
      auto codec = PlaintextCodec::signed_range(gp, b);
      ctxs->push_back(SchemeContext::make(gp, TallyConfig::sum(n, codec.message_set()), codec));
    }
    tp.ctxs_ = std::move(ctxs);
    return tp;
  }

  const GroupParams& gp() const { return gp_; }
  int n() const { return n_; }
  int m() const { return m_; }
  std::int64_t share_bound() const { return p_prime_; }
  // |share_k| <= bound(k), 1-based k
  std::int64_t bound(int k) const { return bounds_.at(static_cast<std::size_t>(k - 1)); }
  std::int64_t weight(int k) const { return weights_.at(static_cast<std::size_t>(k - 1)); }
  const std::vector<std::int64_t>& weights() const { return weights_; }
  // one ballot: m authorities x 3 ciphertexts x 3 elements
  std::size_t flat_len() const { return 9 * static_cast<std::size_t>(m_); }

  const SchemeContext& authority_ctx(int k) const { return ctxs_->at(static_cast<std::size_t>(k - 1)); }

  std::int64_t reconstruct(const std::vector<std::int64_t>& shares) const {
    if (static_cast<int>(shares.size()) != m_) throw UsageError("wrong number of shares");
    std::int64_t v = 0;
    for (int k = 1; k <= m_; ++k) v += weight(k) * shares[static_cast<std::size_t>(k - 1)];
    return v;
  }

  // Shares from explicit randomness: for m = 2 the single value v1, for m > 2
  // the m-1 non-constant polynomial coefficients.
  std::vector<std::int64_t> split_with(std::int64_t v, const std::vector<std::int64_t>& coins) const {
    if (v != 0 && v != 1) throw UsageError("threshold votes are 0 or 1");
    if (m_ == 2) {
      if (coins.size() != 1) throw UsageError("m = 2 takes one share coin");
      return {coins[0], v - coins[0]};
    }
    if (static_cast<int>(coins.size()) != m_ - 1) throw UsageError("m > 2 takes m - 1 coefficients");
    std::vector<std::int64_t> out;
    for (std::int64_t x = 1; x <= m_; ++x) {
      std::int64_t acc = 0;
      for (auto it = coins.rbegin(); it != coins.rend(); ++it) acc = (acc + *it) * x;
      out.push_back(acc + v);
    }
    return out;
  }

  // Every coin vector split_vote can draw for v, in a fixed order.
  std::vector<std::vector<std::int64_t>> coin_space(std::int64_t v) const {
    std::vector<std::vector<std::int64_t>> out;
    if (m_ == 2) {
      for (std::int64_t v1 = v == 1 ? -p_prime_ + 1 : -p_prime_; v1 <= p_prime_; ++v1) out.push_back({v1});
      return out;
    }
    std::vector<std::int64_t> c(static_cast<std::size_t>(m_ - 1), -p_prime_);
    for (;;) {
      out.push_back(c);
      std::size_t i = 0;
      while (i < c.size() && ++c[i] > p_prime_) c[i++] = -p_prime_;
      if (i == c.size()) break;
    }
    return out;
  }

  std::vector<std::int64_t> split_vote(std::int64_t v, Rng& rng) const {
    std::vector<std::int64_t> coins;
    if (m_ == 2) {
      // v = 1 draws v1 from [-p'+1, p'] so that v2 = 1 - v1 stays in S
      coins.push_back(uniform_in(rng, v == 1 ? -p_prime_ + 1 : -p_prime_, p_prime_));
    } else {
      for (int i = 1; i < m_; ++i) coins.push_back(uniform_in(rng, -p_prime_, p_prime_));
    }
    return split_with(v, coins);
  }

  // Public combination of per-authority tallies; ⊥ unless every authority
  // reported a value.
  TallyValue combine(const std::vector<TallyValue>& ys) const {
    if (static_cast<int>(ys.size()) != m_) return std::nullopt;
    std::int64_t acc = 0;
    for (int k = 1; k <= m_; ++k) {
      const auto& y = ys[static_cast<std::size_t>(k - 1)];
      if (!y) return std::nullopt;
      acc += weight(k) * *y;
    }
    return acc;
  }

 private:
  ThresholdParams(const GroupParams& gp, int n, int m, std::int64_t pp) : gp_(gp), n_(n), m_(m), p_prime_(pp) {
    if (m == 2) {
      weights_ = {1, 1};
      bounds_ = {pp, pp};
      return;
    }
    // λ_k = prod_{i != k} i / (i - k) = (-1)^{k+1} C(m, k)
    std::int64_t binom = 1;
    for (int k = 1; k <= m; ++k) {
      binom = binom * (m - k + 1) / k;
      weights_.push_back(k % 2 == 1 ? binom : -binom);
      std::int64_t pw = 1, sum = 0;
      for (int i = 1; i < m; ++i) {
        pw *= k;
        sum += pw;
      }
      bounds_.push_back(1 + pp * sum);
    }
  }

  GroupParams gp_;
  int n_, m_;
  std::int64_t p_prime_;
  std::vector<std::int64_t> weights_, bounds_;
  std::shared_ptr<const std::vector<SchemeContext>> ctxs_;
};

inline std::vector<std::int64_t> split_vote(const ThresholdParams& tp, std::int64_t v, Rng& rng) {
  return tp.split_vote(v, rng);
}

struct AuthorityPublic {
  ElectionPk pk;
  std::vector<Commitment> com;  // N slots x flat_len commitments
  friend bool operator==(const AuthorityPublic&, const AuthorityPublic&) = default;
};

struct AuthorityKey {
  AuthorityPublic pub;
  ExtendedSk ext;
  std::vector<CommitOpening> com_openings;
};

struct ThresholdBallot {
  std::vector<Ballot> parts;  // one full-scheme ballot per authority
  std::optional<Proof> pi;
  friend bool operator==(const ThresholdBallot&, const ThresholdBallot&) = default;
};

using ThresholdSlot = std::variant<Abstained, Invalidated, ThresholdBallot, Unparsed>;
using ThresholdEntry = std::optional<std::vector<CtTriple>>;  // nullopt is ⊥

inline std::vector<Scalar> flatten_ballot(const std::vector<CtTriple>& parts) {
  std::vector<Scalar> out;
  for (const auto& t : parts)
    for (const auto& c : t) {
      out.push_back(c.c1.exp());
      out.push_back(c.c2.exp());
      out.push_back(c.c3.exp());
    }
  return out;
}

// ---------------------------------------------------------------------------
// Relations
// ---------------------------------------------------------------------------

struct ThresholdEncStatement {
  int j = 1;
  std::vector<CtTriple> cts;            // per authority
  std::vector<PkTriple> pks;            // per authority
  std::vector<std::vector<Commitment>> com;  // per authority

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u64(static_cast<std::uint64_t>(j)).u64(cts.size());
    for (const auto& t : cts)
      for (const auto& c : t) wire::put(w, c);
    for (const auto& k : pks) wire::put(w, k);
    for (const auto& ck : com) {
      w.u64(ck.size());
      for (const auto& c : ck) wire::put(w, c);
    }
    return std::move(w).take();
  }
};

struct ThresholdEncReal {
  std::vector<std::int64_t> shares;
  std::vector<std::array<EncCoins, 3>> coins;
};
struct ThresholdEncTrapdoor {
  std::vector<std::vector<CommitOpening>> openings;  // per authority, the j-th slot's flat_len openings
};
struct ThresholdEncWitness {
  std::variant<ThresholdEncReal, ThresholdEncTrapdoor> branch;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    if (const auto* r = std::get_if<ThresholdEncReal>(&branch)) {
      w.u8(0).u64(r->shares.size());
      for (auto s : r->shares) w.i64(s);
      for (const auto& cs : r->coins)
        for (const auto& c : cs) w.u64(c.a).u64(c.b);
    } else {
      const auto& t = std::get<ThresholdEncTrapdoor>(branch);
      w.u8(1).u64(t.openings.size());
      for (const auto& os : t.openings) {
        w.u64(os.size());
        for (const auto& o : os) wire::put(w, o);
      }
    }
    return std::move(w).take();
  }
  static ThresholdEncWitness decode(std::span<const std::uint8_t> b, std::uint64_t p) {
    ByteReader r(b);
    ThresholdEncWitness w;
    auto tag = r.u8();
    auto m = r.u64();
    if (m > 64) throw DecodeError("too many authorities");
    if (tag == 0) {
      ThresholdEncReal real;
      for (std::uint64_t k = 0; k < m; ++k) real.shares.push_back(r.i64());
      real.coins.resize(m);
      for (auto& cs : real.coins)
        for (auto& c : cs) {
          c.a = wire::get_scalar(r, p);
          c.b = wire::get_scalar(r, p);
        }
      w.branch = real;
    } else if (tag == 1) {
      ThresholdEncTrapdoor t;
      t.openings.resize(m);
      for (auto& os : t.openings) {
        auto len = r.u64();
        if (len > 4096) throw DecodeError("opening list too long");
        for (std::uint64_t i = 0; i < len; ++i) os.push_back(wire::get_opening(r, p));
      }
      w.branch = t;
    } else {
      throw DecodeError("unknown witness branch");
    }
    r.expect_done();
    return w;
  }
};

inline bool check_threshold_enc(const ThresholdParams& tp, const ThresholdEncStatement& x,
                                const ThresholdEncWitness& w) {
  const auto m = static_cast<std::size_t>(tp.m());
  if (x.cts.size() != m || x.pks.size() != m || x.com.size() != m) return false;
  if (x.j < 1 || x.j > tp.n()) return false;
  const std::uint64_t p = tp.gp().p();
  if (const auto* real = std::get_if<ThresholdEncReal>(&w.branch)) {
    if (real->shares.size() != m || real->coins.size() != m) return false;
    for (std::size_t k = 0; k < m; ++k) {
      std::int64_t s = real->shares[k];
      std::int64_t b = tp.bound(static_cast<int>(k + 1));
      if (s < -b || s > b) return false;
      GroupElement enc{tp.gp(), mod_reduce(s, p)};
      for (std::size_t l = 0; l < 3; ++l) {
        if (x.pks[k][l].g3.p() != p) return false;
        if (pke_encrypt(x.pks[k][l], enc, real->coins[k][l]) != x.cts[k][l]) return false;
      }
    }
    auto v = tp.reconstruct(real->shares);
    return v == 0 || v == 1;
  }
  const auto& t = std::get<ThresholdEncTrapdoor>(w.branch);
  if (t.openings.size() != m) return false;
  auto flat = flatten_ballot(x.cts);
  const auto ck = CommitKey::derive(tp.gp());
  const std::size_t base = static_cast<std::size_t>(x.j - 1) * tp.flat_len();
  for (std::size_t k = 0; k < m; ++k) {
    if (x.com[k].size() != static_cast<std::size_t>(tp.n()) * tp.flat_len()) return false;
    std::vector<Commitment> slot(x.com[k].begin() + static_cast<std::ptrdiff_t>(base),
                                 x.com[k].begin() + static_cast<std::ptrdiff_t>(base + tp.flat_len()));
    if (!verify_tuple(ck, slot, t.openings[k], flat)) return false;
  }
  return true;
}

inline constexpr const char* kRelThresholdEnc = "threshold-enc";

inline ProofTarget threshold_enc_target(const ThresholdParams& tp, const ThresholdEncStatement& x) {
  const std::uint64_t p = tp.gp().p();
  return ProofTarget{
      kRelThresholdEnc, x.encode(),
      make_acceptor([p](std::span<const std::uint8_t> b) { return ThresholdEncWitness::decode(b, p); },
                    [tp, x](const ThresholdEncWitness& w) { return check_threshold_enc(tp, x, w); })};
}

struct ThresholdDecStatement {
  int k = 1;
  std::vector<ThresholdEntry> board;
  PkTriple pks;
  std::vector<Commitment> com;
  TallyValue y;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u64(static_cast<std::uint64_t>(k)).u64(board.size());
    for (const auto& e : board) {
      w.u8(e ? 1 : 0);
      if (e) {
        w.u64(e->size());
        for (const auto& t : *e)
          for (const auto& c : t) wire::put(w, c);
      }
    }
    wire::put(w, pks);
    w.u64(com.size());
    for (const auto& c : com) wire::put(w, c);
    wire::put_maybe(w, y);
    return std::move(w).take();
  }

  // The authority-k view as a plain decryption statement.
  DecStatement projection() const {
    DecStatement d{{}, pks, y};
    for (const auto& e : board) {
      if (e && static_cast<std::size_t>(k) <= e->size())
        d.ballots.emplace_back((*e)[static_cast<std::size_t>(k - 1)]);
      else
        d.ballots.emplace_back(BottomEntry{});
    }
    return d;
  }
};

struct ThresholdDecWitness {
  std::optional<DecWitness> dec;  // present in the real branch
  std::vector<CommitOpening> openings;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u8(dec ? 0 : 1);
    if (dec) w.bytes(dec->encode());
    w.u64(openings.size());
    for (const auto& o : openings) wire::put(w, o);
    return std::move(w).take();
  }
  static ThresholdDecWitness decode(std::span<const std::uint8_t> b, std::uint64_t p) {
    ByteReader r(b);
    ThresholdDecWitness w;
    auto tag = r.u8();
    if (tag > 1) throw DecodeError("unknown witness branch");
    if (tag == 0) w.dec = DecWitness::decode(r.bytes(), p);
    auto len = r.u64();
    if (len > (1u << 20)) throw DecodeError("opening list too long");
    for (std::uint64_t i = 0; i < len; ++i) w.openings.push_back(wire::get_opening(r, p));
    r.expect_done();
    return w;
  }
};

inline bool check_threshold_dec(const ThresholdParams& tp, const ThresholdDecStatement& x,
                                const ThresholdDecWitness& w) {
  if (x.k < 1 || x.k > tp.m()) return false;
  if (static_cast<int>(x.board.size()) != tp.n()) return false;
  const std::size_t len = static_cast<std::size_t>(tp.n()) * tp.flat_len();
  if (x.com.size() != len) return false;
  const auto ck = CommitKey::derive(tp.gp());
  if (w.dec) {
    if (!verify_tuple(ck, x.com, w.openings, std::vector<Scalar>(len, 0))) return false;
    return check_dec_full(tp.authority_ctx(x.k), x.projection(), *w.dec);
  }
  std::vector<Scalar> flat;
  for (const auto& e : x.board) {
    if (e && e->size() != static_cast<std::size_t>(tp.m())) return false;
    auto f = e ? flatten_ballot(*e) : std::vector<Scalar>(tp.flat_len(), 0);
    flat.insert(flat.end(), f.begin(), f.end());
  }
  return verify_tuple(ck, x.com, w.openings, flat);
}

inline constexpr const char* kRelThresholdDec = "threshold-dec";

inline ProofTarget threshold_dec_target(const ThresholdParams& tp, const ThresholdDecStatement& x) {
  const std::uint64_t p = tp.gp().p();
  return ProofTarget{
      kRelThresholdDec, x.encode(),
      make_acceptor([p](std::span<const std::uint8_t> b) { return ThresholdDecWitness::decode(b, p); },
                    [tp, x](const ThresholdDecWitness& w) { return check_threshold_dec(tp, x, w); })};
}

// ---------------------------------------------------------------------------
// Scheme
// ---------------------------------------------------------------------------

class ThresholdScheme {
 public:
  ThresholdScheme(ThresholdParams tp, std::shared_ptr<ProofSystem> ps) : tp_(std::move(tp)), ps_(std::move(ps)) {
    for (int k = 1; k <= tp_.m(); ++k) schemes_.emplace_back(Variant::Full, tp_.authority_ctx(k), ps_);
  }

  const ThresholdParams& params() const { return tp_; }
  const Scheme& authority_scheme(int k) const { return schemes_.at(static_cast<std::size_t>(k - 1)); }
  const ProofSystem& proofs() const { return *ps_; }

  AuthorityKey setup_authority(int k, Rng& rng) const {
    auto r = authority_scheme(k).setup_extended(rng);
    AuthorityKey key;
    key.pub.pk = r.pk;
    key.ext = r.ext;
    const auto len = static_cast<std::size_t>(tp_.n()) * tp_.flat_len();
    auto t = commit_tuple(CommitKey::derive(tp_.gp()), std::vector<Scalar>(len, 0), rng);
    key.pub.com = std::move(t.commitments);
    key.com_openings = std::move(t.openings);
    return key;
  }

  std::vector<AuthorityKey> setup(Rng& rng) const {
    std::vector<AuthorityKey> keys;
    for (int k = 1; k <= tp_.m(); ++k) keys.push_back(setup_authority(k, rng));
    return keys;
  }

  ThresholdBallot cast(const std::vector<AuthorityPublic>& auth, int j, std::int64_t v, Rng& rng) const {
    return cast_shares(auth, j, tp_.split_vote(v, rng), rng);
  }

  // Casts given shares. The combined proof uses the real branch, so shares
  // that do not reconstruct to a vote make prove() throw.
  ThresholdBallot cast_shares(const std::vector<AuthorityPublic>& auth, int j, const std::vector<std::int64_t>& shares,
                              Rng& rng) const {
    check_auth(auth);
    if (j < 1 || j > tp_.n()) throw UsageError("voter index out of range");
    if (static_cast<int>(shares.size()) != tp_.m()) throw UsageError("wrong number of shares");
    ThresholdBallot b;
    ThresholdEncReal real{shares, {}};
    for (int k = 1; k <= tp_.m(); ++k) {
      std::int64_t s = shares[static_cast<std::size_t>(k - 1)];
      if (s < -tp_.bound(k) || s > tp_.bound(k)) throw WitnessError("share outside S^k");
      std::array<EncCoins, 3> coins;
      for (auto& c : coins) c = EncCoins::sample(rng, tp_.gp().p());
      real.coins.push_back(coins);
      b.parts.push_back(authority_scheme(k).cast_columns(auth[static_cast<std::size_t>(k - 1)].pk, j,
                                                         ColumnVotes{s, s, s}, coins, std::nullopt));
    }
    b.pi = ps_->prove(threshold_enc_target(tp_, enc_statement(auth, j, b)), ThresholdEncWitness{real}.encode());
    return b;
  }

  ThresholdEncStatement enc_statement(const std::vector<AuthorityPublic>& auth, int j, const ThresholdBallot& b) const {
    ThresholdEncStatement x;
    x.j = j;
    for (const auto& part : b.parts) x.cts.push_back(part.cts);
    for (const auto& a : auth) {
      x.pks.push_back(a.pk.pks);
      x.com.push_back(a.com);
    }
    return x;
  }

  bool verify_ballot(const std::vector<AuthorityPublic>& auth, int j, const ThresholdSlot& slot) const {
    const auto* b = std::get_if<ThresholdBallot>(&slot);
    if (!b || !b->pi || static_cast<int>(auth.size()) != tp_.m()) return false;
    if (static_cast<int>(b->parts.size()) != tp_.m() || j < 1 || j > tp_.n()) return false;
    for (int k = 1; k <= tp_.m(); ++k)
      if (!authority_scheme(k).verify_ballot(auth[static_cast<std::size_t>(k - 1)].pk, j,
                                             b->parts[static_cast<std::size_t>(k - 1)]))
        return false;
    return ps_->verify(threshold_enc_target(tp_, enc_statement(auth, j, *b)), *b->pi);
  }

  std::vector<ThresholdEntry> effective_board(const std::vector<AuthorityPublic>& auth,
                                              const std::vector<ThresholdSlot>& slots) const {
    if (static_cast<int>(slots.size()) != tp_.n()) throw UsageError("expected exactly N ballot slots");
    std::vector<ThresholdEntry> out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!verify_ballot(auth, static_cast<int>(i + 1), slots[i])) {
        out.emplace_back(std::nullopt);
        continue;
      }
      std::vector<CtTriple> parts;
      for (const auto& part : std::get<ThresholdBallot>(slots[i]).parts) parts.push_back(part.cts);
      out.emplace_back(std::move(parts));
    }
    return out;
  }

  // Authority k's tally over its share column. No other authority is involved.
  TallyOutcome eval_tally_authority(int k, const std::vector<AuthorityPublic>& auth, const AuthorityKey& key,
                                    const std::vector<ThresholdSlot>& slots) const {
    auto board = effective_board(auth, slots);
    if (std::all_of(board.begin(), board.end(), [](const ThresholdEntry& e) { return !e; })) return {};
    ThresholdDecStatement x{k, board, key.pub.pk.pks, key.pub.com, std::nullopt};
    const auto& ctx = authority_scheme(k).ctx();
    auto dec = x.projection();
    TallyValue y1 = ctx.cfg.eval(decrypt_column(ctx, dec.ballots, key.ext.sks[0], 1));
    TallyValue y2 = ctx.cfg.eval(decrypt_column(ctx, dec.ballots, key.ext.sks[1], 2));
    TallyOutcome out;
    if (y1 != y2 || !y1) {
      out.anomaly = true;
      return out;
    }
    out.y = x.y = y1;
    ThresholdDecWitness w{DecWitness{key.ext.sks[0], key.ext.sks[1], key.ext.seeds[0], key.ext.seeds[1], 1, 2},
                          key.com_openings};
    out.gamma = ps_->prove(threshold_dec_target(tp_, x), w.encode());
    return out;
  }

  bool verify_tally_authority(int k, const std::vector<AuthorityPublic>& auth, const std::vector<ThresholdSlot>& slots,
                              const TallyValue& y, const std::optional<Proof>& gamma) const {
    if (k < 1 || k > tp_.m() || static_cast<int>(auth.size()) != tp_.m()) return false;
    if (static_cast<int>(slots.size()) != tp_.n()) return false;
    auto board = effective_board(auth, slots);
    if (std::all_of(board.begin(), board.end(), [](const ThresholdEntry& e) { return !e; })) return !y;
    if (!y || !gamma) return false;
    const auto& a = auth[static_cast<std::size_t>(k - 1)];
    return ps_->verify(threshold_dec_target(tp_, ThresholdDecStatement{k, board, a.pk.pks, a.com, y}), *gamma);
  }

  TallyValue combine_tallies(const std::vector<TallyOutcome>& outcomes) const {
    std::vector<TallyValue> ys;
    for (const auto& o : outcomes) ys.push_back(o.y);
    return tp_.combine(ys);
  }

 private:
  void check_auth(const std::vector<AuthorityPublic>& auth) const {
    if (static_cast<int>(auth.size()) != tp_.m()) throw UsageError("one public key per authority required");
  }

  ThresholdParams tp_;
  std::shared_ptr<ProofSystem> ps_;
  std::vector<Scheme> schemes_;
};

}  // namespace evote
