#pragma once

#include <array>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evote/bytes.hpp"
#include "evote/commit.hpp"
#include "evote/group.hpp"
#include "evote/pke.hpp"
#include "evote/tally.hpp"

namespace evote {

// Everything a relation checker needs besides the statement: group, tally
// function, plaintext encoding and the public commitment key.
struct SchemeContext {
  GroupParams gp;
  TallyConfig cfg;
  PlaintextCodec codec;
  CommitKey ck;

  static SchemeContext make(const GroupParams& gp, TallyConfig cfg, PlaintextCodec codec) {
    if (codec.params() != gp) throw ParameterError("codec and group disagree on p");
    auto a = cfg.message_set(), b = codec.message_set();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw ParameterError("codec and tally function disagree on the message set");
    return SchemeContext{gp, std::move(cfg), std::move(codec), CommitKey::derive(gp)};
  }

  int n() const { return cfg.n(); }
  std::uint64_t p() const { return gp.p(); }
};

using Column = int;  // 1-based ciphertext column
using CtTriple = std::array<PkeCiphertext, 3>;
using PkTriple = std::array<PkePublicKey, 3>;

// Bytes that failed to parse as a ballot. Relations treat them as a ballot
// whose every column decrypts outside M.
struct Unparsed {
  std::string bytes;
  friend bool operator==(const Unparsed&, const Unparsed&) = default;
};

struct BottomEntry {
  friend bool operator==(const BottomEntry&, const BottomEntry&) = default;
};

using StatementEntry = std::variant<BottomEntry, CtTriple, Unparsed>;

inline bool is_bottom(const StatementEntry& e) { return std::holds_alternative<BottomEntry>(e); }

// ---------------------------------------------------------------------------
// Encoding helpers
// ---------------------------------------------------------------------------

namespace wire {
inline void put(ByteWriter& w, const GroupElement& e) { w.u64(e.exp()); }
inline GroupElement get_element(ByteReader& r, std::uint64_t p) {
  auto v = r.u64();
  if (v >= p) throw DecodeError("group element out of range");
  return GroupElement::from_raw(p, v);
}
inline Scalar get_scalar(ByteReader& r, std::uint64_t p) {
  auto v = r.u64();
  if (v >= p) throw DecodeError("scalar out of range");
  return v;
}
inline void put(ByteWriter& w, const PkeCiphertext& c) {
  put(w, c.c1);
  put(w, c.c2);
  put(w, c.c3);
}
inline PkeCiphertext get_ct(ByteReader& r, std::uint64_t p) {
  auto a = get_element(r, p);
  auto b = get_element(r, p);
  auto c = get_element(r, p);
  return PkeCiphertext{a, b, c};
}
inline void put(ByteWriter& w, const PkePublicKey& k) {
  put(w, k.g1);
  put(w, k.g2);
  put(w, k.g3);
}
inline PkePublicKey get_pk(ByteReader& r, std::uint64_t p) {
  auto a = get_element(r, p);
  auto b = get_element(r, p);
  auto c = get_element(r, p);
  return PkePublicKey{a, b, c};
}
inline void put(ByteWriter& w, const PkeSecretKey& k) {
  put(w, k.pk);
  w.u64(k.x).u64(k.y);
}
inline PkeSecretKey get_sk(ByteReader& r, std::uint64_t p) {
  auto pk = get_pk(r, p);
  auto x = get_scalar(r, p);
  auto y = get_scalar(r, p);
  return PkeSecretKey{pk, x, y};
}
inline void put(ByteWriter& w, const Commitment& c) {
  put(w, c.d1);
  put(w, c.d2);
  put(w, c.d3);
}
inline Commitment get_commitment(ByteReader& r, std::uint64_t p) {
  auto a = get_element(r, p);
  auto b = get_element(r, p);
  auto c = get_element(r, p);
  return Commitment{a, b, c};
}
inline void put(ByteWriter& w, const CommitOpening& o) { w.u64(o.value).u64(o.r1).u64(o.r2); }
inline CommitOpening get_opening(ByteReader& r, std::uint64_t p) {
  auto v = get_scalar(r, p);
  auto a = get_scalar(r, p);
  auto b = get_scalar(r, p);
  return CommitOpening{v, a, b};
}
inline void put_maybe(ByteWriter& w, const std::optional<std::int64_t>& v) {
  w.u8(v ? 1 : 0);
  w.i64(v.value_or(0));
}
inline std::optional<std::int64_t> get_maybe(ByteReader& r) {
  auto tag = r.u8();
  auto v = r.i64();
  if (tag > 1 || (tag == 0 && v != 0)) throw DecodeError("bad optional encoding");
  return tag ? std::optional<std::int64_t>{v} : std::nullopt;
}
inline void put(ByteWriter& w, const StatementEntry& e) {
  if (is_bottom(e)) {
    w.u8(0);
  } else if (auto* t = std::get_if<CtTriple>(&e)) {
    w.u8(1);
    for (const auto& c : *t) put(w, c);
  } else {
    w.u8(2).str(std::get<Unparsed>(e).bytes);
  }
}
inline void put(ByteWriter& w, const PkTriple& pks) {
  for (const auto& k : pks) put(w, k);
}
}  // namespace wire

// A relation instance as the proof system sees it: an identifier, canonical
// statement bytes, and the relation's acceptance predicate over witness bytes.
struct ProofTarget {
  std::string relation;
  std::vector<std::uint8_t> statement;
  std::function<bool(std::span<const std::uint8_t>)> accepts;
};

// Runs a decoder + checker, mapping malformed witness bytes to "reject".
template <class Decode, class Check>
std::function<bool(std::span<const std::uint8_t>)> make_acceptor(Decode decode, Check check) {
  return [decode, check](std::span<const std::uint8_t> bytes) {
    try {
      auto w = decode(bytes);
      return check(w);
    } catch (const DecodeError&) {
      return false;
    }
  };
}

// ---------------------------------------------------------------------------
// Decryption relation (weak scheme; identical checks for the full scheme on
// pre-filtered ballots)
// ---------------------------------------------------------------------------

struct DecStatement {
  std::vector<StatementEntry> ballots;
  PkTriple pks;
  TallyValue y;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u64(ballots.size());
    for (const auto& b : ballots) wire::put(w, b);
    wire::put(w, pks);
    wire::put_maybe(w, y);
    return std::move(w).take();
  }
  friend bool operator==(const DecStatement&, const DecStatement&) = default;
};

struct DecWitness {
  PkeSecretKey sk1p, sk2p;
  KeyRandomness s1, s2;
  int i1 = 1, i2 = 2;

  // Orders the two halves so that i1 < i2.
  DecWitness canonicalize() const {
    if (i1 <= i2) return *this;
    return DecWitness{sk2p, sk1p, s2, s1, i2, i1};
  }

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    wire::put(w, sk1p);
    wire::put(w, sk2p);
    w.bytes(s1.s).bytes(s2.s).u8(static_cast<std::uint8_t>(i1)).u8(static_cast<std::uint8_t>(i2));
    return std::move(w).take();
  }
  static DecWitness decode(std::span<const std::uint8_t> b, std::uint64_t p) {
    ByteReader r(b);
    DecWitness w;
    w.sk1p = wire::get_sk(r, p);
    w.sk2p = wire::get_sk(r, p);
    w.s1.s = r.bytes();
    w.s2.s = r.bytes();
    w.i1 = r.u8();
    w.i2 = r.u8();
    r.expect_done();
    return w;
  }
  friend bool operator==(const DecWitness&, const DecWitness&) = default;
};

// The column of plaintexts a key recovers from a board, with the three-case
// rule: ⊥ for an empty slot, ⊥ for anything outside M, the vote otherwise.
inline VoteVector decrypt_column(const SchemeContext& ctx, const std::vector<StatementEntry>& ballots,
                                 const PkeSecretKey& sk, Column col) {
  VoteVector out;
  out.reserve(ballots.size());
  for (const auto& e : ballots) {
    if (const auto* t = std::get_if<CtTriple>(&e)) {
      out.push_back(ctx.codec.decode(pke_decrypt(sk, (*t)[static_cast<std::size_t>(col - 1)])).as_tally_input());
    } else {
      out.push_back(kBot);
    }
  }
  return out;
}

namespace detail {
inline bool statement_well_typed(const SchemeContext& ctx, const DecStatement& x) {
  if (static_cast<int>(x.ballots.size()) != ctx.n()) return false;
  if (x.y && !ctx.cfg.in_sigma(*x.y)) return false;
  for (const auto& k : x.pks)
    if (k.g1.p() != ctx.p() || k.g2.p() != ctx.p() || k.g3.p() != ctx.p()) return false;
  for (const auto& e : x.ballots)
    if (const auto* t = std::get_if<CtTriple>(&e))
      for (const auto& c : *t)
        if (c.c1.p() != ctx.p() || c.c2.p() != ctx.p() || c.c3.p() != ctx.p()) return false;
  return true;
}

// The key material regenerates pks[i_l] and matches sk_l'.
inline bool keys_match(const SchemeContext& ctx, const DecStatement& x, const PkeSecretKey& skp, const KeyMaterial& km,
                       int i) {
  if (km.g3_exp % ctx.p() == 0 || km.x % ctx.p() == 0 || km.y % ctx.p() == 0) return false;
  auto kp = pke_keygen_from(ctx.gp, km);
  return kp.pk == x.pks[static_cast<std::size_t>(i - 1)] && kp.sk == skp;
}
}  // namespace detail

// Which form the tally check takes.
enum class DecMode {
  Standard,  // y = ⊥, or y = F(column i1) = F(column i2)
  Blank,     // y = ⊥ and F(column i1) = F(column i2) = ⊥
};

// The checker with setup randomness already expanded to key material.
inline bool check_dec_expanded(const SchemeContext& ctx, const DecStatement& x, const PkeSecretKey& sk1p,
                               const PkeSecretKey& sk2p, const KeyMaterial& km1, const KeyMaterial& km2, int i1,
                               int i2, DecMode mode = DecMode::Standard) {
  if (!(1 <= i1 && i1 < i2 && i2 <= 3)) return false;
  if (!detail::statement_well_typed(ctx, x)) return false;
  if (!detail::keys_match(ctx, x, sk1p, km1, i1) || !detail::keys_match(ctx, x, sk2p, km2, i2)) return false;
  if (mode == DecMode::Blank) {
    if (x.y) return false;
    return !ctx.cfg.eval(decrypt_column(ctx, x.ballots, sk1p, i1)) &&
           !ctx.cfg.eval(decrypt_column(ctx, x.ballots, sk2p, i2));
  }
  if (!x.y) return true;
  return ctx.cfg.eval(decrypt_column(ctx, x.ballots, sk1p, i1)) == x.y &&
         ctx.cfg.eval(decrypt_column(ctx, x.ballots, sk2p, i2)) == x.y;
}

inline bool check_dec(const SchemeContext& ctx, const DecStatement& x, const DecWitness& w,
                      DecMode mode = DecMode::Standard) {
  return check_dec_expanded(ctx, x, w.sk1p, w.sk2p, expand_key_randomness(ctx.gp, w.s1),
                            expand_key_randomness(ctx.gp, w.s2), w.i1, w.i2, mode);
}

// Same figure; the caller is responsible for ⊥-filtering the ballots first.
inline bool check_dec_full(const SchemeContext& ctx, const DecStatement& x, const DecWitness& w) {
  return check_dec(ctx, x, w, DecMode::Standard);
}

// Strict variant used to justify y = ⊥ on a board that still holds valid
// ballots: every one of them must be blank under both witnessed keys.
inline bool check_dec_blank(const SchemeContext& ctx, const DecStatement& x, const DecWitness& w) {
  return check_dec(ctx, x, w, DecMode::Blank);
}

inline constexpr const char* kRelDec = "dec";
inline constexpr const char* kRelDecFull = "dec-full";
inline constexpr const char* kRelDecBlank = "dec-blank";

inline ProofTarget dec_target(const SchemeContext& ctx, const DecStatement& x, const char* relation) {
  DecMode mode = std::string(relation) == kRelDecBlank ? DecMode::Blank : DecMode::Standard;
  const std::uint64_t p = ctx.p();
  return ProofTarget{relation, x.encode(),
                     make_acceptor([p](std::span<const std::uint8_t> b) { return DecWitness::decode(b, p); },
                                   [ctx, x, mode](const DecWitness& w) { return check_dec(ctx, x, w, mode); })};
}

// ---------------------------------------------------------------------------
// Ballot well-formedness relation of the full scheme
// ---------------------------------------------------------------------------

struct EncStatement {
  int j = 1;
  CtTriple cts;
  PkTriple pks;
  Commitment z;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    w.u64(static_cast<std::uint64_t>(j));
    for (const auto& c : cts) wire::put(w, c);
    wire::put(w, pks);
    wire::put(w, z);
    return std::move(w).take();
  }
  friend bool operator==(const EncStatement&, const EncStatement&) = default;
};

struct EncReal {
  MaybeVote m;
  std::array<EncCoins, 3> r;
  friend bool operator==(const EncReal&, const EncReal&) = default;
};

struct EncTrapdoor {
  CommitOpening u;
  friend bool operator==(const EncTrapdoor&, const EncTrapdoor&) = default;
};

struct EncWitness {
  std::variant<EncReal, EncTrapdoor> branch;

  std::vector<std::uint8_t> encode() const {
    ByteWriter w;
    if (const auto* r = std::get_if<EncReal>(&branch)) {
      w.u8(0);
      wire::put_maybe(w, r->m);
      for (const auto& c : r->r) w.u64(c.a).u64(c.b);
    } else {
      w.u8(1);
      wire::put(w, std::get<EncTrapdoor>(branch).u);
    }
    return std::move(w).take();
  }
  static EncWitness decode(std::span<const std::uint8_t> b, std::uint64_t p) {
    ByteReader rd(b);
    EncWitness w;
    auto tag = rd.u8();
    if (tag == 0) {
      EncReal real;
      real.m = wire::get_maybe(rd);
      for (auto& c : real.r) {
        c.a = wire::get_scalar(rd, p);
        c.b = wire::get_scalar(rd, p);
      }
      w.branch = real;
    } else if (tag == 1) {
      w.branch = EncTrapdoor{wire::get_opening(rd, p)};
    } else {
      throw DecodeError("unknown witness branch");
    }
    rd.expect_done();
    return w;
  }
  friend bool operator==(const EncWitness&, const EncWitness&) = default;
};

inline bool check_enc_full(const SchemeContext& ctx, const EncStatement& x, const EncWitness& w) {
  if (x.j < 1 || x.j > ctx.n()) return false;
  if (const auto* real = std::get_if<EncReal>(&w.branch)) {
    if (real->m && !ctx.codec.contains(*real->m)) return false;
    auto m = ctx.codec.encode(real->m);
    for (std::size_t l = 0; l < 3; ++l) {
      if (x.pks[l].g3.p() != ctx.p() || x.cts[l].c1.p() != ctx.p()) return false;
      if (real->r[l].a >= ctx.p() || real->r[l].b >= ctx.p()) return false;
      if (pke_encrypt(x.pks[l], m, real->r[l]) != x.cts[l]) return false;
    }
    return true;
  }
  const auto& u = std::get<EncTrapdoor>(w.branch).u;
  return u.value == 0 && verify_opening(ctx.ck, x.z, u);
}

inline constexpr const char* kRelEncFull = "enc-full";

inline ProofTarget enc_target(const SchemeContext& ctx, const EncStatement& x) {
  const std::uint64_t p = ctx.p();
  return ProofTarget{kRelEncFull, x.encode(),
                     make_acceptor([p](std::span<const std::uint8_t> b) { return EncWitness::decode(b, p); },
                                   [ctx, x](const EncWitness& w) { return check_enc_full(ctx, x, w); })};
}

}  // namespace evote
