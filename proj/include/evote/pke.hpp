#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "evote/group.hpp"
#include "evote/rng.hpp"

namespace evote {

// ---------------------------------------------------------------------------
// Decision Linear (BBS) encryption.
//
//   keys:     g3 <- G \ {1}, x, y <- Z_p^*,  g1 = g3^{1/x}, g2 = g3^{1/y}
//   encrypt:  (g1^a, g2^b, m * g3^{a+b})
//   decrypt:  c3 / (c1^x c2^y)
//
// Decryption is total, and a public key has at most one secret key, so every
// triple of group elements decrypts to exactly one plaintext.
// ---------------------------------------------------------------------------

struct PkePublicKey {
  GroupElement g1, g2, g3;

  GroupParams params() const { return g3.params(); }
  friend bool operator==(const PkePublicKey&, const PkePublicKey&) = default;
};

struct PkeSecretKey {
  PkePublicKey pk;
  Scalar x = 0, y = 0;

  friend bool operator==(const PkeSecretKey&, const PkeSecretKey&) = default;
};

struct PkeKeyPair {
  PkePublicKey pk;
  PkeSecretKey sk;
};

struct PkeCiphertext {
  GroupElement c1, c2, c3;

  friend bool operator==(const PkeCiphertext&, const PkeCiphertext&) = default;
};

// Setup randomness. Expansion into (g3, x, y) is a pure function of the bytes
// and the group order, so a relation checker can regenerate keys from it.
struct KeyRandomness {
  std::vector<std::uint8_t> s;

  static KeyRandomness sample(Rng& rng) { return KeyRandomness{random_bytes(rng, 16)}; }
  std::string hex() const { return to_hex(s); }
  static KeyRandomness from_hex_string(std::string_view h) { return KeyRandomness{from_hex(h)}; }

  friend bool operator==(const KeyRandomness&, const KeyRandomness&) = default;
};

// The three exponents a seed expands to. Each lies in [1, p).
struct KeyMaterial {
  Scalar g3_exp = 1, x = 1, y = 1;
  friend auto operator<=>(const KeyMaterial&, const KeyMaterial&) = default;
};

inline KeyMaterial expand_key_randomness(const GroupParams& gp, const KeyRandomness& s) {
  Rng rng = make_rng(std::span<const std::uint8_t>(s.s));
  auto nonzero = [&] { return 1 + uniform_below(rng, gp.p() - 1); };
  KeyMaterial km;
  km.g3_exp = nonzero();
  km.x = nonzero();
  km.y = nonzero();
  return km;
}

inline PkeKeyPair pke_keygen_from(const GroupParams& gp, const KeyMaterial& km) {
  const std::uint64_t p = gp.p();
  if (km.g3_exp % p == 0 || km.x % p == 0 || km.y % p == 0)
    throw UsageError("key material must be non-zero mod p");
  GroupElement g3{gp, km.g3_exp};
  PkePublicKey pk{g_exp(g3, mod_inv(km.x, p)), g_exp(g3, mod_inv(km.y, p)), g3};
  return PkeKeyPair{pk, PkeSecretKey{pk, km.x % p, km.y % p}};
}

inline PkeKeyPair pke_setup(const GroupParams& gp, const KeyRandomness& s) {
  return pke_keygen_from(gp, expand_key_randomness(gp, s));
}

inline PkeCiphertext pke_encrypt(const PkePublicKey& pk, const GroupElement& m, Scalar a, Scalar b) {
  const std::uint64_t p = pk.g3.p();
  if (m.p() != p) throw UsageError("plaintext and key belong to different groups");
  a %= p;
  b %= p;
  return PkeCiphertext{g_exp(pk.g1, a), g_exp(pk.g2, b), g_mul(m, g_exp(pk.g3, mod_add(a, b, p)))};
}

// Encryption coins (a, b) for one ciphertext.
struct EncCoins {
  Scalar a = 0, b = 0;
  static EncCoins sample(Rng& rng, std::uint64_t p) { return EncCoins{uniform_below(rng, p), uniform_below(rng, p)}; }
  friend bool operator==(const EncCoins&, const EncCoins&) = default;
};

inline PkeCiphertext pke_encrypt(const PkePublicKey& pk, const GroupElement& m, const EncCoins& r) {
  return pke_encrypt(pk, m, r.a, r.b);
}

inline GroupElement pke_decrypt(const PkeSecretKey& sk, const PkeCiphertext& ct) {
  return g_div(ct.c3, g_mul(g_exp(ct.c1, sk.x), g_exp(ct.c2, sk.y)));
}

// Every secret key that honest setup could have paired with pk. Setup draws
// g3 != 1 and x, y != 0, so the result has at most one element.
inline std::vector<PkeSecretKey> unique_sk_oracle(const PkePublicKey& pk, std::uint64_t max_p = 101) {
  const std::uint64_t p = pk.g3.p();
  if (p > max_p) throw ResourceError("unique_sk_oracle: p exceeds enumeration budget");
  std::vector<PkeSecretKey> out;
  if (pk.g3.is_identity()) return out;
  for (Scalar x = 1; x < p; ++x) {
    if (g_exp(pk.g1, x) != pk.g3) continue;
    for (Scalar y = 1; y < p; ++y) {
      if (g_exp(pk.g2, y) == pk.g3) out.push_back(PkeSecretKey{pk, x, y});
    }
  }
  return out;
}

// One seed per reachable KeyMaterial value, for oracles that must range over
// "all setup randomness": the relations only look at a seed through its
// expansion, so one representative per class covers the whole space.
inline const std::map<KeyMaterial, KeyRandomness>& seed_classes(const GroupParams& gp) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::map<KeyMaterial, KeyRandomness>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(gp.p());
  if (it != cache.end()) return it->second;
  const std::uint64_t classes = (gp.p() - 1) * (gp.p() - 1) * (gp.p() - 1);
  if (classes > 20000) throw ResourceError("seed_classes: p too large to enumerate");
  std::map<KeyMaterial, KeyRandomness> table;
  for (std::uint32_t c = 0; table.size() < classes; ++c) {
    if (c > 200 * classes) throw ResourceError("seed_classes: expansion does not cover key space");
    KeyRandomness s{{static_cast<std::uint8_t>(c >> 24), static_cast<std::uint8_t>(c >> 16),
                     static_cast<std::uint8_t>(c >> 8), static_cast<std::uint8_t>(c)}};
    table.try_emplace(expand_key_randomness(gp, s), s);
  }
  return cache.emplace(gp.p(), std::move(table)).first->second;
}

// ---------------------------------------------------------------------------
// Plaintext codec: maps M ∪ {⊥} into G by exponent.
// ---------------------------------------------------------------------------

// A value in M ∪ {⊥}; nullopt is ⊥.
using MaybeVote = std::optional<std::int64_t>;
inline constexpr std::nullopt_t kBot = std::nullopt;

enum class DecodeKind { Vote, Bottom, NotInMessageSpace };

struct Decoded {
  DecodeKind kind = DecodeKind::NotInMessageSpace;
  std::int64_t vote = 0;

  // The figure's three-case rule: ⊥ and out-of-space both count as ⊥.
  MaybeVote as_tally_input() const { return kind == DecodeKind::Vote ? MaybeVote{vote} : kBot; }
  friend bool operator==(const Decoded&, const Decoded&) = default;
};

class PlaintextCodec {
 public:
  // votes M[i] -> g^{i+1}, ⊥ -> g^0.
  static PlaintextCodec standard(const GroupParams& gp, std::vector<std::int64_t> message_set) {
    std::vector<Scalar> codes;
    for (std::size_t i = 0; i < message_set.size(); ++i) codes.push_back(i + 1);
    return PlaintextCodec(gp, std::move(message_set), 0, std::move(codes));
  }

  // M = {0, .., k-1}.
  static PlaintextCodec standard(const GroupParams& gp, int k) {
    std::vector<std::int64_t> m(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) m[static_cast<std::size_t>(i)] = i;
    return standard(gp, std::move(m));
  }

  // Signed shares s in [-bound, bound] embedded as s mod p; ⊥ -> g^{bound+1}.
  static PlaintextCodec signed_range(const GroupParams& gp, std::int64_t bound) {
    if (bound < 0) throw ParameterError("share bound must be non-negative");
    if (static_cast<std::uint64_t>(2 * bound + 2) > gp.p())
      throw ParameterError("group order too small for the share range");
    std::vector<std::int64_t> m;
    std::vector<Scalar> codes;
    for (std::int64_t s = -bound; s <= bound; ++s) {
      m.push_back(s);
      codes.push_back(mod_reduce(s, gp.p()));
    }
    return PlaintextCodec(gp, std::move(m), static_cast<Scalar>(bound + 1), std::move(codes));
  }

  PlaintextCodec(const GroupParams& gp, std::vector<std::int64_t> message_set, Scalar bottom_code,
                 std::vector<Scalar> vote_codes)
      : gp_(gp), message_set_(std::move(message_set)), bottom_code_(bottom_code), codes_(std::move(vote_codes)) {
    if (message_set_.empty()) throw ParameterError("message set must be non-empty");
    if (codes_.size() != message_set_.size()) throw ParameterError("one code per message required");
    std::vector<Scalar> all = codes_;
    all.push_back(bottom_code_);
    for (auto c : all)
      if (c >= gp.p()) throw ParameterError("plaintext code out of range");
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) throw ParameterError("plaintext codes collide");
    auto sorted_m = message_set_;
    std::sort(sorted_m.begin(), sorted_m.end());
    if (std::adjacent_find(sorted_m.begin(), sorted_m.end()) != sorted_m.end())
      throw ParameterError("message set has duplicates");
  }

  const GroupParams& params() const { return gp_; }
  const std::vector<std::int64_t>& message_set() const { return message_set_; }
  const std::vector<Scalar>& vote_codes() const { return codes_; }
  Scalar bottom_code() const { return bottom_code_; }

  bool contains(std::int64_t v) const {
    return std::find(message_set_.begin(), message_set_.end(), v) != message_set_.end();
  }

  GroupElement encode(const MaybeVote& v) const {
    if (!v) return GroupElement{gp_, bottom_code_};
    auto it = std::find(message_set_.begin(), message_set_.end(), *v);
    if (it == message_set_.end()) throw UsageError("vote " + std::to_string(*v) + " is not in the message set");
    return GroupElement{gp_, codes_[static_cast<std::size_t>(it - message_set_.begin())]};
  }

  Decoded decode(const GroupElement& m) const {
    if (m.p() != gp_.p()) throw UsageError("plaintext from a different group");
    if (m.exp() == bottom_code_) return Decoded{DecodeKind::Bottom, 0};
    auto it = std::find(codes_.begin(), codes_.end(), m.exp());
    if (it == codes_.end()) return Decoded{DecodeKind::NotInMessageSpace, 0};
    return Decoded{DecodeKind::Vote, message_set_[static_cast<std::size_t>(it - codes_.begin())]};
  }

  friend bool operator==(const PlaintextCodec&, const PlaintextCodec&) = default;

 private:
  GroupParams gp_;
  std::vector<std::int64_t> message_set_;
  Scalar bottom_code_;
  std::vector<Scalar> codes_;
};

}  // namespace evote
