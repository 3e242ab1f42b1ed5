#pragma once

#include <string>
#include <vector>

#include "evote/group.hpp"
#include "evote/rng.hpp"

namespace evote {

// BBS-style commitment: Com(v; r1, r2) = (h1^r1, h2^r2, h3^{r1+r2} g^v).
// (d1, d2) fix r1, r2 because h1, h2 are non-identity, and then d3 fixes v,
// so no commitment opens to two values.
struct CommitKey {
  GroupElement h1, h2, h3;

  static CommitKey from_exponents(const GroupParams& gp, Scalar e1, Scalar e2, Scalar e3) {
    CommitKey ck{GroupElement{gp, e1}, GroupElement{gp, e2}, GroupElement{gp, e3}};
    if (ck.h1.is_identity() || ck.h2.is_identity() || ck.h3.is_identity())
      throw ParameterError("commitment key elements must be non-identity");
    return ck;
  }

  // Fixed public derivation from the group order alone.
  static CommitKey derive(const GroupParams& gp) {
    const std::string tag = "evote/commit-key/v1/p=" + std::to_string(gp.p());
    Rng rng = make_rng(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size()));
    auto nz = [&] { return 1 + uniform_below(rng, gp.p() - 1); };
    Scalar e1 = nz(), e2 = nz(), e3 = nz();
    return from_exponents(gp, e1, e2, e3);
  }

  friend bool operator==(const CommitKey&, const CommitKey&) = default;
};

struct Commitment {
  GroupElement d1, d2, d3;
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

struct CommitOpening {
  Scalar value = 0, r1 = 0, r2 = 0;
  friend bool operator==(const CommitOpening&, const CommitOpening&) = default;
};

inline Commitment commit(const CommitKey& ck, Scalar value, Scalar r1, Scalar r2) {
  const auto p = ck.h3.p();
  GroupElement g = GroupElement::from_raw(p, 1);
  return Commitment{g_exp(ck.h1, r1), g_exp(ck.h2, r2),
                    g_mul(g_exp(ck.h3, mod_add(r1 % p, r2 % p, p)), g_exp(g, value % p))};
}

inline Commitment commit(const CommitKey& ck, const CommitOpening& o) { return commit(ck, o.value, o.r1, o.r2); }

inline CommitOpening sample_opening(Rng& rng, std::uint64_t p, Scalar value) {
  Scalar r1 = uniform_below(rng, p);
  Scalar r2 = uniform_below(rng, p);
  return CommitOpening{value % p, r1, r2};
}

inline bool verify_opening(const CommitKey& ck, const Commitment& c, const CommitOpening& o) {
  const auto p = ck.h3.p();
  if (c.d1.p() != p || c.d2.p() != p || c.d3.p() != p) return false;
  if (o.value >= p || o.r1 >= p || o.r2 >= p) return false;
  return commit(ck, o) == c;
}

struct CommittedTuple {
  std::vector<Commitment> commitments;
  std::vector<CommitOpening> openings;
};

inline CommittedTuple commit_tuple(const CommitKey& ck, const std::vector<Scalar>& values, Rng& rng) {
  if (values.empty()) throw UsageError("commit_tuple: empty tuple");
  CommittedTuple out;
  for (auto v : values) {
    auto o = sample_opening(rng, ck.h3.p(), v);
    out.commitments.push_back(commit(ck, o));
    out.openings.push_back(o);
  }
  return out;
}

// OK iff every coordinate opens to the claimed value.
inline bool verify_tuple(const CommitKey& ck, const std::vector<Commitment>& cs, const std::vector<CommitOpening>& os,
                         const std::vector<Scalar>& values) {
  if (cs.size() != os.size() || cs.size() != values.size()) return false;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (os[i].value != values[i] % ck.h3.p()) return false;
    if (!verify_opening(ck, cs[i], os[i])) return false;
  }
  return true;
}

}  // namespace evote
