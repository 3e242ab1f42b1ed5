#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "evote/errors.hpp"

namespace evote {

// Scalars live in Z_p and are always stored reduced.
using Scalar = std::uint64_t;

inline constexpr std::uint64_t kMaxGroupOrder = (1ULL << 31) - 1;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Order-p symmetric bilinear group. The "toy" backend represents every element
// by its discrete log, so pairing and dlog are free and everything can be
// enumerated at small p. It is not hiding in any sense.
class GroupParams {
 public:
  static GroupParams create(std::uint64_t p) {
    if (p < 5) throw ParameterError("group order must be at least 5, got " + std::to_string(p));
    if (p > kMaxGroupOrder) throw ParameterError("group order too large for the toy backend");
    if (!is_prime(p)) throw ParameterError("group order must be prime, got " + std::to_string(p));
    return GroupParams{p};
  }

  std::uint64_t p() const { return p_; }
  std::string_view backend() const { return "toy"; }

  friend bool operator==(const GroupParams&, const GroupParams&) = default;

 private:
  explicit GroupParams(std::uint64_t p) : p_(p) {}
  std::uint64_t p_;
};

inline Scalar mod_reduce(std::int64_t v, std::uint64_t p) {
  auto m = static_cast<std::int64_t>(p);
  std::int64_t r = v % m;
  return static_cast<Scalar>(r < 0 ? r + m : r);
}

inline Scalar mod_add(Scalar a, Scalar b, std::uint64_t p) { return (a + b) % p; }
inline Scalar mod_sub(Scalar a, Scalar b, std::uint64_t p) { return (a + p - b) % p; }
inline Scalar mod_mul(Scalar a, Scalar b, std::uint64_t p) { return (a * b) % p; }

inline Scalar mod_pow(Scalar base, std::uint64_t e, std::uint64_t p) {
  Scalar r = 1 % p;
  base %= p;
  while (e) {
    if (e & 1) r = mod_mul(r, base, p);
    base = mod_mul(base, base, p);
    e >>= 1;
  }
  return r;
}

// Inverse of a non-zero scalar (Fermat).
inline Scalar mod_inv(Scalar a, std::uint64_t p) {
  if (a % p == 0) throw UsageError("zero has no inverse mod p");
  return mod_pow(a, p - 2, p);
}

namespace detail {
template <class Tag>
class ExpElement {
 public:
  ExpElement() = default;
  ExpElement(const GroupParams& gp, Scalar exp) : p_(gp.p()), exp_(exp % gp.p()) {}

  std::uint64_t p() const { return p_; }
  Scalar exp() const { return exp_; }
  bool is_identity() const { return exp_ == 0; }
  GroupParams params() const { return GroupParams::create(p_); }

  friend bool operator==(const ExpElement&, const ExpElement&) = default;
  friend auto operator<=>(const ExpElement&, const ExpElement&) = default;

 protected:
  struct Raw {};
  ExpElement(Raw, std::uint64_t p, Scalar exp) : p_(p), exp_(exp) {}
  std::uint64_t p_ = 0;
  Scalar exp_ = 0;
};
}  // namespace detail

// Element of G, written multiplicatively; stores log_g.
class GroupElement : public detail::ExpElement<struct GTag> {
 public:
  using ExpElement::ExpElement;
  static GroupElement from_raw(std::uint64_t p, Scalar exp) { return GroupElement{Raw{}, p, exp % p}; }

 private:
  GroupElement(Raw r, std::uint64_t p, Scalar e) : ExpElement(r, p, e) {}
};

// Element of G_T; stores log_{e(g,g)}.
class GtElement : public detail::ExpElement<struct GtTag> {
 public:
  using ExpElement::ExpElement;
  static GtElement from_raw(std::uint64_t p, Scalar exp) { return GtElement{Raw{}, p, exp % p}; }

 private:
  GtElement(Raw r, std::uint64_t p, Scalar e) : ExpElement(r, p, e) {}
};

inline GroupElement generator(const GroupParams& gp) { return GroupElement{gp, 1}; }
inline GroupElement identity(const GroupParams& gp) { return GroupElement{gp, 0}; }

namespace detail {
inline void require_same(std::uint64_t a, std::uint64_t b) {
  if (a != b) throw UsageError("group elements belong to different groups");
}
}  // namespace detail

inline GroupElement g_mul(const GroupElement& a, const GroupElement& b) {
  detail::require_same(a.p(), b.p());
  return GroupElement::from_raw(a.p(), mod_add(a.exp(), b.exp(), a.p()));
}

inline GroupElement g_div(const GroupElement& a, const GroupElement& b) {
  detail::require_same(a.p(), b.p());
  return GroupElement::from_raw(a.p(), mod_sub(a.exp(), b.exp(), a.p()));
}

inline GroupElement g_inv(const GroupElement& a) { return GroupElement::from_raw(a.p(), mod_sub(0, a.exp(), a.p())); }

inline GroupElement g_exp(const GroupElement& a, Scalar k) {
  return GroupElement::from_raw(a.p(), mod_mul(a.exp(), k % a.p(), a.p()));
}

inline GtElement pair(const GroupElement& a, const GroupElement& b) {
  detail::require_same(a.p(), b.p());
  return GtElement::from_raw(a.p(), mod_mul(a.exp(), b.exp(), a.p()));
}

inline GtElement gt_mul(const GtElement& a, const GtElement& b) {
  detail::require_same(a.p(), b.p());
  return GtElement::from_raw(a.p(), mod_add(a.exp(), b.exp(), a.p()));
}

inline GtElement gt_exp(const GtElement& a, Scalar k) {
  return GtElement::from_raw(a.p(), mod_mul(a.exp(), k % a.p(), a.p()));
}

// Canonical encoding: decimal exponent.
inline std::string serialize_element(const GroupElement& a) { return std::to_string(a.exp()); }

inline Scalar parse_scalar(std::string_view s, std::uint64_t bound) {
  if (s.empty() || s.size() > 20) throw DecodeError("empty or oversized decimal");
  if (s.size() > 1 && s[0] == '0') throw DecodeError("non-canonical decimal (leading zero)");
  Scalar v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw DecodeError("malformed decimal: " + std::string(s));
  if (v >= bound) throw DecodeError("value " + std::string(s) + " out of range");
  return v;
}

inline GroupElement parse_element(const GroupParams& gp, std::string_view s) {
  return GroupElement{gp, parse_scalar(s, gp.p())};
}

}  // namespace evote
