#pragma once

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evote/group.hpp"
#include "evote/pke.hpp"

namespace evote {

// y ∈ Σ ∪ {⊥}; nullopt is ⊥.
using TallyValue = std::optional<std::int64_t>;
using VoteVector = std::vector<MaybeVote>;
using TallyFn = std::function<TallyValue(const VoteVector&)>;

inline std::string tally_to_string(const TallyValue& y) { return y ? std::to_string(*y) : "BOT"; }
inline std::string vote_to_string(const MaybeVote& v) { return v ? std::to_string(*v) : "BOT"; }

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty() || s.size() > 19) return std::nullopt;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return std::nullopt;
  if (s[i] == '0' && s.size() > i + 1) return std::nullopt;
  if (s == "-0") return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline MaybeVote parse_maybe(std::string_view s) {
  if (s == "BOT") return kBot;
  auto v = parse_int(s);
  if (!v) throw DecodeError("expected an integer or BOT, got '" + std::string(s) + "'");
  return *v;
}

class TallyConfig {
 public:
  // Sum of votes with ⊥ counted as 0; all-⊥ gives ⊥.
  static TallyConfig sum(int n, std::vector<std::int64_t> message_set) {
    if (message_set.empty()) throw ParameterError("message set must be non-empty");
    auto [lo_it, hi_it] = std::minmax_element(message_set.begin(), message_set.end());
    std::int64_t lo = n * std::min<std::int64_t>(*lo_it, 0);
    std::int64_t hi = n * std::max<std::int64_t>(*hi_it, 0);
    TallyFn f = [](const VoteVector& v) -> TallyValue {
      bool any = false;
      std::int64_t s = 0;
      for (const auto& e : v)
        if (e) {
          any = true;
          s += *e;
        }
      return any ? TallyValue{s} : std::nullopt;
    };
    return TallyConfig(n, std::move(message_set), lo, hi, "sum", std::move(f));
  }

  static TallyConfig sum(int n, int k) {
    std::vector<std::int64_t> m;
    for (int i = 0; i < k; ++i) m.push_back(i);
    return sum(n, std::move(m));
  }

  static TallyConfig by_id(const std::string& id, int n, std::vector<std::int64_t> message_set) {
    if (id == "sum") return sum(n, std::move(message_set));
    throw ParameterError("unknown tally function '" + id + "'");
  }

  // Registers an arbitrary F. The tally axiom is checked exhaustively when the
  // input space is small enough, otherwise on a deterministic sample.
  TallyConfig(int n, std::vector<std::int64_t> message_set, std::int64_t sigma_min, std::int64_t sigma_max,
              std::string fn_id, TallyFn f)
      : n_(n), m_(std::move(message_set)), lo_(sigma_min), hi_(sigma_max), id_(std::move(fn_id)), f_(std::move(f)) {
    if (n_ < 2) throw ParameterError("tally requires N >= 2");
    if (m_.empty()) throw ParameterError("message set must be non-empty");
    if (lo_ > hi_) throw ParameterError("empty result space");
    check_axiom();
  }

  int n() const { return n_; }
  const std::vector<std::int64_t>& message_set() const { return m_; }
  std::int64_t sigma_min() const { return lo_; }
  std::int64_t sigma_max() const { return hi_; }
  const std::string& fn_id() const { return id_; }
  bool in_sigma(std::int64_t y) const { return y >= lo_ && y <= hi_; }
  bool in_message_set(std::int64_t v) const { return std::find(m_.begin(), m_.end(), v) != m_.end(); }

  TallyValue eval(const VoteVector& v) const {
    if (static_cast<int>(v.size()) != n_) throw UsageError("tally input has wrong arity");
    for (const auto& e : v)
      if (e && !in_message_set(*e)) throw UsageError("tally input outside M ∪ {⊥}");
    return f_(v);
  }

  // All values of M ∪ {⊥}, ⊥ first.
  std::vector<MaybeVote> domain() const {
    std::vector<MaybeVote> d{kBot};
    for (auto v : m_) d.push_back(v);
    return d;
  }

 private:
  void check_axiom() const {
    const std::size_t k = m_.size() + 1;
    double space = 1;
    for (int i = 0; i < n_; ++i) space *= static_cast<double>(k);
    auto check = [&](const VoteVector& v) {
      bool all_bot = std::all_of(v.begin(), v.end(), [](const MaybeVote& e) { return !e; });
      TallyValue y = f_(v);
      if (all_bot != !y.has_value()) throw ParameterError("tally function '" + id_ + "' violates the ⊥ axiom");
      if (y && !in_sigma(*y)) throw ParameterError("tally function '" + id_ + "' leaves its result space");
    };
    auto d = domain();
    if (space <= 1 << 16) {
      VoteVector v(static_cast<std::size_t>(n_), kBot);
      std::vector<std::size_t> idx(static_cast<std::size_t>(n_), 0);
      for (;;) {
        for (std::size_t i = 0; i < idx.size(); ++i) v[i] = d[idx[i]];
        check(v);
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == k) idx[i++] = 0;
        if (i == idx.size()) break;
      }
    } else {
      Rng rng = make_rng(0x7a11);
      for (int t = 0; t < 4096; ++t) {
        VoteVector v(static_cast<std::size_t>(n_));
        for (auto& e : v) e = d[uniform_below(rng, k)];
        check(v);
      }
      check(VoteVector(static_cast<std::size_t>(n_), kBot));
    }
  }

  int n_;
  std::vector<std::int64_t> m_;
  std::int64_t lo_, hi_;
  std::string id_;
  TallyFn f_;
};

inline TallyValue eval_tally_fn(const TallyConfig& cfg, const VoteVector& v) { return cfg.eval(v); }

inline constexpr double kEnumerationBudget = 1 << 22;

namespace detail {
// Calls visit(fill) for every assignment of M ∪ {⊥} to `free` slots;
// stops early when visit returns true.
template <class Visit>
bool for_each_fill(const TallyConfig& cfg, std::size_t free, Visit visit) {
  auto d = cfg.domain();
  double space = 1;
  for (std::size_t i = 0; i < free; ++i) space *= static_cast<double>(d.size());
  if (space > kEnumerationBudget) throw ResourceError("enumeration budget exceeded");
  std::vector<std::size_t> idx(free, 0);
  std::vector<MaybeVote> fill(free);
  for (;;) {
    for (std::size_t i = 0; i < free; ++i) fill[i] = d[idx[i]];
    if (visit(fill)) return true;
    std::size_t i = 0;
    while (i < free && ++idx[i] == d.size()) idx[i++] = 0;
    if (i == free) return false;
  }
}
}  // namespace detail

// Is y in the range of F restricted to the fixed coordinates (1-based)?
inline bool compatible(const TallyConfig& cfg, const TallyValue& y, const std::map<int, MaybeVote>& fixed) {
  std::vector<std::size_t> free_slots;
  for (int j = 1; j <= cfg.n(); ++j)
    if (!fixed.count(j)) free_slots.push_back(static_cast<std::size_t>(j - 1));
  for (const auto& [j, v] : fixed) {
    if (j < 1 || j > cfg.n()) throw UsageError("compatible: index out of range");
    if (v && !cfg.in_message_set(*v)) throw UsageError("compatible: fixed value outside M ∪ {⊥}");
  }
  VoteVector v(static_cast<std::size_t>(cfg.n()));
  for (const auto& [j, val] : fixed) v[static_cast<std::size_t>(j - 1)] = val;
  return detail::for_each_fill(cfg, free_slots.size(), [&](const std::vector<MaybeVote>& fill) {
    for (std::size_t i = 0; i < fill.size(); ++i) v[free_slots[i]] = fill[i];
    return cfg.eval(v) == y;
  });
}

// Winning condition 3 of the privacy game: for every way of filling the
// adversarial slots S (1-based) with values of M ∪ {⊥}, F agrees on both
// challenge tuples. Entries outside M count as ⊥.
inline bool winning_condition_3(const TallyConfig& cfg, const VoteVector& m0, const VoteVector& m1,
                                const std::set<int>& s) {
  if (static_cast<int>(m0.size()) != cfg.n() || static_cast<int>(m1.size()) != cfg.n())
    throw UsageError("challenge tuples must have length N");
  auto clamp = [&](const MaybeVote& e) { return e && cfg.in_message_set(*e) ? e : kBot; };
  VoteVector a(m0.size()), b(m1.size());
  for (std::size_t i = 0; i < m0.size(); ++i) {
    a[i] = clamp(m0[i]);
    b[i] = clamp(m1[i]);
  }
  std::vector<std::size_t> slots;
  for (int j : s) {
    if (j < 1 || j > cfg.n()) throw UsageError("S index out of range");
    slots.push_back(static_cast<std::size_t>(j - 1));
  }
  bool differs = detail::for_each_fill(cfg, slots.size(), [&](const std::vector<MaybeVote>& fill) {
    for (std::size_t i = 0; i < fill.size(); ++i) a[slots[i]] = b[slots[i]] = fill[i];
    return cfg.eval(a) != cfg.eval(b);
  });
  return !differs;
}

}  // namespace evote
