#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "evote/relations.hpp"

namespace evote {

// ---------------------------------------------------------------------------
// NAND circuits
// ---------------------------------------------------------------------------

using Wire = std::uint32_t;

struct Gate {
  Wire a, b;
  friend bool operator==(const Gate&, const Gate&) = default;
};

// Wires 0..num_inputs-1 are inputs; gate i drives wire num_inputs + i.
struct BooleanCircuit {
  std::uint32_t num_inputs = 0;
  std::vector<Gate> gates;
  Wire output = 0;

  std::size_t num_wires() const { return num_inputs + gates.size(); }

  void validate() const {
    for (std::size_t i = 0; i < gates.size(); ++i) {
      const Wire self = static_cast<Wire>(num_inputs + i);
      if (gates[i].a >= self || gates[i].b >= self) throw UsageError("circuit gate reads an undefined wire");
    }
    if (output >= num_wires()) throw UsageError("circuit output is undefined");
  }

  std::string serialize() const {
    std::ostringstream os;
    os << "evote-circuit v1 inputs " << num_inputs << " gates " << gates.size() << " output " << output << "\n";
    for (std::size_t i = 0; i < gates.size(); ++i) os << num_inputs + i << ' ' << gates[i].a << ' ' << gates[i].b << "\n";
    return os.str();
  }

  static BooleanCircuit parse(const std::string& text) {
    std::istringstream is(text);
    std::string magic, version, k1, k2, k3;
    BooleanCircuit c;
    std::size_t n_gates = 0;
    if (!(is >> magic >> version >> k1 >> c.num_inputs >> k2 >> n_gates >> k3 >> c.output) || magic != "evote-circuit" ||
        version != "v1" || k1 != "inputs" || k2 != "gates" || k3 != "output")
      throw DecodeError("bad circuit header");
    for (std::size_t i = 0; i < n_gates; ++i) {
      std::size_t id = 0;
      Gate g{};
      if (!(is >> id >> g.a >> g.b) || id != c.num_inputs + i) throw DecodeError("bad circuit gate line");
      c.gates.push_back(g);
    }
    c.validate();
    return c;
  }
};

// Evaluates 64 independent assignments at once; bit t of inputs[i] is input i
// of lane t.
inline std::uint64_t eval_circuit_batch(const BooleanCircuit& c, const std::vector<std::uint64_t>& inputs) {
  if (inputs.size() != c.num_inputs) throw UsageError("circuit input arity mismatch");
  std::vector<std::uint64_t> w(c.num_wires());
  std::copy(inputs.begin(), inputs.end(), w.begin());
  std::size_t i = c.num_inputs;
  for (const auto& g : c.gates) w[i++] = ~(w[g.a] & w[g.b]);
  return w[c.output];
}

inline bool eval_circuit(const BooleanCircuit& c, const std::vector<bool>& bits) {
  if (bits.size() != c.num_inputs) throw UsageError("circuit input arity mismatch");
  std::vector<std::uint64_t> in(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) in[i] = bits[i] ? 1 : 0;
  return eval_circuit_batch(c, in) & 1;
}

// Little-endian bit vector (index 0 is the least significant bit).
using Word = std::vector<Wire>;

class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::uint32_t num_inputs) {
    if (num_inputs == 0) throw UsageError("circuit needs at least one input");
    c_.num_inputs = num_inputs;
    Wire x = 0;
    one_ = nand(x, nand(x, x));
    zero_ = nand(one_, one_);
  }

  Wire input(std::uint32_t i) const {
    if (i >= c_.num_inputs) throw UsageError("input index out of range");
    return i;
  }
  // A field stored big-endian at input offset `off`.
  Word input_word(std::uint32_t off, std::size_t width) const {
    Word w(width);
    for (std::size_t i = 0; i < width; ++i) w[i] = input(static_cast<std::uint32_t>(off + width - 1 - i));
    return w;
  }

  Wire one() const { return one_; }
  Wire zero() const { return zero_; }

  Wire nand(Wire a, Wire b) {
    c_.gates.push_back(Gate{a, b});
    return static_cast<Wire>(c_.num_inputs + c_.gates.size() - 1);
  }
  Wire not_(Wire a) { return nand(a, a); }
  Wire and_(Wire a, Wire b) { return not_(nand(a, b)); }
  Wire or_(Wire a, Wire b) { return nand(not_(a), not_(b)); }
  Wire xor_(Wire a, Wire b) {
    Wire t = nand(a, b);
    return nand(nand(a, t), nand(b, t));
  }
  Wire xnor(Wire a, Wire b) { return not_(xor_(a, b)); }
  // s ? a : b
  Wire mux(Wire s, Wire a, Wire b) { return nand(nand(s, a), nand(not_(s), b)); }

  Wire all(const std::vector<Wire>& ws) {
    Wire acc = one_;
    for (auto w : ws) acc = and_(acc, w);
    return acc;
  }
  Wire any(const std::vector<Wire>& ws) {
    Wire acc = zero_;
    for (auto w : ws) acc = or_(acc, w);
    return acc;
  }

  Word constant(std::uint64_t v, std::size_t width) const {
    Word w(width);
    for (std::size_t i = 0; i < width; ++i) w[i] = (v >> i) & 1 ? one_ : zero_;
    return w;
  }
  Word mux_word(Wire s, const Word& a, const Word& b) {
    Word out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = mux(s, a[i], b[i]);
    return out;
  }
  Word extend(const Word& a, std::size_t width, bool sign = false) const {
    Word out = a;
    Wire fill = sign && !a.empty() ? a.back() : zero_;
    out.resize(width, fill);
    return out;
  }

  Wire eq(const Word& a, const Word& b) {
    std::vector<Wire> bits;
    for (std::size_t i = 0; i < a.size(); ++i) bits.push_back(xnor(a[i], b[i]));
    return all(bits);
  }
  Wire eq_const(const Word& a, std::uint64_t v) { return eq(a, constant(v, a.size())); }
  Wire is_zero(const Word& a) { return eq_const(a, 0); }

  // Ripple-carry a + b + cin over max width; returns sum of that width and the carry.
  std::pair<Word, Wire> add_carry(const Word& a, const Word& b, Wire cin) {
    const std::size_t n = std::max(a.size(), b.size());
    Word x = extend(a, n), y = extend(b, n), s(n);
    Wire c = cin;
    for (std::size_t i = 0; i < n; ++i) {
      Wire t = xor_(x[i], y[i]);
      s[i] = xor_(t, c);
      c = nand(nand(x[i], y[i]), nand(c, t));
    }
    return {s, c};
  }
  // Full-precision unsigned sum (one extra bit).
  Word add(const Word& a, const Word& b) {
    auto [s, c] = add_carry(a, b, zero_);
    s.push_back(c);
    return s;
  }
  // a - b over the width of a; the flag is 1 iff a >= b (unsigned).
  std::pair<Word, Wire> sub(const Word& a, const Word& b) {
    Word nb = extend(b, a.size());
    for (auto& w : nb) w = not_(w);
    return add_carry(a, nb, one_);
  }
  Wire ge_const(const Word& a, std::uint64_t v) {
    if (v >> a.size()) return zero_;
    return sub(a, constant(v, a.size())).second;
  }
  Wire lt_const(const Word& a, std::uint64_t v) { return not_(ge_const(a, v)); }

  // --- arithmetic mod p on width-w words holding values in [0, p) ---------

  Word add_mod(const Word& a, const Word& b, std::uint64_t p) {
    const std::size_t w = a.size();
    Word s = add(a, b);
    auto [d, ge] = sub(s, constant(p, s.size()));
    s.resize(w);
    d.resize(w);
    return mux_word(ge, d, s);
  }
  Word sub_mod(const Word& a, const Word& b, std::uint64_t p) {
    auto [d, no_borrow] = sub(a, b);
    auto [wrapped, unused] = add_carry(d, constant(p, d.size()), zero_);
    (void)unused;
    return mux_word(no_borrow, d, wrapped);
  }
  Word mul_mod(const Word& a, const Word& b, std::uint64_t p) {
    Word acc = constant(0, a.size());
    for (std::size_t i = b.size(); i-- > 0;) {
      acc = add_mod(acc, acc, p);
      acc = mux_word(b[i], add_mod(acc, a, p), acc);
    }
    return acc;
  }
  Word mul_const_mod(const Word& a, std::uint64_t k, std::uint64_t p) {
    k %= p;
    Word acc = constant(0, a.size());
    if (k == 0) return acc;
    for (int i = std::bit_width(k) - 1; i >= 0; --i) {
      acc = add_mod(acc, acc, p);
      if ((k >> i) & 1) acc = add_mod(acc, a, p);
    }
    return acc;
  }
  // Square-and-multiply with a secret exponent word.
  Word pow_mod(const Word& base, const Word& e, std::uint64_t p) {
    Word acc = constant(1 % p, base.size());
    for (std::size_t i = e.size(); i-- > 0;) {
      acc = mul_mod(acc, acc, p);
      acc = mux_word(e[i], mul_mod(acc, base, p), acc);
    }
    return acc;
  }

  BooleanCircuit finish(Wire out) && {
    c_.output = out;
    c_.validate();
    return std::move(c_);
  }

 private:
  BooleanCircuit c_;
  Wire one_ = 0, zero_ = 0;
};

// ---------------------------------------------------------------------------
// Input layouts
// ---------------------------------------------------------------------------

inline std::size_t field_width(std::uint64_t p) { return static_cast<std::size_t>(std::bit_width(p - 1)); }

// Packs named fields, each big-endian, into one input bit vector.
class InputLayout {
 public:
  std::uint32_t add(const std::string& name, std::size_t width) {
    auto off = total_;
    fields_.push_back({name, off, width});
    total_ += static_cast<std::uint32_t>(width);
    return off;
  }
  std::uint32_t size() const { return total_; }

  struct Field {
    std::string name;
    std::uint32_t offset;
    std::size_t width;
  };
  const std::vector<Field>& fields() const { return fields_; }

 private:
  std::vector<Field> fields_;
  std::uint32_t total_ = 0;
};

class BitWriter {
 public:
  void put(std::uint64_t v, std::size_t width) {
    for (std::size_t i = width; i-- > 0;) bits_.push_back((v >> i) & 1);
  }
  void put_signed(std::int64_t v, std::size_t width) { put(static_cast<std::uint64_t>(v), width); }
  std::vector<bool> take() && { return std::move(bits_); }
  std::size_t size() const { return bits_.size(); }

 private:
  std::vector<bool> bits_;
};

// ---------------------------------------------------------------------------
// Relation compilers
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kCircuitMaxP = 101;
inline constexpr int kCircuitMaxN = 3;

namespace detail {
inline void check_circuit_budget(const SchemeContext& ctx) {
  if (ctx.p() > kCircuitMaxP || ctx.n() > kCircuitMaxN) throw ResourceError("relation too large to compile");
  if (ctx.cfg.fn_id() != "sum") throw UsageError("the circuit compiler supports the sum tally only");
}

inline std::size_t signed_width(std::int64_t bound) {
  return static_cast<std::size_t>(std::bit_width(static_cast<std::uint64_t>(bound))) + 2;
}

// Width that holds every tally and Σ bound in two's complement.
inline std::size_t tally_width(const SchemeContext& ctx) {
  std::int64_t b = std::max(std::abs(ctx.cfg.sigma_min()), std::abs(ctx.cfg.sigma_max()));
  for (auto v : ctx.cfg.message_set()) b = std::max(b, std::abs(v) * ctx.n());
  return signed_width(b);
}
}  // namespace detail

struct CompiledRelation {
  std::string relation;
  BooleanCircuit circuit;
  InputLayout layout;
};

// Statement: per slot [present, parsed, 9 fields], pks (9 fields), y [present, value].
// Witness: sk1' (5 fields), sk2' (5 fields), key material 1 and 2 (3 fields
// each), i1, i2 (2 bits each). Setup randomness enters as its expansion.
inline CompiledRelation compile_dec(const SchemeContext& ctx) {
  detail::check_circuit_budget(ctx);
  const std::uint64_t p = ctx.p();
  const std::size_t w = field_width(p);
  const std::size_t yw = detail::tally_width(ctx);
  const int n = ctx.n();

  InputLayout L;
  struct SlotIn {
    std::uint32_t present, parsed, fields;
  };
  std::vector<SlotIn> slots;
  for (int j = 0; j < n; ++j) {
    auto tag = "ballot" + std::to_string(j + 1);
    SlotIn s;
    s.present = L.add(tag + ".present", 1);
    s.parsed = L.add(tag + ".parsed", 1);
    s.fields = L.add(tag + ".cts", 9 * w);
    slots.push_back(s);
  }
  auto pks_off = L.add("pks", 9 * w);
  auto y_present = L.add("y.present", 1);
  auto y_val = L.add("y.value", yw);
  auto sk_off = std::array<std::uint32_t, 2>{L.add("sk1", 5 * w), L.add("sk2", 5 * w)};
  auto km_off = std::array<std::uint32_t, 2>{L.add("km1", 3 * w), L.add("km2", 3 * w)};
  auto i_off = std::array<std::uint32_t, 2>{L.add("i1", 2), L.add("i2", 2)};

  CircuitBuilder b(L.size());
  std::vector<Wire> ok;
  auto field = [&](std::uint32_t off, std::size_t k) {
    auto f = b.input_word(static_cast<std::uint32_t>(off + k * w), w);
    ok.push_back(b.lt_const(f, p));
    return f;
  };

  // indices: (1,2), (1,3) or (2,3)
  Word i1 = b.input_word(i_off[0], 2), i2 = b.input_word(i_off[1], 2);
  Wire i12 = b.and_(b.eq_const(i1, 1), b.eq_const(i2, 2));
  Wire i13 = b.and_(b.eq_const(i1, 1), b.eq_const(i2, 3));
  Wire i23 = b.and_(b.eq_const(i1, 2), b.eq_const(i2, 3));
  ok.push_back(b.any({i12, i13, i23}));
  // one-hot column selectors for each witness half
  std::array<std::array<Wire, 3>, 2> sel{
      std::array<Wire, 3>{b.or_(i12, i13), i23, b.zero()},
      std::array<Wire, 3>{b.zero(), i12, b.or_(i13, i23)}};
  auto pick = [&](const std::array<Wire, 3>& s, const std::array<Word, 3>& opts) {
    Word out = b.constant(0, w);
    for (std::size_t c = 0; c < 3; ++c) out = b.mux_word(s[c], opts[c], out);
    return out;
  };

  std::array<std::array<Word, 3>, 3> pk;  // pk[column][g1,g2,g3]
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t e = 0; e < 3; ++e) pk[c][e] = field(pks_off, 3 * c + e);

  std::array<Word, 2> skx, sky;
  for (std::size_t l = 0; l < 2; ++l) {
    std::array<Word, 3> sk_pk{field(sk_off[l], 0), field(sk_off[l], 1), field(sk_off[l], 2)};
    skx[l] = field(sk_off[l], 3);
    sky[l] = field(sk_off[l], 4);
    Word g3e = field(km_off[l], 0), kx = field(km_off[l], 1), ky = field(km_off[l], 2);
    ok.push_back(b.not_(b.is_zero(g3e)));
    ok.push_back(b.not_(b.is_zero(kx)));
    ok.push_back(b.not_(b.is_zero(ky)));
    std::array<Word, 3> chosen;
    for (std::size_t e = 0; e < 3; ++e) chosen[e] = pick(sel[l], {pk[0][e], pk[1][e], pk[2][e]});
    // regenerated key equals pks[i_l]: g3 = g^{g3e}, g1^x = g3, g2^y = g3
    ok.push_back(b.eq(chosen[2], g3e));
    ok.push_back(b.eq(b.mul_mod(chosen[0], kx, p), g3e));
    ok.push_back(b.eq(b.mul_mod(chosen[1], ky, p), g3e));
    // sk_l' equals the regenerated secret key
    for (std::size_t e = 0; e < 3; ++e) ok.push_back(b.eq(sk_pk[e], chosen[e]));
    ok.push_back(b.eq(skx[l], kx));
    ok.push_back(b.eq(sky[l], ky));
  }

  // y well-typed
  Word y = b.input_word(y_val, yw);
  Wire yp = b.input(y_present);
  auto le_signed = [&](const Word& a, std::int64_t c) {  // a <= c
    Word ce = b.constant(static_cast<std::uint64_t>(c), yw + 1);
    auto [d, carry] = b.sub(ce, b.extend(a, yw + 1, true));
    (void)carry;
    return b.not_(d.back());
  };
  auto ge_signed = [&](const Word& a, std::int64_t c) {  // a >= c
    Word ce = b.constant(static_cast<std::uint64_t>(c), yw + 1);
    auto [d, carry] = b.sub(b.extend(a, yw + 1, true), ce);
    (void)carry;
    return b.not_(d.back());
  };
  ok.push_back(b.or_(b.not_(yp), b.and_(ge_signed(y, ctx.cfg.sigma_min()), le_signed(y, ctx.cfg.sigma_max()))));
  ok.push_back(b.or_(yp, b.is_zero(y)));

  // decrypt and tally each witnessed column
  const auto& codes = ctx.codec.vote_codes();
  const auto& votes = ctx.codec.message_set();
  std::array<Word, 2> sums{b.constant(0, yw), b.constant(0, yw)};
  std::array<Wire, 2> any_vote{b.zero(), b.zero()};
  for (const auto& s : slots) {
    Wire present = b.input(s.present), parsed = b.input(s.parsed);
    ok.push_back(b.or_(present, b.not_(parsed)));
    Wire is_ballot = b.and_(present, parsed);
    std::array<std::array<Word, 3>, 3> ct;  // ct[column][c1,c2,c3]
    std::vector<Wire> all_zero;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t e = 0; e < 3; ++e) {
        ct[c][e] = field(s.fields, 3 * c + e);
        all_zero.push_back(b.is_zero(ct[c][e]));
      }
    ok.push_back(b.or_(is_ballot, b.all(all_zero)));
    for (std::size_t l = 0; l < 2; ++l) {
      std::array<Word, 3> c;
      for (std::size_t e = 0; e < 3; ++e) c[e] = pick(sel[l], {ct[0][e], ct[1][e], ct[2][e]});
      Word m = b.sub_mod(b.sub_mod(c[2], b.mul_mod(skx[l], c[0], p), p), b.mul_mod(sky[l], c[1], p), p);
      for (std::size_t i = 0; i < codes.size(); ++i) {
        Wire hit = b.and_(is_ballot, b.eq_const(m, codes[i]));
        any_vote[l] = b.or_(any_vote[l], hit);
        Word contrib = b.mux_word(hit, b.constant(static_cast<std::uint64_t>(votes[i]), yw), b.constant(0, yw));
        sums[l] = b.add_carry(sums[l], contrib, b.zero()).first;
      }
    }
  }
  for (std::size_t l = 0; l < 2; ++l) ok.push_back(b.or_(b.not_(yp), b.and_(any_vote[l], b.eq(sums[l], y))));

  Wire out = b.all(ok);
  return CompiledRelation{kRelDec, std::move(b).finish(out), std::move(L)};
}

inline std::vector<bool> encode_dec_inputs(const SchemeContext& ctx, const DecStatement& x, const PkeSecretKey& sk1p,
                                           const PkeSecretKey& sk2p, const KeyMaterial& km1, const KeyMaterial& km2,
                                           int i1, int i2) {
  const std::size_t w = field_width(ctx.p());
  const std::size_t yw = detail::tally_width(ctx);
  if (static_cast<int>(x.ballots.size()) != ctx.n()) throw UsageError("statement has the wrong number of slots");
  BitWriter bw;
  for (const auto& e : x.ballots) {
    const auto* t = std::get_if<CtTriple>(&e);
    bw.put(is_bottom(e) ? 0 : 1, 1);
    bw.put(t ? 1 : 0, 1);
    for (std::size_t c = 0; c < 3; ++c) {
      bw.put(t ? (*t)[c].c1.exp() : 0, w);
      bw.put(t ? (*t)[c].c2.exp() : 0, w);
      bw.put(t ? (*t)[c].c3.exp() : 0, w);
    }
  }
  for (const auto& k : x.pks) {
    bw.put(k.g1.exp(), w);
    bw.put(k.g2.exp(), w);
    bw.put(k.g3.exp(), w);
  }
  bw.put(x.y ? 1 : 0, 1);
  bw.put_signed(x.y.value_or(0), yw);
  for (const auto* sk : {&sk1p, &sk2p}) {
    bw.put(sk->pk.g1.exp(), w);
    bw.put(sk->pk.g2.exp(), w);
    bw.put(sk->pk.g3.exp(), w);
    bw.put(sk->x, w);
    bw.put(sk->y, w);
  }
  for (const auto* km : {&km1, &km2}) {
    bw.put(km->g3_exp, w);
    bw.put(km->x, w);
    bw.put(km->y, w);
  }
  bw.put(static_cast<std::uint64_t>(i1), 2);
  bw.put(static_cast<std::uint64_t>(i2), 2);
  return std::move(bw).take();
}

// Statement: j, cts (9 fields), pks (9 fields), Z (3 fields).
// Witness: branch bit, real part [m code, a1 b1 a2 b2 a3 b3], trapdoor part
// [value, r1, r2]; the unused part must be all zero.
inline CompiledRelation compile_enc_full(const SchemeContext& ctx) {
  detail::check_circuit_budget(ctx);
  const std::uint64_t p = ctx.p();
  const std::size_t w = field_width(p);
  const std::size_t jw = static_cast<std::size_t>(std::bit_width(static_cast<std::uint64_t>(ctx.n())));

  InputLayout L;
  auto j_off = L.add("j", jw);
  auto cts_off = L.add("cts", 9 * w);
  auto pks_off = L.add("pks", 9 * w);
  auto z_off = L.add("Z", 3 * w);
  auto br_off = L.add("branch", 1);
  auto real_off = L.add("real", 7 * w);
  auto trap_off = L.add("trapdoor", 3 * w);

  CircuitBuilder b(L.size());
  std::vector<Wire> ok;
  auto field = [&](std::uint32_t off, std::size_t k) {
    auto f = b.input_word(static_cast<std::uint32_t>(off + k * w), w);
    ok.push_back(b.lt_const(f, p));
    return f;
  };
  Word j = b.input_word(j_off, jw);
  ok.push_back(b.not_(b.is_zero(j)));
  ok.push_back(b.not_(b.ge_const(j, static_cast<std::uint64_t>(ctx.n()) + 1)));

  std::array<std::array<Word, 3>, 3> ct, pk;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t e = 0; e < 3; ++e) {
      ct[c][e] = field(cts_off, 3 * c + e);
      pk[c][e] = field(pks_off, 3 * c + e);
    }
  std::array<Word, 3> z{field(z_off, 0), field(z_off, 1), field(z_off, 2)};
  Wire trapdoor = b.input(br_off);
  std::vector<Word> real, trap;
  for (std::size_t k = 0; k < 7; ++k) real.push_back(field(real_off, k));
  for (std::size_t k = 0; k < 3; ++k) trap.push_back(field(trap_off, k));

  // real branch
  std::vector<Wire> real_ok;
  const Word& m = real[0];
  std::vector<Wire> is_code{b.eq_const(m, ctx.codec.bottom_code())};
  for (auto c : ctx.codec.vote_codes()) is_code.push_back(b.eq_const(m, c));
  real_ok.push_back(b.any(is_code));
  for (std::size_t l = 0; l < 3; ++l) {
    const Word& a = real[1 + 2 * l];
    const Word& r = real[2 + 2 * l];
    real_ok.push_back(b.eq(ct[l][0], b.mul_mod(pk[l][0], a, p)));
    real_ok.push_back(b.eq(ct[l][1], b.mul_mod(pk[l][1], r, p)));
    real_ok.push_back(b.eq(ct[l][2], b.add_mod(m, b.mul_mod(pk[l][2], b.add_mod(a, r, p), p), p)));
  }
  std::vector<Wire> trap_zero;
  for (const auto& f : trap) trap_zero.push_back(b.is_zero(f));
  real_ok.push_back(b.all(trap_zero));

  // trapdoor branch: Z = Com(0; r1, r2) under the public commitment key
  std::vector<Wire> trap_ok;
  trap_ok.push_back(b.is_zero(trap[0]));
  trap_ok.push_back(b.eq(z[0], b.mul_const_mod(trap[1], ctx.ck.h1.exp(), p)));
  trap_ok.push_back(b.eq(z[1], b.mul_const_mod(trap[2], ctx.ck.h2.exp(), p)));
  trap_ok.push_back(b.eq(z[2], b.add_mod(b.mul_const_mod(b.add_mod(trap[1], trap[2], p), ctx.ck.h3.exp(), p),
                                          trap[0], p)));
  std::vector<Wire> real_zero;
  for (const auto& f : real) real_zero.push_back(b.is_zero(f));
  trap_ok.push_back(b.all(real_zero));

  ok.push_back(b.mux(trapdoor, b.all(trap_ok), b.all(real_ok)));
  Wire out = b.all(ok);
  return CompiledRelation{kRelEncFull, std::move(b).finish(out), std::move(L)};
}

inline std::vector<bool> encode_enc_inputs(const SchemeContext& ctx, const EncStatement& x, const EncWitness& wit) {
  const std::size_t w = field_width(ctx.p());
  const std::size_t jw = static_cast<std::size_t>(std::bit_width(static_cast<std::uint64_t>(ctx.n())));
  BitWriter bw;
  bw.put(static_cast<std::uint64_t>(x.j), jw);
  for (const auto& c : x.cts) {
    bw.put(c.c1.exp(), w);
    bw.put(c.c2.exp(), w);
    bw.put(c.c3.exp(), w);
  }
  for (const auto& k : x.pks) {
    bw.put(k.g1.exp(), w);
    bw.put(k.g2.exp(), w);
    bw.put(k.g3.exp(), w);
  }
  bw.put(x.z.d1.exp(), w);
  bw.put(x.z.d2.exp(), w);
  bw.put(x.z.d3.exp(), w);
  if (const auto* r = std::get_if<EncReal>(&wit.branch)) {
    bw.put(0, 1);
    Scalar code = r->m && !ctx.codec.contains(*r->m) ? ctx.p() : ctx.codec.encode(r->m).exp();
    if (code >= ctx.p()) throw UsageError("real-branch vote has no plaintext code");
    bw.put(code, w);
    for (const auto& c : r->r) {
      bw.put(c.a, w);
      bw.put(c.b, w);
    }
    bw.put(0, 3 * w);
  } else {
    const auto& u = std::get<EncTrapdoor>(wit.branch).u;
    bw.put(1, 1);
    bw.put(0, 7 * w);
    bw.put(u.value, w);
    bw.put(u.r1, w);
    bw.put(u.r2, w);
  }
  return std::move(bw).take();
}

inline CompiledRelation compile_relation(const std::string& relation, const SchemeContext& ctx) {
  if (relation == kRelDec || relation == kRelDecFull) return compile_dec(ctx);
  if (relation == kRelEncFull) return compile_enc_full(ctx);
  throw UsageError("no circuit compiler for relation '" + relation + "'");
}

}  // namespace evote
