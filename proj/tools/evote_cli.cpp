#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "evote/board.hpp"
#include "evote/circuit.hpp"
#include "evote/harness.hpp"

namespace fs = std::filesystem;
using namespace evote;

namespace {

enum Exit { kOk = 0, kInternal = 1, kRejected = 2, kIntegrity = 3, kUsage = 4 };

struct Params {
  std::uint64_t p = 101;
  int n = 3;
  int k = 2;  // M = {0, .., k-1}
  int m = 2;
  std::int64_t bound = 4;
};

// "p=101,n=3,k=2,m=2,bound=4"; every key optional.
Params parse_params(const std::string& text, Params d) {
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("bad --params item '" + item + "'");
    auto key = item.substr(0, eq);
    auto parsed = parse_int(item.substr(eq + 1));
    if (!parsed) throw UsageError("bad --params value in '" + item + "'");
    std::int64_t v = *parsed;
    if (key == "p") d.p = static_cast<std::uint64_t>(v);
    else if (key == "n") d.n = static_cast<int>(v);
    else if (key == "k") d.k = static_cast<int>(v);
    else if (key == "m") d.m = static_cast<int>(v);
    else if (key == "bound") d.bound = v;
    else throw UsageError("unknown --params key '" + key + "'");
  }
  return d;
}

Rng rng_from(const std::string& seed_hex) {
  if (seed_hex.empty()) {
    std::random_device rd;
    std::vector<std::uint8_t> s(16);
    for (auto& b : s) b = static_cast<std::uint8_t>(rd());
    return make_rng(std::span<const std::uint8_t>(s));
  }
  auto bytes = from_hex(seed_hex);
  return make_rng(std::span<const std::uint8_t>(bytes));
}

void write_text(const fs::path& path, const std::string& text) { write_file_exclusive(path, text); }

Descriptor load_descriptor(const std::string& path) { return Descriptor::from_json(read_json_file(path)); }

fs::path authority_sk_path(const std::string& base, int k) { return base + ".k" + std::to_string(k); }

// --- commands --------------------------------------------------------------

struct Common {
  std::string election, board, sk, seed, vote, backend = "direct", scheme = "full", params, out;
  int voter = 0, authority = 0, trials = 0;
  std::uint64_t z = 0;
};

int cmd_keygen(const Common& o) {
  if (o.backend != "direct")
    throw UsageError("elections on disk need the direct backend; escrow proofs live in one process");
  auto pr = parse_params(o.params, Params{});
  auto gp = GroupParams::create(pr.p);
  Rng rng = rng_from(o.seed);
  Descriptor d;
  d.scheme = o.scheme;
  d.backend = BackendId::Direct;
  d.nonce = to_hex(random_bytes(rng, 16));
  d.p = pr.p;
  d.n = pr.n;
  if (o.scheme == "threshold") {
    d.m = pr.m;
    d.share_bound = pr.bound;
    auto ts = d.make_threshold();
    auto keys = ts.setup(rng);
    for (const auto& k : keys) d.authorities.push_back(k.pub);
    for (int k = 1; k <= d.m; ++k)
      if (fs::exists(authority_sk_path(o.sk, k))) throw UsageError(authority_sk_path(o.sk, k).string() + " exists");
    write_text(o.election, d.to_json().dump(2) + "\n");
    for (int k = 1; k <= d.m; ++k)
      write_text(authority_sk_path(o.sk, k),
                 authority_secret_json(d.nonce, k, keys[static_cast<std::size_t>(k - 1)]).dump(2) + "\n");
  } else if (o.scheme == "weak" || o.scheme == "full") {
    auto codec = PlaintextCodec::standard(gp, pr.k);
    d.message_set = codec.message_set();
    d.codec = Descriptor::codec_json(codec);
    auto scheme = d.make_scheme();
    auto [pk, sk] = scheme.setup(rng);
    d.pk = pk;
    write_text(o.election, d.to_json().dump(2) + "\n");
    write_text(o.sk, secret_json(d.nonce, sk).dump(2) + "\n");
  } else {
    throw UsageError("unknown scheme '" + o.scheme + "'");
  }
  BoardFile::create(o.board, d);
  std::cout << "election " << d.digest() << " nonce " << d.nonce << "\n";
  return kOk;
}

// Casting refuses a board that was opened for a different descriptor.
void check_board_matches(const Descriptor& d, const BoardFile& bf) {
  auto rows = bf.read();
  if (rows[0].payload.value("nonce", std::string()) != d.nonce ||
      rows[0].payload.value("election", std::string()) != d.digest())
    throw IntegrityError("board belongs to another election");
}

int cmd_cast(const Common& o) {
  auto d = load_descriptor(o.election);
  BoardFile bf(o.board);
  check_board_matches(d, bf);
  Rng rng = rng_from(o.seed);
  MaybeVote v;
  try {
    v = parse_maybe(o.vote);
  } catch (const DecodeError&) {
    throw UsageError("--vote takes an integer or BOT");
  }
  Json payload;
  if (d.is_threshold()) {
    if (!v) throw UsageError("threshold votes are 0 or 1");
    auto ts = d.make_threshold();
    payload = Json{{"ballot", js::threshold_ballot(ts.cast(d.authorities, o.voter, *v, rng))}};
  } else {
    auto scheme = d.make_scheme();
    payload = Json{{"ballot", js::ballot(scheme.cast(d.pk, o.voter, v, rng))}};
  }
  auto seq = bf.append(RowKind::Ballot, o.voter, payload, d.n);
  std::cout << "row " << seq << "\n";
  return kOk;
}

int cmd_verify_ballot(const Common& o) {
  auto d = load_descriptor(o.election);
  auto rows = BoardFile(o.board).read();
  if (o.voter < 1 || o.voter > d.n) throw UsageError("voter index out of range");
  bool ok;
  if (d.is_threshold()) {
    auto view = read_threshold_view(rows, d);
    ok = d.make_threshold().verify_ballot(d.authorities, o.voter, view.slots[static_cast<std::size_t>(o.voter - 1)]);
  } else {
    auto view = read_view(rows, d);
    ok = d.make_scheme().verify_ballot(d.pk, o.voter, view.slots[static_cast<std::size_t>(o.voter - 1)]);
  }
  std::cout << (ok ? "OK" : "BOT") << "\n";
  return ok ? kOk : kRejected;
}

int cmd_tally(const Common& o) {
  auto d = load_descriptor(o.election);
  BoardFile bf(o.board);
  auto rows = bf.read();
  if (d.is_threshold()) {
    if (o.authority < 1 || o.authority > d.m) throw UsageError("--authority must name one of the m authorities");
    auto key = authority_secret_from_json(read_json_file(authority_sk_path(o.sk, o.authority)), d, o.authority);
    auto ts = d.make_threshold();
    auto view = read_threshold_view(rows, d);
    for (int j = 1; j <= d.n; ++j) {
      const auto& s = view.slots[static_cast<std::size_t>(j - 1)];
      if (std::holds_alternative<ThresholdBallot>(s) || std::holds_alternative<Unparsed>(s))
        if (!ts.verify_ballot(d.authorities, j, s))
          bf.append(RowKind::Invalidation, j, Json{{"ref", view.ballot_rows.at(j)}}, d.n);
    }
    view = read_threshold_view(bf.read(), d);
    auto out = ts.eval_tally_authority(o.authority, d.authorities, key, view.slots);
    bf.append(RowKind::Tally, std::nullopt,
              Json{{"authority", o.authority}, {"y", js::tally(out.y)}, {"gamma", js::proof(out.gamma)}}, d.n);
    std::cout << "authority " << o.authority << " y " << tally_to_string(out.y) << "\n";
    return kOk;
  }
  auto sk = secret_from_json(read_json_file(o.sk), d.p, d.nonce);
  auto scheme = d.make_scheme();
  auto view = read_view(rows, d);
  if (scheme.variant() == Variant::Full) {
    for (int j = 1; j <= d.n; ++j) {
      const auto& s = view.slots[static_cast<std::size_t>(j - 1)];
      if ((std::holds_alternative<Ballot>(s) || std::holds_alternative<Unparsed>(s)) && !scheme.verify_ballot(d.pk, j, s))
        bf.append(RowKind::Invalidation, j, Json{{"ref", view.ballot_rows.at(j)}}, d.n);
    }
    view = read_view(bf.read(), d);
  }
  auto out = scheme.eval_tally(d.pk, sk, view.slots);
  bf.append(RowKind::Tally, std::nullopt, Json{{"y", js::tally(out.y)}, {"gamma", js::proof(out.gamma)}}, d.n);
  std::cout << "y " << tally_to_string(out.y) << (out.anomaly ? " (anomaly)" : "") << "\n";
  return kOk;
}

int cmd_verify_tally(const Common& o) {
  auto d = load_descriptor(o.election);
  auto rows = BoardFile(o.board).read();
  if (d.is_threshold()) {
    auto ts = d.make_threshold();
    auto view = read_threshold_view(rows, d);
    std::vector<TallyValue> ys(static_cast<std::size_t>(d.m));
    std::vector<int> seen(static_cast<std::size_t>(d.m), 0);
    bool ok = true;
    for (const auto& t : view.tallies) {
      if (t.authority < 1 || t.authority > d.m) {
        ok = false;
        continue;
      }
      ++seen[static_cast<std::size_t>(t.authority - 1)];
      ys[static_cast<std::size_t>(t.authority - 1)] = t.y;
      ok = ok && ts.verify_tally_authority(t.authority, d.authorities, view.slots, t.y, t.gamma);
    }
    ok = ok && std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
    std::cout << (ok ? "OK" : "BOT") << " y " << tally_to_string(ts.params().combine(ys)) << "\n";
    return ok ? kOk : kRejected;
  }
  auto view = read_view(rows, d);
  if (view.tallies.size() != 1) {
    std::cout << "BOT (" << view.tallies.size() << " TALLY rows)\n";
    return kRejected;
  }
  const auto& t = view.tallies[0];
  bool ok = d.make_scheme().verify_tally(d.pk, view.slots, t.y, t.gamma);
  std::cout << (ok ? "OK" : "BOT") << " y " << tally_to_string(t.y) << "\n";
  return ok ? kOk : kRejected;
}

int cmd_audit(const Common& o) {
  auto d = load_descriptor(o.election);
  std::vector<BoardRow> rows;
  try {
    rows = BoardFile(o.board).read();
  } catch (const IntegrityError& e) {
    std::cout << "INTEGRITY " << e.what() << "\n";
    return kIntegrity;
  }
  auto res = audit(d, rows);
  for (const auto& f : res.findings) std::cout << "finding: " << f << "\n";
  switch (res.status) {
    case AuditStatus::Ok: std::cout << "OK y " << tally_to_string(res.y) << "\n"; return kOk;
    case AuditStatus::Rejected: std::cout << "BOT\n"; return kRejected;
    case AuditStatus::Integrity: std::cout << "INTEGRITY\n"; return kIntegrity;
  }
  return kInternal;
}

// --- experiments -----------------------------------------------------------

void emit(const Common& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::app);
  if (!f) throw UsageError("cannot write " + o.out);
  f << text;
}

Scheme experiment_scheme(const Common& o, Variant v, Params defaults) {
  auto pr = parse_params(o.params, defaults);
  auto gp = GroupParams::create(pr.p);
  auto codec = PlaintextCodec::standard(gp, pr.k);
  auto ctx = SchemeContext::make(gp, TallyConfig::sum(pr.n, codec.message_set()), codec);
  return Scheme(v, ctx, make_backend(parse_backend(o.backend)));
}

int exp_priv(const Common& o, Variant v) {
  auto scheme = experiment_scheme(o, v, Params{11, 3, 2, 2, 4});
  Rng rng = rng_from(o.seed);
  int trials = o.trials > 0 ? o.trials : 100, invariant_fail = 0, wins = 0, rejected = 0;
  for (int t = 0; t < trials; ++t) {
    Rng adv_rng = make_rng(static_cast<std::uint64_t>(t));
    Adversary adv{[&](const ElectionPk& pk) { return random_challenge(scheme, pk, adv_rng, v == Variant::Full); },
                  [&](const GameView&) { return static_cast<int>(uniform_below(adv_rng, 2)); }};
    auto rep = run_priv_game(scheme, adv, rng);
    if (rep.rejected) ++rejected;
    if (rep.verdicts.count("tally_invariant") && !rep.verdict("tally_invariant")) ++invariant_fail;
    if (rep.won()) ++wins;
    if (t == 0) emit(o, rep.to_records());
  }
  Json summary{{"experiment", variant_name(v) == "weak" ? "weak-priv" : "priv"}, {"trials", trials},
               {"rejected", rejected}, {"wins", wins}, {"tally_invariance_failures", invariant_fail}};
  emit(o, summary.dump() + "\n");
  return invariant_fail == 0 && rejected == 0 ? kOk : kRejected;
}

int exp_hybrids(const Common& o) {
  auto scheme = experiment_scheme(o, Variant::Full, Params{11, 3, 2, 2, 4});
  Rng rng = rng_from(o.seed);
  int trials = o.trials > 0 ? o.trials : 20, bad = 0, e1 = 0;
  for (int t = 0; t < trials; ++t) {
    auto rep = run_hybrid_chain(
        scheme, [&](const ElectionPk& pk, const ExtendedSk&) { return random_challenge(scheme, pk, rng, true); }, rng,
        o.z);
    if (rep.e1) ++e1;
    bool ok = !rep.rejected && rep.verdict("tally_constant_given_not_e1") && rep.verdict("h2_0_equals_h1") &&
              rep.verdict("all_tallies_verify_given_not_e1");
    if (scheme.proofs().id() == BackendId::Escrow) ok = ok && rep.verdict("escrow_proofs_identical_given_not_e1");
    if (!ok) ++bad;
    if (t == 0 || !ok) emit(o, rep.to_records());
  }
  emit(o, Json{{"experiment", "hybrids"}, {"trials", trials}, {"e1", e1}, {"failed", bad}}.dump() + "\n");
  return bad == 0 ? kOk : kRejected;
}

int exp_verifiability(const Common& o) {
  if (o.backend != "direct") throw UsageError("the verifiability oracle needs the direct backend");
  auto v = o.scheme == "weak" ? Variant::Weak : Variant::Full;
  auto scheme = experiment_scheme(o, v, Params{5, 2, 2, 2, 4});
  Rng rng = rng_from(o.seed);
  int trials = o.trials > 0 ? o.trials : 10, bad = 0;
  for (int t = 0; t < trials; ++t) {
    auto [pk, sk] = scheme.setup(rng);
    (void)sk;
    auto board = random_board(scheme, pk, rng);
    auto rep = verifiability_oracle(scheme, pk, board);
    Json accepted = Json::array();
    for (const auto& y : rep.accepted) accepted.push_back(tally_to_string(y));
    emit(o, Json{{"board", t}, {"accepted", accepted}, {"unique", rep.unique}, {"candidates", rep.candidates}}.dump() +
                "\n");
    if (!rep.unique) ++bad;
  }
  return bad == 0 ? kOk : kRejected;
}

int exp_correctness(const Common& o) {
  auto v = o.scheme == "weak" ? Variant::Weak : Variant::Full;
  auto scheme = experiment_scheme(o, v, Params{11, 3, 2, 2, 4});
  Rng rng = rng_from(o.seed);
  auto rep = correctness_suite(scheme, rng);
  emit(o, Json{{"experiment", "correctness"}, {"scheme", variant_name(v)}, {"vectors", rep.vectors},
               {"boards", rep.boards}, {"failures", rep.failures}}
              .dump() +
              "\n");
  return rep.ok() ? kOk : kRejected;
}

int exp_threshold(const Common& o) {
  auto pr = parse_params(o.params, Params{1009, 3, 2, 2, 4});
  auto ts = ThresholdScheme(ThresholdParams::create(GroupParams::create(pr.p), pr.n, pr.m, pr.bound),
                            make_backend(parse_backend(o.backend)));
  const auto& tp = ts.params();
  bool recon = true;
  for (std::int64_t v : {0, 1})
    for (const auto& coins : tp.coin_space(v)) recon = recon && tp.reconstruct(tp.split_with(v, coins)) == v;
  Rng rng = rng_from(o.seed);
  int trials = o.trials > 0 ? o.trials : 5, mismatches = 0;
  for (int t = 0; t < trials; ++t) {
    auto keys = ts.setup(rng);
    std::vector<AuthorityPublic> auth;
    for (const auto& k : keys) auth.push_back(k.pub);
    std::vector<ThresholdSlot> slots;
    VoteVector votes;
    for (int j = 1; j <= pr.n; ++j) {
      if (uniform_below(rng, 4) == 0) {
        slots.emplace_back(Abstained{});
        votes.push_back(kBot);
        continue;
      }
      auto v = static_cast<std::int64_t>(uniform_below(rng, 2));
      slots.emplace_back(ts.cast(auth, j, v, rng));
      votes.push_back(v);
    }
    std::vector<TallyOutcome> outs;
    for (int k = 1; k <= pr.m; ++k) outs.push_back(ts.eval_tally_authority(k, auth, keys[static_cast<std::size_t>(k - 1)], slots));
    auto y = ts.combine_tallies(outs);
    auto expected = TallyConfig::sum(pr.n, {0, 1}).eval(votes);
    if (y != expected) ++mismatches;
  }
  emit(o, Json{{"experiment", "threshold"}, {"m", pr.m}, {"share_bound", pr.bound}, {"reconstruction", recon},
               {"trials", trials}, {"mismatches", mismatches}}
              .dump() +
              "\n");
  return recon && mismatches == 0 ? kOk : kRejected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifiable e-voting: ceremony tools and security experiments"};
  app.require_subcommand(1);
  Common o;

  auto add_election = [&](CLI::App* c) {
    c->add_option("--election", o.election, "election descriptor file")->required();
    c->add_option("--board", o.board, "bulletin board file")->required();
  };

  auto* keygen = app.add_subcommand("keygen", "create an election: descriptor, secret key, board");
  add_election(keygen);
  keygen->add_option("--sk", o.sk, "secret key output (threshold: prefix for one file per authority)")->required();
  keygen->add_option("--scheme", o.scheme, "weak | full | threshold")->check(CLI::IsMember({"weak", "full", "threshold"}));
  keygen->add_option("--params", o.params, "p=..,n=..,k=..(|M|),m=..,bound=..");
  keygen->add_option("--seed", o.seed, "hex RNG seed");
  keygen->add_option("--backend", o.backend, "proof backend")->check(CLI::IsMember({"direct", "escrow"}));

  auto* cast = app.add_subcommand("cast", "append a ballot");
  add_election(cast);
  cast->add_option("--voter", o.voter, "voter index")->required();
  cast->add_option("--vote", o.vote, "vote or BOT")->required();
  cast->add_option("--seed", o.seed, "hex RNG seed");

  auto* vb = app.add_subcommand("verify-ballot", "check the ballot currently held by a voter's slot");
  add_election(vb);
  vb->add_option("--voter", o.voter, "voter index")->required();

  auto* tally = app.add_subcommand("tally", "invalidate bad ballots, evaluate and append the tally");
  add_election(tally);
  tally->add_option("--sk", o.sk, "secret key file (threshold: prefix)")->required();
  tally->add_option("--authority", o.authority, "authority index (threshold)");

  auto* vt = app.add_subcommand("verify-tally", "check the claimed tally");
  add_election(vt);

  auto* au = app.add_subcommand("audit", "full public audit of a finished election");
  add_election(au);

  auto* ex = app.add_subcommand("experiment", "run a security experiment");
  ex->require_subcommand(1);
  auto add_exp = [&](const char* name, const char* help) {
    auto* c = ex->add_subcommand(name, help);
    c->add_option("--params", o.params, "p=..,n=..,k=..,m=..,bound=..");
    c->add_option("--seed", o.seed, "hex RNG seed");
    c->add_option("--backend", o.backend, "proof backend")->check(CLI::IsMember({"direct", "escrow"}));
    c->add_option("--trials", o.trials, "number of runs");
    c->add_option("--out", o.out, "append records to this file instead of stdout");
    return c;
  };
  auto* e_weak = add_exp("weak-priv", "weak privacy game");
  auto* e_priv = add_exp("priv", "privacy game with adversarial ballots");
  auto* e_hyb = add_exp("hybrids", "hybrid chain H1..H7");
  e_hyb->add_option("--z", o.z, "value Z commits to (the chain needs 0)");
  auto* e_ver = add_exp("verifiability", "exhaustive (y, proof) oracle on random boards");
  e_ver->add_option("--scheme", o.scheme, "weak | full")->check(CLI::IsMember({"weak", "full"}));
  auto* e_cor = add_exp("correctness", "exhaustive correctness conditions");
  e_cor->add_option("--scheme", o.scheme, "weak | full")->check(CLI::IsMember({"weak", "full"}));
  auto* e_thr = add_exp("threshold", "threshold reconstruction and combined tallies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*keygen) return cmd_keygen(o);
    if (*cast) return cmd_cast(o);
    if (*vb) return cmd_verify_ballot(o);
    if (*tally) return cmd_tally(o);
    if (*vt) return cmd_verify_tally(o);
    if (*au) return cmd_audit(o);
    if (*e_weak) return exp_priv(o, Variant::Weak);
    if (*e_priv) return exp_priv(o, Variant::Full);
    if (*e_hyb) return exp_hybrids(o);
    if (*e_ver) return exp_verifiability(o);
    if (*e_cor) return exp_correctness(o);
    if (*e_thr) return exp_threshold(o);
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kIntegrity;
  } catch (const DecodeError& e) {
    std::cerr << "malformed record: " << e.what() << "\n";
    return kIntegrity;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
