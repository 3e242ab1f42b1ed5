#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evote/digest.hpp"
#include "evote/evote.hpp"
#include "evote/threshold.hpp"

namespace evote {

using Json = nlohmann::ordered_json;

inline constexpr const char* kElectionFormat = "evote-election/v1";
inline constexpr const char* kSecretFormat = "evote-secret/v1";
inline constexpr const char* kBoardFormat = "evote-board/v1";

// ---------------------------------------------------------------------------
// Canonical JSON encodings
// ---------------------------------------------------------------------------

namespace js {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DecodeError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DecodeError(std::string("bad field '") + key + "'");
  }
}

inline const Json& sub(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DecodeError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline Scalar scalar(const Json& j, std::uint64_t p) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw DecodeError("expected a non-negative integer");
  auto v = j.get<std::uint64_t>();
  if (v >= p) throw DecodeError("value out of range");
  return v;
}

inline Json elements(std::initializer_list<GroupElement> es) {
  Json a = Json::array();
  for (const auto& e : es) a.push_back(e.exp());
  return a;
}

inline std::vector<GroupElement> get_elements(const Json& j, std::size_t n, std::uint64_t p) {
  if (!j.is_array() || j.size() != n) throw DecodeError("expected " + std::to_string(n) + " group elements");
  std::vector<GroupElement> out;
  for (const auto& e : j) out.push_back(GroupElement::from_raw(p, scalar(e, p)));
  return out;
}

inline Json pk(const PkePublicKey& k) { return elements({k.g1, k.g2, k.g3}); }
inline PkePublicKey get_pk(const Json& j, std::uint64_t p) {
  auto e = get_elements(j, 3, p);
  return PkePublicKey{e[0], e[1], e[2]};
}

inline Json ct(const PkeCiphertext& c) { return elements({c.c1, c.c2, c.c3}); }
inline PkeCiphertext get_ct(const Json& j, std::uint64_t p) {
  auto e = get_elements(j, 3, p);
  return PkeCiphertext{e[0], e[1], e[2]};
}

inline Json commitment(const Commitment& c) { return elements({c.d1, c.d2, c.d3}); }
inline Commitment get_commitment(const Json& j, std::uint64_t p) {
  auto e = get_elements(j, 3, p);
  return Commitment{e[0], e[1], e[2]};
}

inline Json opening(const CommitOpening& o) { return Json::array({o.value, o.r1, o.r2}); }
inline CommitOpening get_opening(const Json& j, std::uint64_t p) {
  if (!j.is_array() || j.size() != 3) throw DecodeError("expected an opening triple");
  return CommitOpening{scalar(j[0], p), scalar(j[1], p), scalar(j[2], p)};
}

inline Json sk(const PkeSecretKey& k) { return Json{{"pk", pk(k.pk)}, {"x", k.x}, {"y", k.y}}; }
inline PkeSecretKey get_sk(const Json& j, std::uint64_t p) {
  return PkeSecretKey{get_pk(sub(j, "pk"), p), scalar(sub(j, "x"), p), scalar(sub(j, "y"), p)};
}

inline Json election_pk(const ElectionPk& k) {
  Json j{{"pks", Json::array({pk(k.pks[0]), pk(k.pks[1]), pk(k.pks[2])})}};
  if (k.z) j["z"] = commitment(*k.z);
  return j;
}
inline ElectionPk get_election_pk(const Json& j, std::uint64_t p) {
  const auto& a = sub(j, "pks");
  if (!a.is_array() || a.size() != 3) throw DecodeError("expected three public keys");
  ElectionPk k;
  for (std::size_t l = 0; l < 3; ++l) k.pks[l] = get_pk(a[l], p);
  if (j.contains("z")) k.z = get_commitment(j.at("z"), p);
  return k;
}

inline Json proof(const std::optional<Proof>& pi) { return pi ? Json(pi->to_hex_string()) : Json(nullptr); }
inline std::optional<Proof> get_proof(const Json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_string()) throw DecodeError("proof must be a hex string");
  return Proof::from_hex_string(j.get<std::string>());
}

inline Json ballot(const Ballot& b) {
  return Json{{"cts", Json::array({ct(b.cts[0]), ct(b.cts[1]), ct(b.cts[2])})}, {"pi", proof(b.pi)}};
}
inline Ballot get_ballot(const Json& j, std::uint64_t p) {
  const auto& a = sub(j, "cts");
  if (!a.is_array() || a.size() != 3) throw DecodeError("expected three ciphertexts");
  Ballot b;
  for (std::size_t l = 0; l < 3; ++l) b.cts[l] = get_ct(a[l], p);
  b.pi = get_proof(sub(j, "pi"));
  return b;
}

inline Json threshold_ballot(const ThresholdBallot& b) {
  Json parts = Json::array();
  for (const auto& part : b.parts) parts.push_back(ballot(part));
  return Json{{"parts", parts}, {"pi", proof(b.pi)}};
}
inline ThresholdBallot get_threshold_ballot(const Json& j, std::uint64_t p, int m) {
  const auto& a = sub(j, "parts");
  if (!a.is_array() || static_cast<int>(a.size()) != m) throw DecodeError("expected one part per authority");
  ThresholdBallot b;
  for (const auto& part : a) b.parts.push_back(get_ballot(part, p));
  b.pi = get_proof(sub(j, "pi"));
  return b;
}

inline Json tally(const TallyValue& y) { return Json(tally_to_string(y)); }
inline TallyValue get_tally(const Json& j) {
  if (!j.is_string()) throw DecodeError("tally must be a string");
  return parse_maybe(j.get<std::string>());
}

}  // namespace js

// ---------------------------------------------------------------------------
// Election descriptor and secret key files
// ---------------------------------------------------------------------------

struct Descriptor {
  std::string scheme = "full";  // weak | full | threshold
  BackendId backend = BackendId::Direct;
  std::string nonce;
  std::uint64_t p = 0;
  int n = 0;
  std::vector<std::int64_t> message_set;
  Json codec;  // {"bottom": code, "votes": [[v, code], ...]}, weak/full only
  ElectionPk pk;
  int m = 0;  // threshold only
  std::int64_t share_bound = 0;
  std::vector<AuthorityPublic> authorities;

  bool is_threshold() const { return scheme == "threshold"; }
  GroupParams gp() const { return GroupParams::create(p); }

  PlaintextCodec make_codec() const {
    std::vector<std::int64_t> votes;
    std::vector<Scalar> codes;
    for (const auto& e : js::sub(codec, "votes")) {
      if (!e.is_array() || e.size() != 2) throw DecodeError("bad codec entry");
      votes.push_back(e[0].get<std::int64_t>());
      codes.push_back(js::scalar(e[1], p));
    }
    return PlaintextCodec(gp(), votes, js::scalar(js::sub(codec, "bottom"), p), codes);
  }
  static Json codec_json(const PlaintextCodec& c) {
    Json votes = Json::array();
    for (std::size_t i = 0; i < c.message_set().size(); ++i) votes.push_back({c.message_set()[i], c.vote_codes()[i]});
    return Json{{"bottom", c.bottom_code()}, {"votes", votes}};
  }

  Scheme make_scheme() const {
    if (is_threshold()) throw UsageError("threshold election has no single-authority scheme");
    auto g = gp();
    auto ctx = SchemeContext::make(g, TallyConfig::sum(n, message_set), make_codec());
    return Scheme(scheme == "weak" ? Variant::Weak : Variant::Full, ctx, make_backend(backend));
  }
  ThresholdScheme make_threshold() const {
    if (!is_threshold()) throw UsageError("not a threshold election");
    return ThresholdScheme(ThresholdParams::create(gp(), n, m, share_bound), make_backend(backend));
  }

  Json to_json() const {
    Json j{{"format", kElectionFormat}, {"scheme", scheme}, {"backend", backend_name(backend)}, {"nonce", nonce},
           {"p", p},  {"n", n},  {"tally", "sum"}};
    if (is_threshold()) {
      j["m"] = m;
      j["share_bound"] = share_bound;
      Json auth = Json::array();
      for (std::size_t k = 0; k < authorities.size(); ++k) {
        Json a = js::election_pk(authorities[k].pk);
        Json com = Json::array();
        for (const auto& c : authorities[k].com) com.push_back(js::commitment(c));
        a["k"] = k + 1;
        a["com"] = com;
        auth.push_back(a);
      }
      j["authorities"] = auth;
    } else {
      j["M"] = message_set;
      j["codec"] = codec;
      j["pk"] = js::election_pk(pk);
    }
    return j;
  }

  static Descriptor from_json(const Json& j) {
    if (js::field<std::string>(j, "format") != kElectionFormat) throw DecodeError("unknown election format");
    Descriptor d;
    d.scheme = js::field<std::string>(j, "scheme");
    if (d.scheme != "weak" && d.scheme != "full" && d.scheme != "threshold") throw DecodeError("unknown scheme");
    try {
      d.backend = parse_backend(js::field<std::string>(j, "backend"));
    } catch (const UsageError& e) {
      throw DecodeError(e.what());
    }
    d.nonce = js::field<std::string>(j, "nonce");
    d.p = js::field<std::uint64_t>(j, "p");
    d.n = js::field<int>(j, "n");
    if (js::field<std::string>(j, "tally") != "sum") throw DecodeError("unknown tally function");
    auto g = d.gp();
    if (d.is_threshold()) {
      d.m = js::field<int>(j, "m");
      d.share_bound = js::field<std::int64_t>(j, "share_bound");
      auto tp = ThresholdParams::create(g, d.n, d.m, d.share_bound);
      const auto& auth = js::sub(j, "authorities");
      if (!auth.is_array() || static_cast<int>(auth.size()) != d.m) throw DecodeError("expected m authorities");
      for (const auto& a : auth) {
        AuthorityPublic ap;
        ap.pk = js::get_election_pk(a, d.p);
        const auto& com = js::sub(a, "com");
        if (!com.is_array() || com.size() != static_cast<std::size_t>(d.n) * tp.flat_len())
          throw DecodeError("authority commitment has the wrong length");
        for (const auto& c : com) ap.com.push_back(js::get_commitment(c, d.p));
        d.authorities.push_back(std::move(ap));
      }
    } else {
      d.message_set = js::field<std::vector<std::int64_t>>(j, "M");
      d.codec = js::sub(j, "codec");
      d.pk = js::get_election_pk(js::sub(j, "pk"), d.p);
      if ((d.scheme == "full") != d.pk.z.has_value()) throw DecodeError("Z present iff the scheme is full");
      d.make_scheme();
    }
    return d;
  }

  std::string digest() const { return sha256_hex(to_json().dump()); }
};

inline Json secret_json(const std::string& nonce, const ElectionSk& sk) {
  Json j{{"format", kSecretFormat}, {"nonce", nonce}, {"sk1", js::sk(sk.sk1)}, {"sk2", js::sk(sk.sk2)},
         {"s1", sk.s1.hex()},      {"s2", sk.s2.hex()}};
  if (sk.r) j["r"] = js::opening(*sk.r);
  return j;
}

inline ElectionSk secret_from_json(const Json& j, std::uint64_t p, const std::string& nonce) {
  if (js::field<std::string>(j, "format") != kSecretFormat) throw DecodeError("unknown secret key format");
  if (js::field<std::string>(j, "nonce") != nonce) throw IntegrityError("secret key belongs to another election");
  ElectionSk sk;
  sk.sk1 = js::get_sk(js::sub(j, "sk1"), p);
  sk.sk2 = js::get_sk(js::sub(j, "sk2"), p);
  sk.s1 = KeyRandomness::from_hex_string(js::field<std::string>(j, "s1"));
  sk.s2 = KeyRandomness::from_hex_string(js::field<std::string>(j, "s2"));
  if (j.contains("r")) sk.r = js::get_opening(j.at("r"), p);
  return sk;
}

inline Json authority_secret_json(const std::string& nonce, int k, const AuthorityKey& key) {
  Json sks = Json::array(), seeds = Json::array(), openings = Json::array();
  for (std::size_t l = 0; l < 3; ++l) {
    sks.push_back(js::sk(key.ext.sks[l]));
    seeds.push_back(key.ext.seeds[l].hex());
  }
  for (const auto& o : key.com_openings) openings.push_back(js::opening(o));
  Json j{{"format", kSecretFormat}, {"nonce", nonce}, {"k", k}, {"sks", sks}, {"seeds", seeds}};
  if (key.ext.z_opening) j["r"] = js::opening(*key.ext.z_opening);
  j["com_openings"] = openings;
  return j;
}

inline AuthorityKey authority_secret_from_json(const Json& j, const Descriptor& d, int k) {
  if (js::field<std::string>(j, "format") != kSecretFormat) throw DecodeError("unknown secret key format");
  if (js::field<std::string>(j, "nonce") != d.nonce) throw IntegrityError("secret key belongs to another election");
  if (js::field<int>(j, "k") != k) throw UsageError("secret key file is for another authority");
  AuthorityKey key;
  key.pub = d.authorities.at(static_cast<std::size_t>(k - 1));
  const auto& sks = js::sub(j, "sks");
  const auto& seeds = js::sub(j, "seeds");
  if (!sks.is_array() || sks.size() != 3 || !seeds.is_array() || seeds.size() != 3) throw DecodeError("bad key arrays");
  for (std::size_t l = 0; l < 3; ++l) {
    key.ext.sks[l] = js::get_sk(sks[l], d.p);
    key.ext.seeds[l] = KeyRandomness::from_hex_string(seeds[l].get<std::string>());
  }
  if (j.contains("r")) key.ext.z_opening = js::get_opening(j.at("r"), d.p);
  for (const auto& o : js::sub(j, "com_openings")) key.com_openings.push_back(js::get_opening(o, d.p));
  return key;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::exception&) {
    throw DecodeError("malformed JSON in " + path.string());
  }
}

inline void write_file_exclusive(const std::filesystem::path& path, const std::string& text) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0600);
  if (fd < 0) throw UsageError("cannot create " + path.string() + ": " + std::strerror(errno));
  std::size_t off = 0;
  while (off < text.size()) {
    auto n = ::write(fd, text.data() + off, text.size() - off);
    if (n < 0) {
      ::close(fd);
      throw Error("write failed on " + path.string());
    }
    off += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

// ---------------------------------------------------------------------------
// Board rows
// ---------------------------------------------------------------------------

enum class RowKind { Key, Ballot, Invalidation, Abstention, Tally };

inline std::string row_kind_name(RowKind k) {
  switch (k) {
    case RowKind::Key: return "KEY";
    case RowKind::Ballot: return "BALLOT";
    case RowKind::Invalidation: return "INVALIDATION";
    case RowKind::Abstention: return "ABSTENTION";
    case RowKind::Tally: return "TALLY";
  }
  return "?";
}

inline RowKind parse_row_kind(const std::string& s) {
  for (auto k : {RowKind::Key, RowKind::Ballot, RowKind::Invalidation, RowKind::Abstention, RowKind::Tally})
    if (row_kind_name(k) == s) return k;
  throw IntegrityError("unknown row kind '" + s + "'");
}

inline const std::string kGenesisDigest(64, '0');

struct BoardRow {
  std::uint64_t seq = 0;
  RowKind kind = RowKind::Key;
  std::optional<int> voter;
  Json payload = Json::object();
  std::string prev;
  std::string digest;

  Json body() const {
    Json j{{"format", kBoardFormat}, {"seq", seq}, {"kind", row_kind_name(kind)}};
    if (voter) j["voter"] = *voter;
    j["payload"] = payload;
    j["prev"] = prev;
    return j;
  }
  std::string compute_digest() const { return sha256_hex(body().dump()); }
  std::string line() const {
    Json j = body();
    j["digest"] = digest;
    return j.dump();
  }

  // A row must be byte-identical to its canonical rendering.
  static BoardRow parse_line(const std::string& line) {
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw IntegrityError("row is not valid JSON");
    }
    if (!j.is_object()) throw IntegrityError("row is not an object");
    BoardRow r;
    try {
      if (js::field<std::string>(j, "format") != kBoardFormat) throw IntegrityError("unknown board format");
      r.seq = js::field<std::uint64_t>(j, "seq");
      r.kind = parse_row_kind(js::field<std::string>(j, "kind"));
      if (j.contains("voter")) r.voter = js::field<int>(j, "voter");
      r.payload = js::sub(j, "payload");
      r.prev = js::field<std::string>(j, "prev");
      r.digest = js::field<std::string>(j, "digest");
    } catch (const DecodeError& e) {
      throw IntegrityError(std::string("malformed row: ") + e.what());
    }
    if (r.line() != line) throw IntegrityError("row is not in canonical form");
    return r;
  }
};

inline std::vector<BoardRow> parse_board(const std::string& text) {
  std::vector<BoardRow> rows;
  std::size_t pos = 0;
  std::string prev = kGenesisDigest;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) throw IntegrityError("board ends inside a row");
    auto r = BoardRow::parse_line(text.substr(pos, nl - pos));
    if (r.seq != rows.size()) throw IntegrityError("row " + std::to_string(rows.size()) + " has the wrong sequence number");
    if (r.prev != prev) throw IntegrityError("row " + std::to_string(r.seq) + " does not chain from its predecessor");
    if (r.compute_digest() != r.digest) throw IntegrityError("row " + std::to_string(r.seq) + " digest mismatch");
    if ((r.seq == 0) != (r.kind == RowKind::Key)) throw IntegrityError("KEY row must be exactly row 0");
    prev = r.digest;
    rows.push_back(std::move(r));
    pos = nl + 1;
  }
  if (rows.empty()) throw IntegrityError("board is empty");
  return rows;
}

// Structural rules shared by reading and appending: voters in range, at most
// one BALLOT per voter, INVALIDATION pointing back at that voter's BALLOT.
inline void check_board_rules(const std::vector<BoardRow>& rows, int n) {
  std::map<int, std::uint64_t> ballot_row;
  for (const auto& r : rows) {
    bool per_voter = r.kind == RowKind::Ballot || r.kind == RowKind::Invalidation || r.kind == RowKind::Abstention;
    if (per_voter != r.voter.has_value()) throw IntegrityError("row " + std::to_string(r.seq) + " voter field misplaced");
    if (r.voter && (*r.voter < 1 || *r.voter > n)) throw IntegrityError("row " + std::to_string(r.seq) + " voter out of range");
    if (r.kind == RowKind::Ballot) {
      if (!ballot_row.emplace(*r.voter, r.seq).second)
        throw IntegrityError("second BALLOT row for voter " + std::to_string(*r.voter));
    }
    if (r.kind == RowKind::Invalidation) {
      auto it = ballot_row.find(*r.voter);
      if (!r.payload.contains("ref") || !r.payload["ref"].is_number_unsigned() || it == ballot_row.end() ||
          it->second != r.payload["ref"].get<std::uint64_t>())
        throw IntegrityError("row " + std::to_string(r.seq) + " invalidates no ballot of its voter");
    }
  }
}

class BoardFile {
 public:
  explicit BoardFile(std::filesystem::path path) : path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

  // Creates the board with its KEY row. Refuses to touch an existing file.
  static BoardFile create(const std::filesystem::path& path, const Descriptor& d) {
    BoardRow r;
    r.seq = 0;
    r.kind = RowKind::Key;
    r.payload = Json{{"nonce", d.nonce}, {"election", d.digest()}};
    r.prev = kGenesisDigest;
    r.digest = r.compute_digest();
    write_file_exclusive(path, r.line() + "\n");
    return BoardFile(path);
  }

  std::vector<BoardRow> read() const {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw UsageError("cannot open board " + path_.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_board(ss.str());
  }

  // Appends under an exclusive lock after re-reading and re-checking the
  // chain; returns the new row's sequence number.
  std::uint64_t append(RowKind kind, std::optional<int> voter, Json payload, int n) const {
    int fd = ::open(path_.c_str(), O_RDWR | O_APPEND);
    if (fd < 0) throw UsageError("cannot open board " + path_.string());
    if (::flock(fd, LOCK_EX) != 0) {
      ::close(fd);
      throw Error("cannot lock board");
    }
    struct Closer {
      int fd;
      ~Closer() {
        ::flock(fd, LOCK_UN);
        ::close(fd);
      }
    } closer{fd};
    auto rows = read();
    check_board_rules(rows, n);
    BoardRow r;
    r.seq = rows.size();
    r.kind = kind;
    r.voter = voter;
    r.payload = std::move(payload);
    r.prev = rows.back().digest;
    r.digest = r.compute_digest();
    rows.push_back(r);
    try {
      check_board_rules(rows, n);
    } catch (const IntegrityError& e) {
      throw UsageError(std::string("row rejected: ") + e.what());
    }
    std::string text = r.line() + "\n";
    if (::write(fd, text.data(), text.size()) != static_cast<ssize_t>(text.size())) throw Error("board write failed");
    ::fsync(fd);
    return r.seq;
  }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Views
// ---------------------------------------------------------------------------

struct TallyRecord {
  std::uint64_t seq = 0;
  int authority = 0;  // 0 for a single-authority election
  TallyValue y;
  std::optional<Proof> gamma;
};

template <class Slot>
struct GenericView {
  std::vector<Slot> slots;
  std::vector<TallyRecord> tallies;
  std::map<int, std::uint64_t> ballot_rows;  // voter -> BALLOT row
};

using BoardView = GenericView<BallotSlot>;
using ThresholdBoardView = GenericView<ThresholdSlot>;

namespace detail {
template <class Slot, class ParseBallot>
GenericView<Slot> resolve(const std::vector<BoardRow>& rows, const Descriptor& d, ParseBallot parse) {
  if (rows.empty() || rows[0].kind != RowKind::Key) throw IntegrityError("board has no KEY row");
  if (rows[0].payload.value("nonce", std::string()) != d.nonce ||
      rows[0].payload.value("election", std::string()) != d.digest())
    throw IntegrityError("board belongs to another election");
  check_board_rules(rows, d.n);
  GenericView<Slot> v;
  v.slots.assign(static_cast<std::size_t>(d.n), Abstained{});
  for (const auto& r : rows) {
    auto idx = r.voter ? static_cast<std::size_t>(*r.voter - 1) : 0;
    switch (r.kind) {
      case RowKind::Key: break;
      case RowKind::Ballot:
        v.ballot_rows[*r.voter] = r.seq;
        try {
          v.slots[idx] = parse(js::sub(r.payload, "ballot"));
        } catch (const DecodeError&) {
          v.slots[idx] = Unparsed{r.payload.dump()};
        }
        break;
      case RowKind::Invalidation: v.slots[idx] = Invalidated{}; break;
      case RowKind::Abstention: v.slots[idx] = Abstained{}; break;
      case RowKind::Tally: {
        TallyRecord t;
        t.seq = r.seq;
        try {
          t.authority = r.payload.value("authority", 0);
          t.y = js::get_tally(js::sub(r.payload, "y"));
          t.gamma = js::get_proof(js::sub(r.payload, "gamma"));
        } catch (const DecodeError& e) {
          throw IntegrityError("row " + std::to_string(r.seq) + " holds a malformed tally: " + e.what());
        } catch (const nlohmann::json::exception&) {
          throw IntegrityError("row " + std::to_string(r.seq) + " holds a malformed tally");
        }
        v.tallies.push_back(std::move(t));
        break;
      }
    }
  }
  return v;
}
}  // namespace detail

inline BoardView read_view(const std::vector<BoardRow>& rows, const Descriptor& d) {
  return detail::resolve<BallotSlot>(rows, d, [&](const Json& j) -> BallotSlot { return js::get_ballot(j, d.p); });
}

inline ThresholdBoardView read_threshold_view(const std::vector<BoardRow>& rows, const Descriptor& d) {
  return detail::resolve<ThresholdSlot>(
      rows, d, [&](const Json& j) -> ThresholdSlot { return js::get_threshold_ballot(j, d.p, d.m); });
}

// The slots an earlier row state showed: used to find what an INVALIDATION replaced.
inline std::optional<Json> ballot_payload(const std::vector<BoardRow>& rows, std::uint64_t seq) {
  if (seq >= rows.size() || rows[seq].kind != RowKind::Ballot) return std::nullopt;
  return std::optional<Json>(std::in_place, rows[seq].payload);
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

enum class AuditStatus { Ok, Rejected, Integrity };

struct AuditResult {
  AuditStatus status = AuditStatus::Ok;
  std::vector<std::string> findings;
  TallyValue y;
  bool ok() const { return status == AuditStatus::Ok; }
};

namespace detail {
template <class Verify>
void check_invalidations(const std::vector<BoardRow>& rows, AuditResult& res, Verify verify_payload) {
  for (const auto& r : rows) {
    if (r.kind != RowKind::Invalidation) continue;
    auto ref = r.payload["ref"].get<std::uint64_t>();
    auto payload = ballot_payload(rows, ref);
    if (payload && verify_payload(*r.voter, *payload)) {
      res.status = AuditStatus::Rejected;
      res.findings.push_back("row " + std::to_string(r.seq) + " invalidates a valid ballot of voter " +
                             std::to_string(*r.voter));
    }
  }
}
}  // namespace detail

// Public verification of a finished election: chain and structure, the
// ⊥-replacement discipline, then the claimed tally. Uses the descriptor and
// the board only.
inline AuditResult audit(const Descriptor& d, const std::vector<BoardRow>& rows) {
  AuditResult res;
  try {
    if (!d.is_threshold()) {
      auto scheme = d.make_scheme();
      auto view = read_view(rows, d);
      detail::check_invalidations(rows, res, [&](int j, const Json& payload) {
        try {
          return scheme.verify_ballot(d.pk, j, js::get_ballot(js::sub(payload, "ballot"), d.p));
        } catch (const DecodeError&) {
          return false;
        }
      });
      if (view.tallies.size() != 1 || view.tallies[0].authority != 0) {
        res.status = AuditStatus::Rejected;
        res.findings.push_back("expected exactly one TALLY row, found " + std::to_string(view.tallies.size()));
        return res;
      }
      const auto& t = view.tallies[0];
      if (t.seq + 1 != rows.size()) res.findings.push_back("rows follow the TALLY row");
      res.y = t.y;
      if (!scheme.verify_tally(d.pk, view.slots, t.y, t.gamma)) {
        res.status = AuditStatus::Rejected;
        res.findings.push_back("claimed tally " + tally_to_string(t.y) + " does not verify");
      }
      if (t.seq + 1 != rows.size()) res.status = AuditStatus::Rejected;
      return res;
    }

    auto ts = d.make_threshold();
    auto view = read_threshold_view(rows, d);
    detail::check_invalidations(rows, res, [&](int j, const Json& payload) {
      try {
        return ts.verify_ballot(d.authorities, j, js::get_threshold_ballot(js::sub(payload, "ballot"), d.p, d.m));
      } catch (const DecodeError&) {
        return false;
      }
    });
    std::vector<TallyValue> ys(static_cast<std::size_t>(d.m));
    std::vector<int> seen(static_cast<std::size_t>(d.m), 0);
    for (const auto& t : view.tallies) {
      if (t.authority < 1 || t.authority > d.m) {
        res.status = AuditStatus::Rejected;
        res.findings.push_back("TALLY row " + std::to_string(t.seq) + " names no authority");
        continue;
      }
      auto k = static_cast<std::size_t>(t.authority - 1);
      ++seen[k];
      ys[k] = t.y;
      if (!ts.verify_tally_authority(t.authority, d.authorities, view.slots, t.y, t.gamma)) {
        res.status = AuditStatus::Rejected;
        res.findings.push_back("authority " + std::to_string(t.authority) + " tally does not verify");
      }
    }
    for (int k = 1; k <= d.m; ++k)
      if (seen[static_cast<std::size_t>(k - 1)] != 1) {
        res.status = AuditStatus::Rejected;
        res.findings.push_back("authority " + std::to_string(k) + " has " +
                               std::to_string(seen[static_cast<std::size_t>(k - 1)]) + " TALLY rows");
      }
    res.y = ts.params().combine(ys);
    return res;
  } catch (const IntegrityError& e) {
    res.status = AuditStatus::Integrity;
    res.findings.push_back(e.what());
    return res;
  }
}

}  // namespace evote
