#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "evote/digest.hpp"
#include "evote/relations.hpp"

namespace evote {

enum class BackendId : std::uint8_t { Direct = 1, Escrow = 2 };

inline std::string backend_name(BackendId id) { return id == BackendId::Direct ? "direct" : "escrow"; }

inline BackendId parse_backend(std::string_view s) {
  if (s == "direct") return BackendId::Direct;
  if (s == "escrow") return BackendId::Escrow;
  throw UsageError("unknown proof backend '" + std::string(s) + "'");
}

struct Proof {
  BackendId backend = BackendId::Direct;
  std::vector<std::uint8_t> payload;

  // backend byte followed by the payload, as lowercase hex
  std::string to_hex_string() const {
    std::vector<std::uint8_t> b{static_cast<std::uint8_t>(backend)};
    b.insert(b.end(), payload.begin(), payload.end());
    return to_hex(b);
  }
  static Proof from_hex_string(std::string_view h) {
    auto b = from_hex(h);
    if (b.empty()) throw DecodeError("empty proof");
    if (b[0] != 1 && b[0] != 2) throw DecodeError("unknown proof backend byte");
    return Proof{static_cast<BackendId>(b[0]), std::vector<std::uint8_t>(b.begin() + 1, b.end())};
  }
  friend bool operator==(const Proof&, const Proof&) = default;
};

class ProofSystem {
 public:
  virtual ~ProofSystem() = default;
  virtual BackendId id() const = 0;
  // Throws WitnessError unless the relation accepts the witness.
  virtual Proof prove(const ProofTarget& t, std::span<const std::uint8_t> witness) const = 0;
  virtual bool verify(const ProofTarget& t, const Proof& pi) const = 0;
};

// The proof is the witness itself. Verification runs the checker, so it is
// perfectly sound and perfectly complete, and hides nothing.
class DirectBackend final : public ProofSystem {
 public:
  BackendId id() const override { return BackendId::Direct; }

  Proof prove(const ProofTarget& t, std::span<const std::uint8_t> witness) const override {
    if (!t.accepts(witness)) throw WitnessError("relation '" + t.relation + "' rejects the witness");
    return Proof{BackendId::Direct, std::vector<std::uint8_t>(witness.begin(), witness.end())};
  }

  bool verify(const ProofTarget& t, const Proof& pi) const override {
    return pi.backend == BackendId::Direct && t.accepts(pi.payload);
  }
};

// The proof is a digest of (relation, statement). prove() deposits a valid
// witness in a process-local table under that digest; verify() looks it up and
// re-runs the checker. A proof is therefore a function of the statement alone,
// whichever witness was used, and an accepted proof still implies a witness
// exists. The table is not shared across processes.
class EscrowBackend final : public ProofSystem {
 public:
  BackendId id() const override { return BackendId::Escrow; }

  static std::vector<std::uint8_t> token(const ProofTarget& t) {
    ByteWriter w;
    w.str("evote/escrow/v1").str(t.relation).bytes(t.statement);
    auto d = sha256(std::string_view(reinterpret_cast<const char*>(w.data().data()), w.data().size()));
    return std::vector<std::uint8_t>(d.begin(), d.end());
  }

  Proof prove(const ProofTarget& t, std::span<const std::uint8_t> witness) const override {
    if (!t.accepts(witness)) throw WitnessError("relation '" + t.relation + "' rejects the witness");
    auto tok = token(t);
    {
      std::lock_guard lock(table_->mu);
      table_->entries.try_emplace(tok, Entry{t.relation, t.statement, {witness.begin(), witness.end()}});
    }
    return Proof{BackendId::Escrow, tok};
  }

  bool verify(const ProofTarget& t, const Proof& pi) const override {
    if (pi.backend != BackendId::Escrow || pi.payload != token(t)) return false;
    std::optional<Entry> e;
    {
      std::lock_guard lock(table_->mu);
      auto it = table_->entries.find(pi.payload);
      if (it != table_->entries.end()) e = it->second;
    }
    return e && e->relation == t.relation && e->statement == t.statement && t.accepts(e->witness);
  }

  std::size_t size() const {
    std::lock_guard lock(table_->mu);
    return table_->entries.size();
  }

 private:
  struct Entry {
    std::string relation;
    std::vector<std::uint8_t> statement;
    std::vector<std::uint8_t> witness;
  };
  struct Table {
    mutable std::mutex mu;
    std::map<std::vector<std::uint8_t>, Entry> entries;
  };
  std::shared_ptr<Table> table_ = std::make_shared<Table>();
};

inline std::shared_ptr<ProofSystem> make_backend(BackendId id) {
  if (id == BackendId::Direct) return std::make_shared<DirectBackend>();
  return std::make_shared<EscrowBackend>();
}

}  // namespace evote
