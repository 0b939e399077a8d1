#pragma once

#include <iosfwd>
#include <memory>
#include <random>

#include "diploma/keystore.hpp"
#include "diploma/validation.hpp"

namespace diploma {

struct FeeCounters {
  uint64_t registrations = 0;
  uint64_t proofs_served = 0;
  uint64_t metadata_bytes_shared = 0;
};

Json to_json(const FeeCounters& f);

enum class FailureKind { Crash, WithholdMetadata, Equivocate };
FailureKind failure_kind_from_name(std::string_view s);

struct FailureMode {
  FailureKind kind = FailureKind::Crash;
  std::string target;
  uint64_t at_round = 0;
};

struct SimNode {
  std::string id;
  KeyPair key;
  std::unique_ptr<IntegrityProvider> provider;
  std::map<ProviderId, EpochStore> imported;
  uint64_t exported_through = 0;  // epochs [0, exported_through) already shared
  bool alive = true;
  bool withhold = false;
  bool equivocate_next = false;
  FeeCounters fees;

  MetadataView metadata_view() const;
};

// Deterministic synchronous-round simulation: n validator nodes, each an
// integrity provider + proof server + ledger signer, over one threshold
// ledger and one notice board.
class NetworkSim {
 public:
  NetworkSim(uint32_t n_nodes, uint32_t threshold, uint64_t seed);

  std::vector<SimNode>& nodes() { return nodes_; }
  SimNode& node(const std::string& id);  // throws ConfigError
  Ledger& ledger() { return *ledger_; }
  const Ledger& ledger() const { return *ledger_; }
  NoticeBoard& board() { return board_; }
  uint64_t round() const { return round_; }

  // Derives a fresh 32-byte seed from the sim RNG.
  std::array<uint8_t, 32> next_seed();

  void sync_round();
  void inject_failure(const FailureMode& f);

  // Provider commits its latest sealed epoch; honors equivocate_next.
  void commit(SimNode& n);
  // All live nodes sign; throws InsufficientQuorum if too few are alive.
  const LedgerBlock& produce_block();

  ProofOfProvenance serve_proof(SimNode& server, const ProvenanceRequest& req);

  // When true, sync_round verifies/imports per receiver on worker threads;
  // observable outcomes are identical to the serial path.
  bool concurrent = false;

  std::string serialize_state() const;  // canonical, byte-stable

 private:
  std::vector<SimNode> nodes_;
  std::unique_ptr<Ledger> ledger_;
  NoticeBoard board_;
  std::mt19937_64 rng_;
  uint64_t round_ = 0;
};

struct AssertionResult {
  size_t line = 0;
  std::string text;
  bool passed = false;
  std::string detail;
};

struct ScenarioReport {
  std::vector<AssertionResult> assertions;
  std::map<std::string, FeeCounters> fees;
  std::string state_digest;  // hex digest of the final serialized state
  bool all_passed() const;
};

Json to_json(const ScenarioReport& r);
std::string scenario_report_text(const ScenarioReport& r);

// Line-oriented scenario script; '#' starts a comment. Throws ScriptError
// with the offending line number on parse failure.
ScenarioReport run_scenario(std::istream& script, uint32_t n_nodes,
                            uint32_t threshold, uint64_t seed,
                            bool concurrent = false);

}  // namespace diploma
