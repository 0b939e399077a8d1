#pragma once

#include <map>

#include "diploma/ledger.hpp"

namespace diploma {

// The prover's request triple: tethering point, creation key, and the update
// keys named by the bundle. Keys travel as their 32-byte refs (the provider
// indexes by ref). The final entry of update_key_refs is the head's pending
// key, which must be proven absent.
struct ProvenanceRequest {
  TetheringPoint tethering_point;
  Digest creation_key_ref;
  std::vector<Digest> update_key_refs;
  uint64_t freshness = 0;
};

Json to_json(const ProvenanceRequest& r);
ProvenanceRequest request_from_json(const Json& j);

ProvenanceRequest make_request(const DiplomaBundle& bundle, uint64_t freshness);

struct RecordEvidence {
  ProviderId provider_id;
  uint64_t epoch_index = 0;
  TransactionRecord record;
  MerklePath path;
};

struct AbsenceEvidence {
  uint64_t epoch_index = 0;
  AbsenceProof proof;
};

// Ledger anchor for one provider segment of the proof; the last anchor is
// the checkpoint.
struct SegmentAnchor {
  ProviderId provider_id;
  uint64_t epoch_index = 0;
  uint64_t block_height = 0;
};

struct ProofOfProvenance {
  std::vector<RecordEvidence> record_evidence;  // one per bundle record
  std::vector<EpochHeader> epoch_headers;       // contiguous per segment
  std::vector<AbsenceEvidence> absence_evidence;
  std::vector<SegmentAnchor> anchors;
  std::vector<ProviderId> provider_trail;
};

Json to_json(const ProofOfProvenance& p);
ProofOfProvenance proof_from_json(const Json& j);

struct ProofVerdict {
  bool integrity_ok = false;
  bool uniqueness_ok = false;
  bool fresh = false;
  std::vector<std::string> failure_reasons;
  bool all_ok() const { return integrity_ok && uniqueness_ok && fresh; }
};

// What a serving node knows: epoch stores by provider (its own plus anything
// imported).
struct MetadataView {
  std::map<ProviderId, const EpochStore*> stores;
};

// Throws InsufficientMetadata, UnknownKey, or StaleLedger.
ProofOfProvenance build_proof(const ProvenanceRequest& request,
                              const MetadataView& view,
                              std::span<const LedgerBlock> ledger);

// Pure: consults only the proof, the bundle, the validator set, and the
// public ledger blocks.
ProofVerdict verify_proof(const ProofOfProvenance& proof,
                          const DiplomaBundle& bundle, const ValidatorSet& vs,
                          std::span<const LedgerBlock> ledger,
                          uint64_t freshness);

}  // namespace diploma
