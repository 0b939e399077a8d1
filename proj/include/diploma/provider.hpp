#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "diploma/merkle.hpp"
#include "diploma/model.hpp"

namespace diploma {

// One leaf of an epoch. Normal records carry the submitting key and its
// signature over the record hash; aggregate leaves carry neither.
struct TransactionRecord {
  std::array<uint8_t, 32> sort_key{};
  std::optional<PublicKey> public_key;
  Digest record_hash;
  std::optional<Signature> signature;

  bool operator==(const TransactionRecord&) const = default;
  Digest leaf_hash() const { return merkle_leaf_hash(sort_key, record_hash); }
};

Json to_json(const TransactionRecord& r);
TransactionRecord txrecord_from_json(const Json& j);

struct EpochHeader {
  ProviderId provider_id;
  uint64_t index = 0;
  Digest prev_chain_hash;  // 32 zero bytes for index 0
  Digest merkle_root;
  uint64_t leaf_count = 0;
  Digest chain_hash;  // hash of canonical(provider_id, index, prev_chain_hash, merkle_root)
  Signature provider_signature;

  bool operator==(const EpochHeader&) const = default;
};

Json to_json(const EpochHeader& h);
EpochHeader epoch_header_from_json(const Json& j);

// chain_hash preimage and signature preimage for a header's content fields.
Digest compute_chain_hash(const ProviderId& provider, uint64_t index,
                          const Digest& prev_chain_hash, const Digest& root);
Bytes header_signing_preimage(const EpochHeader& h);

struct Epoch {
  EpochHeader header;
  std::vector<TransactionRecord> leaves;  // strictly ascending by sort_key

  bool operator==(const Epoch&) const = default;
};

Json to_json(const Epoch& e);
Epoch epoch_from_json(const Json& j);

Json to_json(const MerklePath& p);
MerklePath path_from_json(const Json& j);

enum class AbsenceCase { EmptyEpoch, BelowFirst, AboveLast, BetweenAdjacent };
const char* absence_case_name(AbsenceCase c);
AbsenceCase absence_case_from_name(std::string_view s);

struct AbsenceProof {
  AbsenceCase kind = AbsenceCase::EmptyEpoch;
  std::optional<std::pair<TransactionRecord, MerklePath>> left;
  std::optional<std::pair<TransactionRecord, MerklePath>> right;
};

Json to_json(const AbsenceProof& p);
AbsenceProof absence_from_json(const Json& j);

struct RegistrationReceipt {
  uint64_t pending_epoch_index = 0;
};

struct MetadataBatch {
  ProviderId provider_id;
  std::vector<Epoch> epochs;  // contiguous index range
};

Json to_json(const MetadataBatch& b);
MetadataBatch batch_from_json(const Json& j);

struct ImportReport {
  uint64_t imported = 0;
  uint64_t first_index = 0;
  uint64_t last_index = 0;
};

// Sealed history of one provider, usable both by the provider itself and by
// peers that imported its metadata.
class EpochStore {
 public:
  const std::vector<Epoch>& epochs() const { return epochs_; }
  size_t size() const { return epochs_.size(); }
  const Epoch& at(uint64_t index) const;  // throws NotSealed when out of range

  // Index of the epoch containing sort_key, if any. Normal sort keys appear
  // in at most one epoch.
  std::optional<uint64_t> find_key(const std::array<uint8_t, 32>& sort_key) const;

  void append(Epoch e) { epochs_.push_back(std::move(e)); }

 private:
  std::vector<Epoch> epochs_;
};

class IntegrityProvider {
 public:
  // Seals the genesis epoch (index 0, empty) immediately.
  IntegrityProvider(ProviderId id, KeyPair signing_key);

  const ProviderId& id() const { return id_; }
  const PublicKey& public_key() const { return key_.public_key; }
  const EpochStore& store() const { return store_; }

  RegistrationReceipt register_submission(const TransactionSubmission& s);
  void aggregate_private(const std::vector<Digest>& hashes);
  const Epoch& seal_epoch();
  TetheringPoint tethering_point() const;

  // Signs an arbitrary provider message (used for ledger commitments).
  Signature sign_as_provider(ByteView message) const;

 private:
  ProviderId id_;
  KeyPair key_;
  EpochStore store_;
  std::map<std::array<uint8_t, 32>, TransactionRecord> pending_;
};

// --- proofs over sealed epochs ---------------------------------------------

std::pair<TransactionRecord, MerklePath> prove_membership(
    const Epoch& epoch, const std::array<uint8_t, 32>& sort_key);

AbsenceProof prove_absence(const Epoch& epoch,
                           const std::array<uint8_t, 32>& sort_key);

bool verify_membership(const EpochHeader& header, const TransactionRecord& rec,
                       const MerklePath& path);

bool verify_absence(const EpochHeader& header,
                    const std::array<uint8_t, 32>& sort_key,
                    const AbsenceProof& proof);

// Verifies a single epoch in isolation: sorted leaves, root and chain hash
// recompute, provider signature checks against provider_key.
bool verify_epoch(const Epoch& e, const PublicKey& provider_key);

MetadataBatch export_metadata(const ProviderId& id, const EpochStore& store,
                              uint64_t from, uint64_t to);

// Appends batch epochs to store. Throws CorruptBatch when roots or chain
// linkage fail, the batch leaves a gap, or a signature is wrong. Epochs
// already present are skipped after checking they match.
ImportReport import_metadata(EpochStore& store, const MetadataBatch& batch,
                             const PublicKey& provider_key);

// Sort key for an aggregate leaf: hash(0x02 || h1 || h2 || ...).
std::array<uint8_t, 32> aggregate_sort_key(const std::vector<Digest>& hashes);

}  // namespace diploma
