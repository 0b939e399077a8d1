#pragma once

#include <span>
#include <vector>

#include "diploma/provider.hpp"

namespace diploma {

struct Commitment {
  ProviderId provider_id;
  uint64_t epoch_index = 0;
  Digest chain_hash;
  Signature provider_signature;

  bool operator==(const Commitment&) const = default;
};

Json to_json(const Commitment& c);
Commitment commitment_from_json(const Json& j);
Bytes commitment_signing_preimage(const ProviderId& provider, uint64_t epoch_index,
                                  const Digest& chain_hash);

Commitment make_commitment(const IntegrityProvider& provider, uint64_t epoch_index);

struct QuorumSignature {
  std::string validator_id;
  Signature signature;
  bool operator==(const QuorumSignature&) const = default;
};

struct LedgerBlock {
  uint64_t height = 0;
  Digest prev_block_hash;  // zero for height 0
  std::vector<Commitment> commitments;
  std::vector<QuorumSignature> quorum_signatures;

  bool operator==(const LedgerBlock&) const = default;
};

Json to_json(const LedgerBlock& b);
LedgerBlock block_from_json(const Json& j);

Digest block_hash(const LedgerBlock& b);
Bytes block_signing_preimage(const LedgerBlock& b);

struct ValidatorSet {
  std::vector<std::pair<std::string, PublicKey>> members;
  uint32_t threshold = 1;

  const PublicKey* find(const std::string& id) const;
};

Json to_json(const ValidatorSet& v);
ValidatorSet validator_set_from_json(const Json& j);

struct SignerId {
  std::string id;
  KeyPair key;
};

class Ledger {
 public:
  explicit Ledger(ValidatorSet vs);

  const ValidatorSet& validator_set() const { return vs_; }
  const std::vector<LedgerBlock>& blocks() const { return blocks_; }
  uint64_t head_height() const;  // throws NotFound when empty

  // Verifies the provider signature against the validator-set key of
  // provider_id. Conflicting commitments for the same (provider, index) are
  // queued too; equivocation is surfaced downstream, not dropped here.
  void submit_commitment(const Commitment& c);

  const LedgerBlock& produce_block(std::span<const SignerId> signers);

 private:
  ValidatorSet vs_;
  std::vector<LedgerBlock> blocks_;
  std::vector<Commitment> queue_;
};

bool verify_block(const LedgerBlock& b, const ValidatorSet& vs);

// prev_block_hash linkage across the whole span.
bool verify_block_linkage(std::span<const LedgerBlock> blocks);

std::vector<std::pair<uint64_t, Commitment>> lookup_commitment(
    std::span<const LedgerBlock> blocks, const ProviderId& provider,
    uint64_t epoch_index);

Json ledger_snapshot_json(std::span<const LedgerBlock> blocks);
std::vector<LedgerBlock> ledger_snapshot_from_json(const Json& j);

}  // namespace diploma
