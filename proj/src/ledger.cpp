#include "diploma/ledger.hpp"

#include <set>

namespace diploma {

Json to_json(const Commitment& c) {
  return Json{{"chain_hash", digest_hex(c.chain_hash)},
              {"epoch_index", c.epoch_index},
              {"provider_id", c.provider_id},
              {"provider_signature", to_hex(c.provider_signature.bytes)}};
}

Commitment commitment_from_json(const Json& j) {
  Commitment c;
  c.provider_id = get_string(j, "provider_id");
  c.epoch_index = get_u64(j, "epoch_index");
  c.chain_hash = get_digest(j, "chain_hash");
  c.provider_signature = get_signature(j, "provider_signature");
  return c;
}

Bytes commitment_signing_preimage(const ProviderId& provider,
                                  uint64_t epoch_index, const Digest& chain_hash) {
  Json j{{"chain_hash", digest_hex(chain_hash)},
         {"epoch_index", epoch_index},
         {"provider_id", provider}};
  return to_bytes(canonical_dump(j));
}

Commitment make_commitment(const IntegrityProvider& provider,
                           uint64_t epoch_index) {
  const Epoch& e = provider.store().at(epoch_index);
  Commitment c;
  c.provider_id = provider.id();
  c.epoch_index = epoch_index;
  c.chain_hash = e.header.chain_hash;
  c.provider_signature = provider.sign_as_provider(
      commitment_signing_preimage(c.provider_id, c.epoch_index, c.chain_hash));
  return c;
}

Json to_json(const LedgerBlock& b) {
  Json commitments = Json::array();
  for (const auto& c : b.commitments) commitments.push_back(to_json(c));
  Json sigs = Json::array();
  for (const auto& q : b.quorum_signatures) {
    sigs.push_back(Json{{"signature", to_hex(q.signature.bytes)},
                        {"validator_id", q.validator_id}});
  }
  return Json{{"commitments", commitments},
              {"height", b.height},
              {"prev_block_hash", digest_hex(b.prev_block_hash)},
              {"quorum_signatures", sigs}};
}

LedgerBlock block_from_json(const Json& j) {
  LedgerBlock b;
  b.height = get_u64(j, "height");
  b.prev_block_hash = get_digest(j, "prev_block_hash");
  for (const auto& c : j.at("commitments")) {
    b.commitments.push_back(commitment_from_json(c));
  }
  for (const auto& q : j.at("quorum_signatures")) {
    b.quorum_signatures.push_back(
        {get_string(q, "validator_id"), get_signature(q, "signature")});
  }
  return b;
}

Bytes block_signing_preimage(const LedgerBlock& b) {
  Json commitments = Json::array();
  for (const auto& c : b.commitments) commitments.push_back(to_json(c));
  Json j{{"commitments", commitments},
         {"height", b.height},
         {"prev_block_hash", digest_hex(b.prev_block_hash)}};
  return to_bytes(canonical_dump(j));
}

Digest block_hash(const LedgerBlock& b) {
  return hash(to_bytes(canonical_dump(to_json(b))));
}

const PublicKey* ValidatorSet::find(const std::string& id) const {
  for (const auto& [vid, key] : members) {
    if (vid == id) return &key;
  }
  return nullptr;
}

Json to_json(const ValidatorSet& v) {
  Json members = Json::array();
  for (const auto& [id, key] : v.members) {
    members.push_back(Json{{"public_key", to_hex(key.bytes)}, {"validator_id", id}});
  }
  return Json{{"members", members}, {"threshold", v.threshold}};
}

ValidatorSet validator_set_from_json(const Json& j) {
  ValidatorSet v;
  for (const auto& m : j.at("members")) {
    v.members.emplace_back(get_string(m, "validator_id"),
                           get_public_key(m, "public_key"));
  }
  v.threshold = static_cast<uint32_t>(get_u64(j, "threshold"));
  return v;
}

Ledger::Ledger(ValidatorSet vs) : vs_(std::move(vs)) {
  if (vs_.threshold < 1 || vs_.threshold > vs_.members.size()) {
    throw Error(Err::ConfigError, "threshold out of range");
  }
  std::set<std::string> ids;
  for (const auto& [id, key] : vs_.members) {
    if (!ids.insert(id).second) throw Error(Err::ConfigError, "duplicate validator id");
  }
}

uint64_t Ledger::head_height() const {
  if (blocks_.empty()) throw Error(Err::NotFound, "ledger is empty");
  return blocks_.back().height;
}

void Ledger::submit_commitment(const Commitment& c) {
  const PublicKey* key = vs_.find(c.provider_id);
  if (!key || !verify(*key,
                      commitment_signing_preimage(c.provider_id, c.epoch_index,
                                                  c.chain_hash),
                      c.provider_signature)) {
    throw Error(Err::Rejected, "commitment signature invalid");
  }
  queue_.push_back(c);
}

const LedgerBlock& Ledger::produce_block(std::span<const SignerId> signers) {
  std::set<std::string> distinct;
  for (const auto& s : signers) {
    if (!vs_.find(s.id)) throw Error(Err::ConfigError, "signer not in validator set");
    distinct.insert(s.id);
  }
  if (distinct.size() < vs_.threshold) {
    throw Error(Err::InsufficientQuorum, "fewer than threshold distinct signers");
  }
  LedgerBlock b;
  b.height = blocks_.empty() ? 0 : blocks_.back().height + 1;
  b.prev_block_hash = blocks_.empty() ? kZeroDigest : block_hash(blocks_.back());
  b.commitments = std::move(queue_);
  queue_.clear();
  Bytes preimage = block_signing_preimage(b);
  std::set<std::string> signed_ids;
  for (const auto& s : signers) {
    if (!signed_ids.insert(s.id).second) continue;
    b.quorum_signatures.push_back({s.id, sign(s.key.secret, preimage)});
  }
  blocks_.push_back(std::move(b));
  return blocks_.back();
}

bool verify_block(const LedgerBlock& b, const ValidatorSet& vs) {
  if (b.height == 0 && b.prev_block_hash != kZeroDigest) return false;
  std::set<std::string> distinct;
  Bytes preimage = block_signing_preimage(b);
  for (const auto& q : b.quorum_signatures) {
    const PublicKey* key = vs.find(q.validator_id);
    if (!key) return false;
    if (!distinct.insert(q.validator_id).second) return false;
    if (!verify(*key, preimage, q.signature)) return false;
  }
  return distinct.size() >= vs.threshold;
}

bool verify_block_linkage(std::span<const LedgerBlock> blocks) {
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].height != i) return false;
    Digest expected = i == 0 ? kZeroDigest : block_hash(blocks[i - 1]);
    if (blocks[i].prev_block_hash != expected) return false;
  }
  return true;
}

std::vector<std::pair<uint64_t, Commitment>> lookup_commitment(
    std::span<const LedgerBlock> blocks, const ProviderId& provider,
    uint64_t epoch_index) {
  std::vector<std::pair<uint64_t, Commitment>> out;
  for (const LedgerBlock& b : blocks) {
    for (const Commitment& c : b.commitments) {
      if (c.provider_id == provider && c.epoch_index == epoch_index) {
        out.emplace_back(b.height, c);
      }
    }
  }
  return out;
}

Json ledger_snapshot_json(std::span<const LedgerBlock> blocks) {
  Json arr = Json::array();
  for (const auto& b : blocks) arr.push_back(to_json(b));
  return Json{{"blocks", arr}};
}

std::vector<LedgerBlock> ledger_snapshot_from_json(const Json& j) {
  std::vector<LedgerBlock> blocks;
  for (const auto& b : j.at("blocks")) blocks.push_back(block_from_json(b));
  return blocks;
}

}  // namespace diploma
