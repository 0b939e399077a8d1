#include "diploma/provider.hpp"

#include <algorithm>

namespace diploma {

Json to_json(const TransactionRecord& r) {
  Json j{{"record_hash", digest_hex(r.record_hash)},
         {"sort_key", to_hex(r.sort_key)}};
  if (r.public_key) j["public_key"] = to_hex(r.public_key->bytes);
  if (r.signature) j["signature"] = to_hex(r.signature->bytes);
  return j;
}

TransactionRecord txrecord_from_json(const Json& j) {
  TransactionRecord r;
  Bytes sk = from_hex(get_string(j, "sort_key"));
  if (sk.size() != 32) throw Error(Err::DecodeError, "sort_key must be 32 bytes");
  std::copy(sk.begin(), sk.end(), r.sort_key.begin());
  r.record_hash = get_digest(j, "record_hash");
  if (j.contains("public_key")) r.public_key = get_public_key(j, "public_key");
  if (j.contains("signature")) r.signature = get_signature(j, "signature");
  return r;
}

Digest compute_chain_hash(const ProviderId& provider, uint64_t index,
                          const Digest& prev_chain_hash, const Digest& root) {
  Json j{{"index", index},
         {"merkle_root", digest_hex(root)},
         {"prev_chain_hash", digest_hex(prev_chain_hash)},
         {"provider_id", provider}};
  return hash(to_bytes(canonical_dump(j)));
}

Bytes header_signing_preimage(const EpochHeader& h) {
  Json j{{"chain_hash", digest_hex(h.chain_hash)},
         {"index", h.index},
         {"leaf_count", h.leaf_count},
         {"merkle_root", digest_hex(h.merkle_root)},
         {"prev_chain_hash", digest_hex(h.prev_chain_hash)},
         {"provider_id", h.provider_id}};
  return to_bytes(canonical_dump(j));
}

Json to_json(const EpochHeader& h) {
  return Json{{"chain_hash", digest_hex(h.chain_hash)},
              {"index", h.index},
              {"leaf_count", h.leaf_count},
              {"merkle_root", digest_hex(h.merkle_root)},
              {"prev_chain_hash", digest_hex(h.prev_chain_hash)},
              {"provider_id", h.provider_id},
              {"provider_signature", to_hex(h.provider_signature.bytes)}};
}

EpochHeader epoch_header_from_json(const Json& j) {
  EpochHeader h;
  h.provider_id = get_string(j, "provider_id");
  h.index = get_u64(j, "index");
  h.prev_chain_hash = get_digest(j, "prev_chain_hash");
  h.merkle_root = get_digest(j, "merkle_root");
  h.leaf_count = get_u64(j, "leaf_count");
  h.chain_hash = get_digest(j, "chain_hash");
  h.provider_signature = get_signature(j, "provider_signature");
  return h;
}

Json to_json(const Epoch& e) {
  Json leaves = Json::array();
  for (const auto& l : e.leaves) leaves.push_back(to_json(l));
  return Json{{"header", to_json(e.header)}, {"leaves", leaves}};
}

Epoch epoch_from_json(const Json& j) {
  Epoch e;
  e.header = epoch_header_from_json(j.at("header"));
  for (const auto& l : j.at("leaves")) e.leaves.push_back(txrecord_from_json(l));
  return e;
}

Json to_json(const MerklePath& p) {
  Json steps = Json::array();
  for (const auto& s : p.steps) {
    steps.push_back(Json{{"level", s.level},
                         {"on_left", s.sibling_on_left},
                         {"sibling", digest_hex(s.sibling)}});
  }
  return Json{{"leaf_index", p.leaf_index}, {"steps", steps}};
}

MerklePath path_from_json(const Json& j) {
  MerklePath p;
  p.leaf_index = get_u64(j, "leaf_index");
  for (const auto& s : j.at("steps")) {
    PathStep step;
    step.sibling = get_digest(s, "sibling");
    step.level = static_cast<uint32_t>(get_u64(s, "level"));
    if (!s.contains("on_left") || !s.at("on_left").is_boolean()) {
      throw Error(Err::DecodeError, "on_left must be boolean");
    }
    step.sibling_on_left = s.at("on_left").get<bool>();
    p.steps.push_back(step);
  }
  return p;
}

const char* absence_case_name(AbsenceCase c) {
  switch (c) {
    case AbsenceCase::EmptyEpoch: return "empty_epoch";
    case AbsenceCase::BelowFirst: return "below_first";
    case AbsenceCase::AboveLast: return "above_last";
    case AbsenceCase::BetweenAdjacent: return "between_adjacent";
  }
  return "empty_epoch";
}

AbsenceCase absence_case_from_name(std::string_view s) {
  if (s == "empty_epoch") return AbsenceCase::EmptyEpoch;
  if (s == "below_first") return AbsenceCase::BelowFirst;
  if (s == "above_last") return AbsenceCase::AboveLast;
  if (s == "between_adjacent") return AbsenceCase::BetweenAdjacent;
  throw Error(Err::DecodeError, "unknown absence case");
}

namespace {
Json neighbor_json(const std::pair<TransactionRecord, MerklePath>& n) {
  return Json{{"path", to_json(n.second)}, {"record", to_json(n.first)}};
}
std::pair<TransactionRecord, MerklePath> neighbor_from_json(const Json& j) {
  return {txrecord_from_json(j.at("record")), path_from_json(j.at("path"))};
}
}  // namespace

Json to_json(const AbsenceProof& p) {
  Json j{{"case", absence_case_name(p.kind)}};
  if (p.left) j["left"] = neighbor_json(*p.left);
  if (p.right) j["right"] = neighbor_json(*p.right);
  return j;
}

AbsenceProof absence_from_json(const Json& j) {
  AbsenceProof p;
  p.kind = absence_case_from_name(get_string(j, "case"));
  if (j.contains("left")) p.left = neighbor_from_json(j.at("left"));
  if (j.contains("right")) p.right = neighbor_from_json(j.at("right"));
  return p;
}

Json to_json(const MetadataBatch& b) {
  Json epochs = Json::array();
  for (const auto& e : b.epochs) epochs.push_back(to_json(e));
  return Json{{"epochs", epochs}, {"provider_id", b.provider_id}};
}

MetadataBatch batch_from_json(const Json& j) {
  MetadataBatch b;
  b.provider_id = get_string(j, "provider_id");
  for (const auto& e : j.at("epochs")) b.epochs.push_back(epoch_from_json(e));
  return b;
}

const Epoch& EpochStore::at(uint64_t index) const {
  if (index >= epochs_.size()) throw Error(Err::NotSealed, "epoch not sealed");
  return epochs_[index];
}

std::optional<uint64_t> EpochStore::find_key(
    const std::array<uint8_t, 32>& sort_key) const {
  for (const Epoch& e : epochs_) {
    auto it = std::lower_bound(
        e.leaves.begin(), e.leaves.end(), sort_key,
        [](const TransactionRecord& r, const std::array<uint8_t, 32>& k) {
          return r.sort_key < k;
        });
    if (it != e.leaves.end() && it->sort_key == sort_key) return e.header.index;
  }
  return std::nullopt;
}

IntegrityProvider::IntegrityProvider(ProviderId id, KeyPair signing_key)
    : id_(std::move(id)), key_(std::move(signing_key)) {
  seal_epoch();  // genesis
}

RegistrationReceipt IntegrityProvider::register_submission(
    const TransactionSubmission& s) {
  if (!verify(s.public_key, s.record_hash.bytes, s.signature)) {
    throw Error(Err::InvalidSubmission, "submission signature does not verify");
  }
  TransactionRecord rec;
  rec.sort_key = key_ref(s.public_key).digest.bytes;
  rec.public_key = s.public_key;
  rec.record_hash = s.record_hash;
  rec.signature = s.signature;
  if (store_.find_key(rec.sort_key) || pending_.contains(rec.sort_key)) {
    throw Error(Err::DuplicateKey, "one-time key already registered");
  }
  pending_.emplace(rec.sort_key, std::move(rec));
  return {static_cast<uint64_t>(store_.size())};  // next epoch to be sealed
}

std::array<uint8_t, 32> aggregate_sort_key(const std::vector<Digest>& hashes) {
  Bytes buf;
  buf.push_back(kAggregateDomain);
  for (const Digest& h : hashes) {
    buf.insert(buf.end(), h.bytes.begin(), h.bytes.end());
  }
  return hash(buf).bytes;
}

void IntegrityProvider::aggregate_private(const std::vector<Digest>& hashes) {
  if (hashes.empty()) throw Error(Err::EmptyAggregate, "no hashes to aggregate");
  TransactionRecord rec;
  rec.sort_key = aggregate_sort_key(hashes);
  Bytes buf;
  for (const Digest& h : hashes) buf.insert(buf.end(), h.bytes.begin(), h.bytes.end());
  rec.record_hash = hash(buf);
  if (store_.find_key(rec.sort_key) || pending_.contains(rec.sort_key)) {
    throw Error(Err::DuplicateKey, "aggregate already registered");
  }
  pending_.emplace(rec.sort_key, std::move(rec));
}

const Epoch& IntegrityProvider::seal_epoch() {
  Epoch e;
  e.header.provider_id = id_;
  e.header.index = store_.size();
  e.header.prev_chain_hash =
      store_.size() == 0 ? kZeroDigest : store_.epochs().back().header.chain_hash;
  for (auto& [key, rec] : pending_) e.leaves.push_back(rec);  // map: already sorted
  pending_.clear();
  std::vector<Digest> leaf_hashes;
  leaf_hashes.reserve(e.leaves.size());
  for (const auto& l : e.leaves) leaf_hashes.push_back(l.leaf_hash());
  e.header.merkle_root = merkle_root(leaf_hashes);
  e.header.leaf_count = e.leaves.size();
  e.header.chain_hash = compute_chain_hash(id_, e.header.index,
                                           e.header.prev_chain_hash,
                                           e.header.merkle_root);
  e.header.provider_signature = sign(key_.secret, header_signing_preimage(e.header));
  store_.append(std::move(e));
  return store_.epochs().back();
}

TetheringPoint IntegrityProvider::tethering_point() const {
  const Epoch& e = store_.epochs().back();
  return {id_, e.header.index, e.header.chain_hash};
}

Signature IntegrityProvider::sign_as_provider(ByteView message) const {
  return sign(key_.secret, message);
}

std::pair<TransactionRecord, MerklePath> prove_membership(
    const Epoch& epoch, const std::array<uint8_t, 32>& sort_key) {
  auto it = std::lower_bound(
      epoch.leaves.begin(), epoch.leaves.end(), sort_key,
      [](const TransactionRecord& r, const std::array<uint8_t, 32>& k) {
        return r.sort_key < k;
      });
  if (it == epoch.leaves.end() || it->sort_key != sort_key) {
    throw Error(Err::NotFound, "sort key not in epoch");
  }
  size_t index = static_cast<size_t>(it - epoch.leaves.begin());
  std::vector<Digest> leaf_hashes;
  leaf_hashes.reserve(epoch.leaves.size());
  for (const auto& l : epoch.leaves) leaf_hashes.push_back(l.leaf_hash());
  return {*it, merkle_path(leaf_hashes, index)};
}

AbsenceProof prove_absence(const Epoch& epoch,
                           const std::array<uint8_t, 32>& sort_key) {
  AbsenceProof proof;
  if (epoch.leaves.empty()) {
    proof.kind = AbsenceCase::EmptyEpoch;
    return proof;
  }
  std::vector<Digest> leaf_hashes;
  leaf_hashes.reserve(epoch.leaves.size());
  for (const auto& l : epoch.leaves) leaf_hashes.push_back(l.leaf_hash());
  auto it = std::lower_bound(
      epoch.leaves.begin(), epoch.leaves.end(), sort_key,
      [](const TransactionRecord& r, const std::array<uint8_t, 32>& k) {
        return r.sort_key < k;
      });
  if (it != epoch.leaves.end() && it->sort_key == sort_key) {
    throw Error(Err::KeyPresent, "sort key is present in epoch");
  }
  // Boundary leaves are cited only for their sort_key and record_hash (the
  // leaf-hash preimage); the submission key and signature are immaterial to
  // the absence statement and are stripped so proofs carry no dead weight.
  auto boundary = [&](size_t i) {
    TransactionRecord rec = epoch.leaves[i];
    rec.public_key.reset();
    rec.signature.reset();
    return std::pair(std::move(rec), merkle_path(leaf_hashes, i));
  };
  size_t idx = static_cast<size_t>(it - epoch.leaves.begin());
  if (idx == 0) {
    proof.kind = AbsenceCase::BelowFirst;
    proof.right = boundary(0);
  } else if (idx == epoch.leaves.size()) {
    proof.kind = AbsenceCase::AboveLast;
    proof.left = boundary(idx - 1);
  } else {
    proof.kind = AbsenceCase::BetweenAdjacent;
    proof.left = boundary(idx - 1);
    proof.right = boundary(idx);
  }
  return proof;
}

bool verify_membership(const EpochHeader& header, const TransactionRecord& rec,
                       const MerklePath& path) {
  if (!merkle_path_shape_ok(path, header.leaf_count)) return false;
  return merkle_fold(rec.leaf_hash(), path) == header.merkle_root;
}

bool verify_absence(const EpochHeader& header,
                    const std::array<uint8_t, 32>& sort_key,
                    const AbsenceProof& proof) {
  switch (proof.kind) {
    case AbsenceCase::EmptyEpoch:
      return header.leaf_count == 0 && header.merkle_root == merkle_empty_root() &&
             !proof.left && !proof.right;
    case AbsenceCase::BelowFirst:
      return !proof.left && proof.right && proof.right->second.leaf_index == 0 &&
             verify_membership(header, proof.right->first, proof.right->second) &&
             sort_key < proof.right->first.sort_key;
    case AbsenceCase::AboveLast:
      return !proof.right && proof.left &&
             proof.left->second.leaf_index + 1 == header.leaf_count &&
             verify_membership(header, proof.left->first, proof.left->second) &&
             proof.left->first.sort_key < sort_key;
    case AbsenceCase::BetweenAdjacent:
      return proof.left && proof.right &&
             proof.left->second.leaf_index + 1 == proof.right->second.leaf_index &&
             verify_membership(header, proof.left->first, proof.left->second) &&
             verify_membership(header, proof.right->first, proof.right->second) &&
             proof.left->first.sort_key < sort_key &&
             sort_key < proof.right->first.sort_key;
  }
  return false;
}

bool verify_epoch(const Epoch& e, const PublicKey& provider_key) {
  for (size_t i = 0; i + 1 < e.leaves.size(); ++i) {
    if (!(e.leaves[i].sort_key < e.leaves[i + 1].sort_key)) return false;
  }
  if (e.header.leaf_count != e.leaves.size()) return false;
  for (const auto& l : e.leaves) {
    // Submitted records carry key and signature together; aggregate leaves
    // carry neither. The signature must check out: it is not covered by the
    // merkle root, so a replica has to validate it before serving the leaf.
    if (l.public_key.has_value() != l.signature.has_value()) return false;
    if (l.public_key &&
        (key_ref(*l.public_key).digest.bytes != l.sort_key ||
         !verify(*l.public_key, l.record_hash.bytes, *l.signature))) {
      return false;
    }
  }
  std::vector<Digest> leaf_hashes;
  leaf_hashes.reserve(e.leaves.size());
  for (const auto& l : e.leaves) leaf_hashes.push_back(l.leaf_hash());
  if (merkle_root(leaf_hashes) != e.header.merkle_root) return false;
  if (compute_chain_hash(e.header.provider_id, e.header.index,
                         e.header.prev_chain_hash,
                         e.header.merkle_root) != e.header.chain_hash) {
    return false;
  }
  return verify(provider_key, header_signing_preimage(e.header),
                e.header.provider_signature);
}

MetadataBatch export_metadata(const ProviderId& id, const EpochStore& store,
                              uint64_t from, uint64_t to) {
  if (to >= store.size() || from > to) {
    throw Error(Err::NotSealed, "export range not sealed");
  }
  MetadataBatch b;
  b.provider_id = id;
  for (uint64_t i = from; i <= to; ++i) b.epochs.push_back(store.at(i));
  return b;
}

ImportReport import_metadata(EpochStore& store, const MetadataBatch& batch,
                             const PublicKey& provider_key) {
  ImportReport report;
  if (batch.epochs.empty()) return report;
  report.first_index = batch.epochs.front().header.index;
  for (const Epoch& e : batch.epochs) {
    if (!verify_epoch(e, provider_key) ||
        e.header.provider_id != batch.provider_id) {
      throw Error(Err::CorruptBatch, "epoch fails verification");
    }
    uint64_t idx = e.header.index;
    if (idx < store.size()) {
      if (!(store.at(idx) == e)) {
        throw Error(Err::CorruptBatch, "epoch conflicts with already imported history");
      }
      continue;
    }
    if (idx != store.size()) {
      throw Error(Err::CorruptBatch, "chain gap: missing predecessor epochs");
    }
    Digest expected_prev =
        idx == 0 ? kZeroDigest : store.at(idx - 1).header.chain_hash;
    if (e.header.prev_chain_hash != expected_prev) {
      throw Error(Err::CorruptBatch, "broken chain hash linkage");
    }
    store.append(e);
    ++report.imported;
    report.last_index = idx;
  }
  return report;
}

}  // namespace diploma
