#include "diploma/provenance.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace diploma {

Json to_json(const ProvenanceRequest& r) {
  Json refs = Json::array();
  for (const auto& d : r.update_key_refs) refs.push_back(digest_hex(d));
  return Json{{"creation_key_ref", digest_hex(r.creation_key_ref)},
              {"freshness", r.freshness},
              {"tethering_point", to_json(r.tethering_point)},
              {"update_key_refs", refs}};
}

ProvenanceRequest request_from_json(const Json& j) {
  ProvenanceRequest r;
  r.tethering_point = tethering_from_json(j.at("tethering_point"));
  r.creation_key_ref = get_digest(j, "creation_key_ref");
  for (const auto& d : j.at("update_key_refs")) {
    r.update_key_refs.push_back(digest_from_hex(d.get<std::string>()));
  }
  r.freshness = get_u64(j, "freshness");
  return r;
}

ProvenanceRequest make_request(const DiplomaBundle& bundle, uint64_t freshness) {
  ProvenanceRequest r;
  r.tethering_point = bundle.certificate.datagram.tethering_point;
  r.creation_key_ref = bundle.certificate.datagram.creation_key.digest;
  r.update_key_refs.push_back(bundle.certificate.datagram.update_key.digest);
  for (const auto& u : bundle.updates) {
    r.update_key_refs.push_back(u.next_update_key.digest);
  }
  r.freshness = freshness;
  return r;
}

namespace {

Json to_json_evidence(const RecordEvidence& e) {
  return Json{{"epoch_index", e.epoch_index},
              {"path", to_json(e.path)},
              {"provider_id", e.provider_id},
              {"record", to_json(e.record)}};
}

RecordEvidence evidence_from_json(const Json& j) {
  RecordEvidence e;
  e.provider_id = get_string(j, "provider_id");
  e.epoch_index = get_u64(j, "epoch_index");
  e.record = txrecord_from_json(j.at("record"));
  e.path = path_from_json(j.at("path"));
  return e;
}

}  // namespace

Json to_json(const ProofOfProvenance& p) {
  Json records = Json::array();
  for (const auto& e : p.record_evidence) records.push_back(to_json_evidence(e));
  Json headers = Json::array();
  for (const auto& h : p.epoch_headers) headers.push_back(to_json(h));
  Json absence = Json::array();
  for (const auto& a : p.absence_evidence) {
    absence.push_back(Json{{"epoch_index", a.epoch_index}, {"proof", to_json(a.proof)}});
  }
  Json anchors = Json::array();
  for (const auto& a : p.anchors) {
    anchors.push_back(Json{{"block_height", a.block_height},
                           {"epoch_index", a.epoch_index},
                           {"provider_id", a.provider_id}});
  }
  Json trail = Json::array();
  for (const auto& t : p.provider_trail) trail.push_back(t);
  return Json{{"absence_evidence", absence},
              {"anchors", anchors},
              {"epoch_headers", headers},
              {"provider_trail", trail},
              {"record_evidence", records}};
}

ProofOfProvenance proof_from_json(const Json& j) {
  ProofOfProvenance p;
  for (const auto& e : j.at("record_evidence")) {
    p.record_evidence.push_back(evidence_from_json(e));
  }
  for (const auto& h : j.at("epoch_headers")) {
    p.epoch_headers.push_back(epoch_header_from_json(h));
  }
  for (const auto& a : j.at("absence_evidence")) {
    p.absence_evidence.push_back(
        {get_u64(a, "epoch_index"), absence_from_json(a.at("proof"))});
  }
  for (const auto& a : j.at("anchors")) {
    p.anchors.push_back({get_string(a, "provider_id"), get_u64(a, "epoch_index"),
                         get_u64(a, "block_height")});
  }
  for (const auto& t : j.at("provider_trail")) {
    p.provider_trail.push_back(t.get<std::string>());
  }
  return p;
}

namespace {

struct Located {
  ProviderId provider;
  uint64_t epoch = 0;
};

// A key ref appears in at most one epoch per provider; search every store the
// serving node holds.
std::optional<Located> locate(const MetadataView& view, const Digest& ref) {
  for (const auto& [provider, store] : view.stores) {
    if (auto e = store->find_key(ref.bytes)) return Located{provider, *e};
  }
  return std::nullopt;
}

}  // namespace

ProofOfProvenance build_proof(const ProvenanceRequest& request,
                              const MetadataView& view,
                              std::span<const LedgerBlock> ledger) {
  ProofOfProvenance proof;
  if (ledger.empty()) throw Error(Err::StaleLedger, "empty ledger view");
  const uint64_t head = ledger.back().height;

  auto tether_it = view.stores.find(request.tethering_point.provider_id);
  if (tether_it == view.stores.end()) {
    throw Error(Err::InsufficientMetadata,
                "no metadata for provider " + request.tethering_point.provider_id);
  }
  if (request.tethering_point.epoch_index >= tether_it->second->size()) {
    // The view provably stops short of the diploma's tethering epoch, so a
    // missing key means missing metadata, not an unregistered key.
    throw Error(Err::InsufficientMetadata,
                "metadata does not reach the tethering epoch");
  }

  // Locate every registered record: the creation key, then each update key
  // except the last (the pending watch key).
  std::vector<Located> located;
  {
    auto cert_epoch = tether_it->second->find_key(request.creation_key_ref.bytes);
    if (!cert_epoch) {
      throw Error(Err::UnknownKey, "creation key never registered");
    }
    located.push_back({request.tethering_point.provider_id, *cert_epoch});
  }
  if (request.update_key_refs.empty()) {
    throw Error(Err::UnknownKey, "request names no update key");
  }
  const size_t registered_updates = request.update_key_refs.size() - 1;
  for (size_t i = 0; i < registered_updates; ++i) {
    auto loc = locate(view, request.update_key_refs[i]);
    if (!loc) {
      throw Error(Err::UnknownKey, "update key never registered");
    }
    located.push_back(*loc);
  }
  const Digest watch = request.update_key_refs.back();

  // Group consecutive same-provider records into segments.
  struct Segment {
    ProviderId provider;
    uint64_t first_record_epoch = 0;
    uint64_t last_record_epoch = 0;
  };
  std::vector<Segment> segments;
  for (const Located& loc : located) {
    if (!segments.empty() && segments.back().provider == loc.provider) {
      if (loc.epoch < segments.back().last_record_epoch) {
        throw Error(Err::InsufficientMetadata, "record epochs out of order");
      }
      segments.back().last_record_epoch = loc.epoch;
    } else {
      segments.push_back({loc.provider, loc.epoch, loc.epoch});
    }
  }

  // Record evidence.
  std::vector<Digest> refs;
  refs.push_back(request.creation_key_ref);
  for (size_t i = 0; i < registered_updates; ++i) {
    refs.push_back(request.update_key_refs[i]);
  }
  for (size_t i = 0; i < located.size(); ++i) {
    const EpochStore& store = *view.stores.at(located[i].provider);
    auto [rec, path] = prove_membership(store.at(located[i].epoch), refs[i].bytes);
    proof.record_evidence.push_back(
        {located[i].provider, located[i].epoch, rec, path});
  }

  // Anchors: every segment needs its last relevant epoch committed to the
  // ledger; the final segment's anchor is the checkpoint and must satisfy the
  // freshness bound.
  for (size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    const EpochStore& store = *view.stores.at(seg.provider);
    bool is_final = (s + 1 == segments.size());
    std::optional<SegmentAnchor> anchor;
    for (const LedgerBlock& b : ledger) {
      for (const Commitment& c : b.commitments) {
        if (c.provider_id != seg.provider) continue;
        if (c.epoch_index < seg.last_record_epoch) continue;
        if (c.epoch_index >= store.size()) continue;  // no headers to back it
        if (store.at(c.epoch_index).header.chain_hash != c.chain_hash) continue;
        if (is_final) {
          if (head - b.height > request.freshness) continue;
          if (!anchor || c.epoch_index > anchor->epoch_index) {
            anchor = SegmentAnchor{seg.provider, c.epoch_index, b.height};
          }
        } else {
          if (!anchor || c.epoch_index < anchor->epoch_index) {
            anchor = SegmentAnchor{seg.provider, c.epoch_index, b.height};
          }
        }
      }
    }
    if (!anchor) {
      if (is_final) throw Error(Err::StaleLedger, "no commitment within freshness bound");
      throw Error(Err::InsufficientMetadata, "no ledger anchor for provider segment");
    }
    proof.anchors.push_back(*anchor);
  }

  // Headers: first segment starts at the tethering epoch, later ones at their
  // first record's epoch; all run through the segment anchor.
  for (size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    const EpochStore& store = *view.stores.at(seg.provider);
    uint64_t start =
        s == 0 ? request.tethering_point.epoch_index : seg.first_record_epoch;
    if (start > seg.first_record_epoch) {
      throw Error(Err::InsufficientMetadata, "record precedes tethering point");
    }
    for (uint64_t i = start; i <= proof.anchors[s].epoch_index; ++i) {
      proof.epoch_headers.push_back(store.at(i).header);
    }
    proof.provider_trail.push_back(seg.provider);
  }

  // Absence evidence for the watch key on the final provider, from the last
  // record's epoch through the checkpoint. prove_absence throws KeyPresent if
  // a further update was registered.
  {
    const Segment& seg = segments.back();
    const EpochStore& store = *view.stores.at(seg.provider);
    for (uint64_t i = seg.last_record_epoch; i <= proof.anchors.back().epoch_index;
         ++i) {
      proof.absence_evidence.push_back({i, prove_absence(store.at(i), watch.bytes)});
    }
  }
  return proof;
}

namespace {

struct VerifyContext {
  std::vector<std::string> integrity;
  std::vector<std::string> uniqueness;
  void fail_integrity(std::string r) { integrity.push_back(std::move(r)); }
  void fail_uniqueness(std::string r) { uniqueness.push_back(std::move(r)); }
};

}  // namespace

ProofVerdict verify_proof(const ProofOfProvenance& proof,
                          const DiplomaBundle& bundle, const ValidatorSet& vs,
                          std::span<const LedgerBlock> ledger,
                          uint64_t freshness) {
  ProofVerdict verdict;
  VerifyContext ctx;

  // Expected record facts from the bundle itself.
  const size_t n_records = 1 + bundle.updates.size();
  std::vector<Digest> expected_ref(n_records);
  std::vector<Digest> expected_hash(n_records);
  std::vector<ProviderId> expected_provider(n_records);
  expected_ref[0] = bundle.certificate.datagram.creation_key.digest;
  expected_hash[0] = record_hash(bundle.certificate);
  for (size_t i = 0; i < bundle.updates.size(); ++i) {
    expected_ref[i + 1] = key_ref(bundle.updates[i].signer_public_key).digest;
    expected_hash[i + 1] = record_hash(bundle.updates[i]);
  }
  for (size_t i = 0; i < n_records; ++i) {
    expected_provider[i] = record_provider(bundle, i);
  }
  const std::vector<ProviderId> trail = provider_trail(bundle);

  // --- headers: split into per-provider segments -----------------------
  struct Segment {
    ProviderId provider;
    size_t first = 0;  // header index range [first, last]
    size_t last = 0;
  };
  std::vector<Segment> segments;
  bool headers_ok = !proof.epoch_headers.empty();
  if (!headers_ok) ctx.fail_integrity("no epoch headers");
  for (size_t i = 0; i < proof.epoch_headers.size(); ++i) {
    const EpochHeader& h = proof.epoch_headers[i];
    if (segments.empty() || segments.back().provider != h.provider_id) {
      segments.push_back({h.provider_id, i, i});
    } else {
      segments.back().last = i;
    }
  }
  std::vector<ProviderId> seg_providers;
  for (const auto& s : segments) seg_providers.push_back(s.provider);
  if (headers_ok && seg_providers != trail) {
    ctx.fail_integrity("segment_order_mismatch");
    headers_ok = false;
  }
  if (headers_ok && proof.provider_trail != trail) {
    ctx.fail_integrity("provider_trail_mismatch");
  }

  // Per-segment linkage, recomputed chain hashes, provider signatures.
  if (headers_ok) {
    for (const Segment& seg : segments) {
      const PublicKey* pk = vs.find(seg.provider);
      if (!pk) {
        ctx.fail_integrity("unknown_provider:" + seg.provider);
        headers_ok = false;
        continue;
      }
      for (size_t i = seg.first; i <= seg.last; ++i) {
        const EpochHeader& h = proof.epoch_headers[i];
        if (compute_chain_hash(h.provider_id, h.index, h.prev_chain_hash,
                               h.merkle_root) != h.chain_hash) {
          ctx.fail_integrity("header_chain_hash_mismatch");
          headers_ok = false;
        }
        if (!verify(*pk, header_signing_preimage(h), h.provider_signature)) {
          ctx.fail_integrity("header_sig_invalid");
          headers_ok = false;
        }
        if (i > seg.first) {
          const EpochHeader& prev = proof.epoch_headers[i - 1];
          if (h.index != prev.index + 1 || h.prev_chain_hash != prev.chain_hash) {
            ctx.fail_integrity("header_chain_broken");
            headers_ok = false;
          }
        }
      }
    }
  }

  // Tethering point binds the first segment's first header.
  if (headers_ok) {
    const TetheringPoint& t = bundle.certificate.datagram.tethering_point;
    const EpochHeader& first = proof.epoch_headers[segments[0].first];
    if (first.provider_id != t.provider_id || first.index != t.epoch_index ||
        first.chain_hash != t.chain_hash) {
      ctx.fail_integrity("tethering_mismatch");
    }
  }

  auto find_header = [&](const ProviderId& provider,
                         uint64_t epoch_index) -> const EpochHeader* {
    for (const Segment& seg : segments) {
      if (seg.provider != provider) continue;
      uint64_t first_index = proof.epoch_headers[seg.first].index;
      uint64_t last_index = proof.epoch_headers[seg.last].index;
      if (epoch_index >= first_index && epoch_index <= last_index) {
        return &proof.epoch_headers[seg.first + (epoch_index - first_index)];
      }
    }
    return nullptr;
  };

  // --- record evidence --------------------------------------------------
  if (proof.record_evidence.size() != n_records) {
    ctx.fail_integrity("record_count_mismatch");
  } else {
    uint64_t prev_epoch = 0;
    ProviderId prev_provider;
    for (size_t i = 0; i < n_records; ++i) {
      const RecordEvidence& ev = proof.record_evidence[i];
      if (ev.provider_id != expected_provider[i]) {
        ctx.fail_integrity("record_provider_mismatch");
        continue;
      }
      if (Digest{ev.record.sort_key} != expected_ref[i]) {
        ctx.fail_integrity("record_key_mismatch");
      }
      if (ev.record.record_hash != expected_hash[i]) {
        ctx.fail_integrity("record_hash_mismatch");
      }
      if (!ev.record.public_key || !ev.record.signature ||
          key_ref(*ev.record.public_key).digest != Digest{ev.record.sort_key} ||
          !verify(*ev.record.public_key, ev.record.record_hash.bytes,
                  *ev.record.signature)) {
        ctx.fail_integrity("record_sig_invalid");
      }
      const EpochHeader* h = headers_ok ? find_header(ev.provider_id, ev.epoch_index)
                                        : nullptr;
      if (!h) {
        ctx.fail_integrity("record_epoch_out_of_range");
      } else if (!verify_membership(*h, ev.record, ev.path)) {
        ctx.fail_integrity("path_invalid");
      }
      if (i > 0 && ev.provider_id == prev_provider && ev.epoch_index < prev_epoch) {
        ctx.fail_integrity("record_epoch_order");
      }
      prev_epoch = ev.epoch_index;
      prev_provider = ev.provider_id;
    }
  }

  // --- ledger anchors and uniqueness ------------------------------------
  bool ledger_ok = verify_block_linkage(ledger);
  if (!ledger_ok) ctx.fail_uniqueness("ledger_linkage_broken");
  if (ledger.empty()) ctx.fail_uniqueness("empty_ledger");
  // Every block of the presented view must carry a valid quorum; the head in
  // particular sets the freshness reference, so an unverified tail is unsafe.
  for (const LedgerBlock& b : ledger) {
    if (!verify_block(b, vs)) {
      ctx.fail_uniqueness("block_invalid");
      break;
    }
  }
  if (proof.anchors.size() != segments.size() || !headers_ok) {
    ctx.fail_integrity("anchor_count_mismatch");
    ctx.fail_uniqueness("anchors_unverifiable");
  } else if (!ledger.empty()) {
    for (size_t s = 0; s < segments.size(); ++s) {
      const SegmentAnchor& a = proof.anchors[s];
      const Segment& seg = segments[s];
      const EpochHeader& last = proof.epoch_headers[seg.last];
      if (a.provider_id != seg.provider || a.epoch_index != last.index) {
        ctx.fail_integrity("anchor_mismatch");
        continue;
      }
      if (a.block_height >= ledger.size()) {
        ctx.fail_uniqueness("anchor_block_missing");
        continue;
      }
      const LedgerBlock& block = ledger[a.block_height];
      if (!verify_block(block, vs)) {
        ctx.fail_uniqueness("block_invalid");
        continue;
      }
      bool found = false;
      for (const Commitment& c : block.commitments) {
        if (c.provider_id == a.provider_id && c.epoch_index == a.epoch_index &&
            c.chain_hash == last.chain_hash) {
          found = true;
        }
      }
      if (!found) {
        ctx.fail_uniqueness("anchor_not_committed");
        continue;
      }
      // Equivocation: any conflicting chain hash for this (provider, index)
      // anywhere on the ledger breaks uniqueness.
      std::set<Digest> hashes;
      for (const auto& [height, c] : lookup_commitment(ledger, a.provider_id,
                                                       a.epoch_index)) {
        hashes.insert(c.chain_hash);
      }
      if (hashes.size() > 1) ctx.fail_uniqueness("conflicting_commitment");
    }
  }

  // --- absence evidence for the watch key -------------------------------
  const Digest watch = head_update_key(bundle).digest;
  if (!headers_ok || proof.record_evidence.size() != n_records ||
      proof.anchors.size() != segments.size()) {
    ctx.fail_integrity("absence_unverifiable");
  } else {
    uint64_t last_record_epoch = proof.record_evidence.back().epoch_index;
    uint64_t checkpoint = proof.anchors.back().epoch_index;
    const ProviderId& final_provider = trail.back();
    uint64_t expected = last_record_epoch;
    bool covered = true;
    for (const AbsenceEvidence& a : proof.absence_evidence) {
      if (a.epoch_index != expected) {
        covered = false;
        break;
      }
      const EpochHeader* h = find_header(final_provider, a.epoch_index);
      if (!h || !verify_absence(*h, watch.bytes, a.proof)) {
        ctx.fail_integrity("absence_invalid");
        covered = false;
        break;
      }
      ++expected;
    }
    if (covered && expected != checkpoint + 1) covered = false;
    if (!covered) ctx.fail_integrity("absence_missing");
  }

  // --- freshness ---------------------------------------------------------
  verdict.fresh = false;
  if (!ledger.empty() && proof.anchors.size() == segments.size() &&
      !proof.anchors.empty()) {
    uint64_t head = ledger.back().height;
    uint64_t h = proof.anchors.back().block_height;
    if (h <= head && head - h <= freshness) verdict.fresh = true;
  }
  if (!verdict.fresh) verdict.failure_reasons.push_back("stale_checkpoint");

  verdict.integrity_ok = ctx.integrity.empty();
  verdict.uniqueness_ok = ctx.uniqueness.empty();
  for (auto& r : ctx.integrity) verdict.failure_reasons.push_back("integrity:" + r);
  for (auto& r : ctx.uniqueness) verdict.failure_reasons.push_back("uniqueness:" + r);
  if (verdict.all_ok()) verdict.failure_reasons.clear();
  return verdict;
}

}  // namespace diploma
