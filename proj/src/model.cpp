#include "diploma/model.hpp"

#include <set>

namespace diploma {

Json to_json(const TetheringPoint& t) {
  return Json{{"chain_hash", digest_hex(t.chain_hash)},
              {"epoch_index", t.epoch_index},
              {"provider_id", t.provider_id}};
}

TetheringPoint tethering_from_json(const Json& j) {
  TetheringPoint t;
  t.provider_id = get_string(j, "provider_id");
  t.epoch_index = get_u64(j, "epoch_index");
  t.chain_hash = get_digest(j, "chain_hash");
  return t;
}

Json to_json(const CertificateDatagram& d) {
  Json j = Json::object();
  if (d.issued_at) j["issued_at"] = *d.issued_at;
  if (d.holder_id) j["holder_id"] = *d.holder_id;
  if (d.issuer_id) j["issuer_id"] = *d.issuer_id;
  if (d.issuer_cert_chain) j["issuer_cert_chain"] = to_hex(*d.issuer_cert_chain);
  if (d.awarder_id) j["awarder_id"] = *d.awarder_id;
  if (d.awarder_cert_chain) j["awarder_cert_chain"] = to_hex(*d.awarder_cert_chain);
  if (d.qualification) j["qualification"] = *d.qualification;
  if (d.controller_id) j["controller_id"] = *d.controller_id;
  if (d.expires_at) j["expires_at"] = *d.expires_at;
  j["creation_key"] = digest_hex(d.creation_key.digest);
  j["update_key"] = digest_hex(d.update_key.digest);
  j["tethering_point"] = to_json(d.tethering_point);
  return j;
}

CertificateDatagram datagram_from_json(const Json& j) {
  CertificateDatagram d;
  d.issued_at = opt_i64(j, "issued_at");
  d.holder_id = opt_string(j, "holder_id");
  d.issuer_id = opt_string(j, "issuer_id");
  if (j.contains("issuer_cert_chain"))
    d.issuer_cert_chain = from_hex(get_string(j, "issuer_cert_chain"));
  d.awarder_id = opt_string(j, "awarder_id");
  if (j.contains("awarder_cert_chain"))
    d.awarder_cert_chain = from_hex(get_string(j, "awarder_cert_chain"));
  d.qualification = opt_string(j, "qualification");
  d.controller_id = opt_string(j, "controller_id");
  d.expires_at = opt_i64(j, "expires_at");
  d.creation_key = get_key_ref(j, "creation_key");
  d.update_key = get_key_ref(j, "update_key");
  d.tethering_point = tethering_from_json(j.at("tethering_point"));
  for (const char* f : {"holder_id", "issuer_id", "awarder_id", "qualification",
                        "controller_id"}) {
    if (auto v = opt_string(j, f); v && !is_valid_utf8(*v)) {
      throw Error(Err::DecodeError, std::string(f) + " is not valid UTF-8");
    }
  }
  return d;
}

Json to_json(const InitialCertificate& c) {
  return Json{{"datagram", to_json(c.datagram)},
              {"issuer_public_key", to_hex(c.issuer_public_key.bytes)},
              {"issuer_signature", to_hex(c.issuer_signature.bytes)}};
}

InitialCertificate certificate_from_json(const Json& j) {
  InitialCertificate c;
  c.datagram = datagram_from_json(j.at("datagram"));
  c.issuer_public_key = get_public_key(j, "issuer_public_key");
  c.issuer_signature = get_signature(j, "issuer_signature");
  return c;
}

const char* action_name(UpdateAction a) {
  switch (a) {
    case UpdateAction::Routine: return "routine";
    case UpdateAction::Revoke: return "revoke";
    case UpdateAction::Reinstate: return "reinstate";
  }
  return "routine";
}

UpdateAction action_from_name(std::string_view name) {
  if (name == "routine") return UpdateAction::Routine;
  if (name == "revoke") return UpdateAction::Revoke;
  if (name == "reinstate") return UpdateAction::Reinstate;
  throw Error(Err::DecodeError, "unknown update action");
}

Json UpdateRecord::signing_preimage() const {
  Json j{{"action", action_name(action)},
         {"next_update_key", digest_hex(next_update_key.digest)},
         {"note", note},
         {"prev_record_hash", digest_hex(prev_record_hash)},
         {"signer_public_key", to_hex(signer_public_key.bytes)}};
  if (new_provider) j["new_provider"] = *new_provider;
  return j;
}

Json to_json(const UpdateRecord& u) {
  Json j = u.signing_preimage();
  j["signature"] = to_hex(u.signature.bytes);
  return j;
}

UpdateRecord update_from_json(const Json& j) {
  UpdateRecord u;
  u.prev_record_hash = get_digest(j, "prev_record_hash");
  u.action = action_from_name(get_string(j, "action"));
  u.note = get_string(j, "note");
  if (!is_valid_utf8(u.note)) throw Error(Err::DecodeError, "note is not valid UTF-8");
  u.next_update_key = get_key_ref(j, "next_update_key");
  u.new_provider = opt_string(j, "new_provider");
  u.signer_public_key = get_public_key(j, "signer_public_key");
  u.signature = get_signature(j, "signature");
  return u;
}

Json to_json(const DiplomaBundle& b) {
  Json updates = Json::array();
  for (const auto& u : b.updates) updates.push_back(to_json(u));
  return Json{{"certificate", to_json(b.certificate)}, {"updates", updates}};
}

DiplomaBundle bundle_from_json(const Json& j) {
  DiplomaBundle b;
  b.certificate = certificate_from_json(j.at("certificate"));
  const Json& updates = j.at("updates");
  if (!updates.is_array()) throw Error(Err::DecodeError, "updates must be an array");
  for (const auto& u : updates) b.updates.push_back(update_from_json(u));
  return b;
}

const char* status_name(StatusValue s) {
  switch (s) {
    case StatusValue::Active: return "active";
    case StatusValue::Revoked: return "revoked";
    case StatusValue::Expired: return "expired";
  }
  return "active";
}

Json to_json(const TransactionSubmission& s) {
  return Json{{"public_key", to_hex(s.public_key.bytes)},
              {"record_hash", digest_hex(s.record_hash)},
              {"signature", to_hex(s.signature.bytes)}};
}

TransactionSubmission submission_from_json(const Json& j) {
  TransactionSubmission s;
  s.public_key = get_public_key(j, "public_key");
  s.record_hash = get_digest(j, "record_hash");
  s.signature = get_signature(j, "signature");
  return s;
}

Json to_json(const TrustStore& t) {
  Json issuers = Json::object();
  for (const auto& [id, keys] : t.trusted_issuers) {
    Json arr = Json::array();
    for (const auto& k : keys) arr.push_back(to_hex(k.bytes));
    issuers[id] = arr;
  }
  return Json{{"trusted_issuers", issuers}};
}

TrustStore trust_from_json(const Json& j) {
  TrustStore t;
  const Json& issuers = j.at("trusted_issuers");
  for (const auto& [id, arr] : issuers.items()) {
    std::vector<PublicKey> keys;
    for (const auto& k : arr) {
      Bytes raw = from_hex(k.get<std::string>());
      if (raw.size() != 32) throw Error(Err::DecodeError, "bad trust key");
      PublicKey pk;
      std::copy(raw.begin(), raw.end(), pk.bytes.begin());
      keys.push_back(pk);
    }
    t.trusted_issuers[id] = std::move(keys);
  }
  return t;
}

Digest record_hash(const InitialCertificate& c) {
  return hash(canonical_bytes(c));
}

Digest record_hash(const UpdateRecord& u) { return hash(canonical_bytes(u)); }

InitialCertificate issue_certificate(CertificateDatagram fields,
                                     const KeyPair& issuer_keypair) {
  if (fields.creation_key.digest == kZeroDigest ||
      fields.update_key.digest == kZeroDigest ||
      fields.tethering_point.provider_id.empty()) {
    throw Error(Err::MissingField, "creation_key, update_key and tethering_point are mandatory");
  }
  if (fields.issued_at && fields.expires_at && *fields.expires_at <= *fields.issued_at) {
    throw Error(Err::InvalidLifetime, "expires_at must be after issued_at");
  }
  InitialCertificate cert;
  cert.datagram = std::move(fields);
  cert.issuer_public_key = issuer_keypair.public_key;
  cert.issuer_signature =
      sign(issuer_keypair.secret, canonical_bytes(cert.datagram));
  return cert;
}

TransactionSubmission make_submission(ByteView record_bytes,
                                      const KeyPair& one_time_keypair) {
  TransactionSubmission s;
  s.public_key = one_time_keypair.public_key;
  s.record_hash = hash(record_bytes);
  s.signature = sign(one_time_keypair.secret, s.record_hash.bytes);
  return s;
}

KeyRef head_update_key(const DiplomaBundle& bundle) {
  if (bundle.updates.empty()) return bundle.certificate.datagram.update_key;
  return bundle.updates.back().next_update_key;
}

UpdateRecord append_update(const DiplomaBundle& bundle, UpdateAction action,
                           std::string note, const KeyRef& next_update_key,
                           std::optional<ProviderId> new_provider,
                           const KeyPair& signer_keypair) {
  if (key_ref(signer_keypair.public_key) != head_update_key(bundle)) {
    throw Error(Err::NotAuthorizedKey, "signer is not the chain head's named update key");
  }
  UpdateRecord u;
  u.prev_record_hash = bundle.updates.empty()
                           ? record_hash(bundle.certificate)
                           : record_hash(bundle.updates.back());
  u.action = action;
  u.note = std::move(note);
  u.next_update_key = next_update_key;
  u.new_provider = std::move(new_provider);
  u.signer_public_key = signer_keypair.public_key;
  u.signature = sign(signer_keypair.secret,
                     to_bytes(canonical_dump(u.signing_preimage())));
  return u;
}

ChainCheck verify_chain(const DiplomaBundle& bundle, const TrustStore& trust) {
  ChainCheck check;
  const InitialCertificate& cert = bundle.certificate;
  check.issuer_sig_ok = verify(cert.issuer_public_key,
                               canonical_bytes(cert.datagram),
                               cert.issuer_signature);
  if (!check.issuer_sig_ok) {
    check.issues.push_back({0, "issuer signature invalid"});
  }
  check.issuer_trusted = false;
  if (cert.datagram.issuer_id) {
    auto it = trust.trusted_issuers.find(*cert.datagram.issuer_id);
    if (it != trust.trusted_issuers.end()) {
      for (const auto& k : it->second) {
        if (k == cert.issuer_public_key) check.issuer_trusted = true;
      }
    }
  }

  std::set<Digest> seen_signers;
  KeyRef expected_key = cert.datagram.update_key;
  Digest expected_prev = record_hash(cert);
  for (size_t i = 0; i < bundle.updates.size(); ++i) {
    const UpdateRecord& u = bundle.updates[i];
    size_t index = i + 1;
    KeyRef signer = key_ref(u.signer_public_key);
    if (signer != expected_key) {
      check.issues.push_back({index, "signer does not match predecessor's named key"});
    }
    if (u.prev_record_hash != expected_prev) {
      check.issues.push_back({index, "prev_record_hash mismatch"});
    }
    if (!verify(u.signer_public_key,
                to_bytes(canonical_dump(u.signing_preimage())), u.signature)) {
      check.issues.push_back({index, "update signature invalid"});
    }
    if (!is_valid_utf8(u.note)) {
      check.issues.push_back({index, "note is not valid UTF-8"});
    }
    if (!seen_signers.insert(signer.digest).second) {
      check.issues.push_back({index, "one-time key reused"});
    }
    expected_key = u.next_update_key;
    expected_prev = record_hash(u);
  }
  return check;
}

DiplomaStatus derive_status(const DiplomaBundle& bundle, int64_t now) {
  const auto& expires = bundle.certificate.datagram.expires_at;
  if (expires && now > *expires) return {StatusValue::Expired};
  StatusValue v = StatusValue::Active;
  for (const auto& u : bundle.updates) {
    if (u.action == UpdateAction::Revoke) v = StatusValue::Revoked;
    if (u.action == UpdateAction::Reinstate) v = StatusValue::Active;
  }
  return {v};
}

ProviderId record_provider(const DiplomaBundle& bundle, size_t record_index) {
  ProviderId current = bundle.certificate.datagram.tethering_point.provider_id;
  // updates[i] is record i+1; a switching update registers with its own
  // new_provider, so switches apply through record_index inclusive.
  for (size_t i = 0; i < record_index && i < bundle.updates.size(); ++i) {
    if (bundle.updates[i].new_provider) current = *bundle.updates[i].new_provider;
  }
  return current;
}

std::vector<ProviderId> provider_trail(const DiplomaBundle& bundle) {
  std::vector<ProviderId> trail;
  for (size_t i = 0; i <= bundle.updates.size(); ++i) {
    ProviderId p = record_provider(bundle, i);
    if (trail.empty() || trail.back() != p) trail.push_back(p);
  }
  return trail;
}

}  // namespace diploma
