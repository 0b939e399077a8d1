#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diploma/crypto.hpp"
#include "diploma/encoding.hpp"

namespace diploma {

using ProviderId = std::string;

// Reference to a sealed comprehension (epoch) of the chosen integrity
// provider, embedded in every certificate datagram.
struct TetheringPoint {
  ProviderId provider_id;
  uint64_t epoch_index = 0;
  Digest chain_hash;
  auto operator<=>(const TetheringPoint&) const = default;
};

Json to_json(const TetheringPoint& t);
TetheringPoint tethering_from_json(const Json& j);

struct CertificateDatagram {
  std::optional<int64_t> issued_at;  // UTC seconds
  std::optional<std::string> holder_id;
  std::optional<std::string> issuer_id;
  std::optional<Bytes> issuer_cert_chain;  // opaque, not validated
  std::optional<std::string> awarder_id;
  std::optional<Bytes> awarder_cert_chain;
  std::optional<std::string> qualification;
  std::optional<std::string> controller_id;
  std::optional<int64_t> expires_at;
  KeyRef creation_key;   // mandatory
  KeyRef update_key;     // mandatory
  TetheringPoint tethering_point;  // mandatory

  bool operator==(const CertificateDatagram&) const = default;
};

Json to_json(const CertificateDatagram& d);
CertificateDatagram datagram_from_json(const Json& j);

struct InitialCertificate {
  CertificateDatagram datagram;
  PublicKey issuer_public_key;
  Signature issuer_signature;  // over canonical_encode(datagram)

  bool operator==(const InitialCertificate&) const = default;
};

Json to_json(const InitialCertificate& c);
InitialCertificate certificate_from_json(const Json& j);

enum class UpdateAction { Routine, Revoke, Reinstate };

const char* action_name(UpdateAction a);
UpdateAction action_from_name(std::string_view name);

struct UpdateRecord {
  Digest prev_record_hash;  // hash of the predecessor's canonical encoding
  UpdateAction action = UpdateAction::Routine;
  std::string note;
  KeyRef next_update_key;
  std::optional<ProviderId> new_provider;
  PublicKey signer_public_key;  // the key the predecessor named
  Signature signature;          // over the canonical encoding of the fields above

  bool operator==(const UpdateRecord&) const = default;

  Json signing_preimage() const;  // all fields except the signature
};

Json to_json(const UpdateRecord& u);
UpdateRecord update_from_json(const Json& j);

struct DiplomaBundle {
  InitialCertificate certificate;
  std::vector<UpdateRecord> updates;

  bool operator==(const DiplomaBundle&) const = default;
};

Json to_json(const DiplomaBundle& b);
DiplomaBundle bundle_from_json(const Json& j);

enum class StatusValue { Active, Revoked, Expired };
const char* status_name(StatusValue s);

struct DiplomaStatus {
  StatusValue value = StatusValue::Active;
};

// What the issuer sends to the integrity provider: hash, one-time public key,
// and a signature over the record hash (the provider never sees the preimage).
struct TransactionSubmission {
  PublicKey public_key;
  Digest record_hash;
  Signature signature;
};

Json to_json(const TransactionSubmission& s);
TransactionSubmission submission_from_json(const Json& j);

struct TrustStore {
  std::map<std::string, std::vector<PublicKey>> trusted_issuers;
};

Json to_json(const TrustStore& t);
TrustStore trust_from_json(const Json& j);

struct LinkIssue {
  size_t record_index;  // 0 = certificate, 1.. = updates
  std::string reason;
};

struct ChainCheck {
  bool issuer_sig_ok = false;
  bool issuer_trusted = false;
  std::vector<LinkIssue> issues;
  bool chain_ok() const { return issuer_sig_ok && issues.empty(); }
  bool ok() const { return chain_ok() && issuer_trusted; }
};

// --- operations ------------------------------------------------------------

Digest record_hash(const InitialCertificate& c);
Digest record_hash(const UpdateRecord& u);

InitialCertificate issue_certificate(CertificateDatagram fields,
                                     const KeyPair& issuer_keypair);

TransactionSubmission make_submission(ByteView record_bytes,
                                      const KeyPair& one_time_keypair);

UpdateRecord append_update(const DiplomaBundle& bundle, UpdateAction action,
                           std::string note, const KeyRef& next_update_key,
                           std::optional<ProviderId> new_provider,
                           const KeyPair& signer_keypair);

ChainCheck verify_chain(const DiplomaBundle& bundle, const TrustStore& trust);

DiplomaStatus derive_status(const DiplomaBundle& bundle, int64_t now);

// The update key currently in force: the head update's next_update_key, or
// the certificate's update_key when there are no updates.
KeyRef head_update_key(const DiplomaBundle& bundle);

// Providers in the order the bundle's records visit them (consecutive
// duplicates collapsed).
std::vector<ProviderId> provider_trail(const DiplomaBundle& bundle);

// Provider that record i (0 = certificate) was registered with. A switching
// update registers with its own new_provider.
ProviderId record_provider(const DiplomaBundle& bundle, size_t record_index);

}  // namespace diploma
