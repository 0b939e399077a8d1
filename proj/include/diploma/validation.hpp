#pragma once

#include "diploma/provenance.hpp"

namespace diploma {

enum class NoticeSubject { IssuerKey, ProviderKey, Process };
const char* notice_subject_name(NoticeSubject s);
NoticeSubject notice_subject_from_name(std::string_view s);

struct CompromiseNotice {
  NoticeSubject subject = NoticeSubject::IssuerKey;
  std::optional<KeyRef> key;
  std::string party_id;  // issuer or provider identity
  int64_t effective_from = 0;
  std::string note;
  PublicKey announcer;
  Signature signature;

  bool operator==(const CompromiseNotice&) const = default;
  Json signing_preimage() const;
};

Json to_json(const CompromiseNotice& n);
CompromiseNotice notice_from_json(const Json& j);

CompromiseNotice make_notice(NoticeSubject subject, std::optional<KeyRef> key,
                             std::string party_id, int64_t effective_from,
                             std::string note, const KeyPair& announcer);

// Report that a node could not serve a proof of provenance.
// Informational; does not mark diplomas compromised.
struct AssociationNotice {
  std::string reporter;
  ProviderId provider_id;
  std::string detail;
  bool operator==(const AssociationNotice&) const = default;
};

Json to_json(const AssociationNotice& n);
AssociationNotice association_notice_from_json(const Json& j);

// Append-only, deduplicated by content hash.
class NoticeBoard {
 public:
  void publish(const CompromiseNotice& n);  // throws Rejected on bad signature
  void publish(const AssociationNotice& n);
  const std::vector<CompromiseNotice>& notices() const { return notices_; }
  const std::vector<AssociationNotice>& association_notices() const {
    return association_;
  }

 private:
  std::vector<CompromiseNotice> notices_;
  std::vector<AssociationNotice> association_;
};

Json to_json(const NoticeBoard& b);
NoticeBoard board_from_json(const Json& j);

struct CriterionResult {
  bool pass = false;
  std::string reason;  // empty on pass
};

struct ValidationReport {
  CriterionResult authenticity;
  CriterionResult integrity;
  CriterionResult uniqueness;
  bool fresh = false;
  DiplomaStatus status;
  bool compromised = false;
  int64_t checked_at = 0;

  bool fully_valid() const {
    return authenticity.pass && integrity.pass && uniqueness.pass && fresh &&
           !compromised;
  }
};

Json to_json(const ValidationReport& r);
std::string report_text(const ValidationReport& r);

ValidationReport validate(const DiplomaBundle& bundle,
                          const ProofOfProvenance& proof,
                          const TrustStore& trust,
                          const std::vector<CompromiseNotice>& notices,
                          const ValidatorSet& vs,
                          std::span<const LedgerBlock> ledger, int64_t now,
                          uint64_t freshness);

}  // namespace diploma
