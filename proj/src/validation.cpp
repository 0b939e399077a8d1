#include "diploma/validation.hpp"

#include <set>
#include <sstream>

namespace diploma {

const char* notice_subject_name(NoticeSubject s) {
  switch (s) {
    case NoticeSubject::IssuerKey: return "issuer_key";
    case NoticeSubject::ProviderKey: return "provider_key";
    case NoticeSubject::Process: return "process";
  }
  return "process";
}

NoticeSubject notice_subject_from_name(std::string_view s) {
  if (s == "issuer_key") return NoticeSubject::IssuerKey;
  if (s == "provider_key") return NoticeSubject::ProviderKey;
  if (s == "process") return NoticeSubject::Process;
  throw Error(Err::DecodeError, "unknown notice subject");
}

Json CompromiseNotice::signing_preimage() const {
  Json j{{"announcer", to_hex(announcer.bytes)},
         {"effective_from", effective_from},
         {"note", note},
         {"party_id", party_id},
         {"subject", notice_subject_name(subject)}};
  if (key) j["key_ref"] = digest_hex(key->digest);
  return j;
}

Json to_json(const CompromiseNotice& n) {
  Json j = n.signing_preimage();
  j["signature"] = to_hex(n.signature.bytes);
  return j;
}

CompromiseNotice notice_from_json(const Json& j) {
  CompromiseNotice n;
  n.subject = notice_subject_from_name(get_string(j, "subject"));
  if (j.contains("key_ref")) n.key = KeyRef{get_digest(j, "key_ref")};
  n.party_id = get_string(j, "party_id");
  n.effective_from = get_i64(j, "effective_from");
  n.note = get_string(j, "note");
  n.announcer = get_public_key(j, "announcer");
  n.signature = get_signature(j, "signature");
  return n;
}

CompromiseNotice make_notice(NoticeSubject subject, std::optional<KeyRef> key,
                             std::string party_id, int64_t effective_from,
                             std::string note, const KeyPair& announcer) {
  CompromiseNotice n;
  n.subject = subject;
  n.key = key;
  n.party_id = std::move(party_id);
  n.effective_from = effective_from;
  n.note = std::move(note);
  n.announcer = announcer.public_key;
  n.signature = sign(announcer.secret,
                     to_bytes(canonical_dump(n.signing_preimage())));
  return n;
}

Json to_json(const AssociationNotice& n) {
  return Json{{"detail", n.detail},
              {"provider_id", n.provider_id},
              {"reporter", n.reporter}};
}

AssociationNotice association_notice_from_json(const Json& j) {
  return {get_string(j, "reporter"), get_string(j, "provider_id"),
          get_string(j, "detail")};
}

void NoticeBoard::publish(const CompromiseNotice& n) {
  if (!verify(n.announcer, to_bytes(canonical_dump(n.signing_preimage())),
              n.signature)) {
    throw Error(Err::Rejected, "notice signature invalid");
  }
  for (const auto& existing : notices_) {
    if (existing == n) return;  // idempotent by content
  }
  notices_.push_back(n);
}

void NoticeBoard::publish(const AssociationNotice& n) {
  for (const auto& existing : association_) {
    if (existing == n) return;
  }
  association_.push_back(n);
}

Json to_json(const NoticeBoard& b) {
  Json compromise = Json::array();
  for (const auto& n : b.notices()) compromise.push_back(to_json(n));
  Json association = Json::array();
  for (const auto& n : b.association_notices()) association.push_back(to_json(n));
  return Json{{"association", association}, {"compromise", compromise}};
}

NoticeBoard board_from_json(const Json& j) {
  NoticeBoard b;
  for (const auto& n : j.at("compromise")) b.publish(notice_from_json(n));
  for (const auto& n : j.at("association")) {
    b.publish(association_notice_from_json(n));
  }
  return b;
}

Json to_json(const ValidationReport& r) {
  auto crit = [](const CriterionResult& c) {
    Json j{{"pass", c.pass}};
    if (!c.reason.empty()) j["reason"] = c.reason;
    return j;
  };
  return Json{{"authenticity", crit(r.authenticity)},
              {"checked_at", r.checked_at},
              {"compromised", r.compromised},
              {"fresh", r.fresh},
              {"integrity", crit(r.integrity)},
              {"status", status_name(r.status.value)},
              {"uniqueness", crit(r.uniqueness)}};
}

std::string report_text(const ValidationReport& r) {
  std::ostringstream out;
  auto line = [&](const char* name, const CriterionResult& c) {
    out << name << ": " << (c.pass ? "pass" : "FAIL");
    if (!c.reason.empty()) out << " (" << c.reason << ")";
    out << "\n";
  };
  line("authenticity", r.authenticity);
  line("integrity", r.integrity);
  line("uniqueness", r.uniqueness);
  out << "fresh: " << (r.fresh ? "yes" : "NO") << "\n";
  out << "status: " << status_name(r.status.value) << "\n";
  out << "compromised: " << (r.compromised ? "YES" : "no") << "\n";
  out << "verdict: " << (r.fully_valid() ? "VALID" : "NOT VALID") << "\n";
  return out.str();
}

ValidationReport validate(const DiplomaBundle& bundle,
                          const ProofOfProvenance& proof,
                          const TrustStore& trust,
                          const std::vector<CompromiseNotice>& notices,
                          const ValidatorSet& vs,
                          std::span<const LedgerBlock> ledger, int64_t now,
                          uint64_t freshness) {
  ValidationReport report;
  report.checked_at = now;

  ChainCheck chain = verify_chain(bundle, trust);
  report.authenticity.pass = chain.issuer_sig_ok && chain.issuer_trusted;
  if (!chain.issuer_sig_ok) {
    report.authenticity.reason = "issuer signature invalid";
  } else if (!chain.issuer_trusted) {
    report.authenticity.reason = "issuer not in trust store";
  }

  if (!chain.issues.empty()) {
    // Chain-link failures are an integrity problem even before the proof is
    // consulted (a bundle missing records shows up here or in the proof).
    report.integrity.pass = false;
    std::ostringstream reasons;
    for (size_t i = 0; i < chain.issues.size(); ++i) {
      if (i) reasons << "; ";
      reasons << "record " << chain.issues[i].record_index << ": "
              << chain.issues[i].reason;
    }
    report.integrity.reason = reasons.str();
    report.uniqueness.pass = false;
    report.uniqueness.reason = "chain invalid, proof not evaluated";
    report.fresh = false;
  } else {
    ProofVerdict verdict = verify_proof(proof, bundle, vs, ledger, freshness);
    report.integrity.pass = verdict.integrity_ok;
    report.uniqueness.pass = verdict.uniqueness_ok;
    report.fresh = verdict.fresh;
    std::ostringstream ireasons, ureasons;
    for (const auto& r : verdict.failure_reasons) {
      if (r.rfind("integrity:", 0) == 0) {
        if (ireasons.tellp() > 0) ireasons << "; ";
        ireasons << r.substr(10);
      } else if (r.rfind("uniqueness:", 0) == 0) {
        if (ureasons.tellp() > 0) ureasons << "; ";
        ureasons << r.substr(11);
      }
    }
    report.integrity.reason = ireasons.str();
    report.uniqueness.reason = ureasons.str();
  }

  report.status = derive_status(bundle, now);

  // Compromise notices. Issuer-key notices are retroactive from
  // effective_from against the registration moment the bundle records;
  // provider/process notices apply from effective_from onward.
  KeyRef issuer_ref = key_ref(bundle.certificate.issuer_public_key);
  std::vector<ProviderId> trail = provider_trail(bundle);
  const auto& issuer_id = bundle.certificate.datagram.issuer_id;
  for (const CompromiseNotice& n : notices) {
    switch (n.subject) {
      case NoticeSubject::IssuerKey: {
        int64_t registered_at =
            bundle.certificate.datagram.issued_at.value_or(n.effective_from);
        if (n.key && *n.key == issuer_ref && registered_at >= n.effective_from) {
          report.compromised = true;
        }
        break;
      }
      case NoticeSubject::ProviderKey:
      case NoticeSubject::Process: {
        bool applies = (issuer_id && n.party_id == *issuer_id);
        for (const auto& p : trail) {
          if (p == n.party_id) applies = true;
        }
        if (applies && n.effective_from <= now) report.compromised = true;
        break;
      }
    }
  }
  return report;
}

}  // namespace diploma
