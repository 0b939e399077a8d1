#include "diploma/sim.hpp"

#include <istream>
#include <sstream>
#include <thread>

namespace diploma {

Json to_json(const FeeCounters& f) {
  return Json{{"metadata_bytes_shared", f.metadata_bytes_shared},
              {"proofs_served", f.proofs_served},
              {"registrations", f.registrations}};
}

FailureKind failure_kind_from_name(std::string_view s) {
  if (s == "crash") return FailureKind::Crash;
  if (s == "withhold") return FailureKind::WithholdMetadata;
  if (s == "equivocate") return FailureKind::Equivocate;
  throw Error(Err::ConfigError, "unknown failure kind");
}

MetadataView SimNode::metadata_view() const {
  MetadataView view;
  view.stores[provider->id()] = &provider->store();
  for (const auto& [id, store] : imported) {
    if (id != provider->id()) view.stores[id] = &store;
  }
  return view;
}

NetworkSim::NetworkSim(uint32_t n_nodes, uint32_t threshold, uint64_t seed)
    : rng_(seed) {
  if (n_nodes < 1 || threshold < 1 || threshold > n_nodes) {
    throw Error(Err::ConfigError, "need 1 <= threshold <= n_nodes");
  }
  ValidatorSet vs;
  vs.threshold = threshold;
  for (uint32_t i = 0; i < n_nodes; ++i) {
    SimNode node;
    node.id = "n" + std::to_string(i);
    node.key = keygen(next_seed());
    node.provider = std::make_unique<IntegrityProvider>(node.id, node.key);
    vs.members.emplace_back(node.id, node.key.public_key);
    nodes_.push_back(std::move(node));
  }
  ledger_ = std::make_unique<Ledger>(std::move(vs));
  std::vector<SignerId> signers;
  for (const auto& n : nodes_) signers.push_back({n.id, n.key});
  ledger_->produce_block(signers);  // genesis block
}

SimNode& NetworkSim::node(const std::string& id) {
  for (auto& n : nodes_) {
    if (n.id == id) return n;
  }
  throw Error(Err::ConfigError, "unknown node " + id);
}

std::array<uint8_t, 32> NetworkSim::next_seed() {
  std::array<uint8_t, 32> seed{};
  for (size_t i = 0; i < 4; ++i) {
    uint64_t w = rng_();
    for (size_t b = 0; b < 8; ++b) seed[i * 8 + b] = static_cast<uint8_t>(w >> (8 * b));
  }
  return seed;
}

void NetworkSim::sync_round() {
  struct Delivery {
    SimNode* receiver;
    ProviderId origin;
    PublicKey origin_key;
    MetadataBatch batch;
  };
  std::vector<Delivery> deliveries;
  for (auto& origin : nodes_) {
    if (!origin.alive || origin.withhold) continue;
    uint64_t total = origin.provider->store().size();
    if (origin.exported_through >= total) continue;
    MetadataBatch batch = export_metadata(origin.id, origin.provider->store(),
                                          origin.exported_through, total - 1);
    uint64_t batch_bytes = canonical_dump(to_json(batch)).size();
    for (auto& receiver : nodes_) {
      if (&receiver == &origin || !receiver.alive) continue;
      deliveries.push_back({&receiver, origin.id, origin.key.public_key, batch});
      origin.fees.metadata_bytes_shared += batch_bytes;
    }
    origin.exported_through = total;
  }
  auto deliver_for = [&](SimNode* receiver) {
    for (auto& d : deliveries) {
      if (d.receiver != receiver) continue;
      import_metadata(receiver->imported[d.origin], d.batch, d.origin_key);
    }
  };
  if (concurrent) {
    std::vector<std::thread> workers;
    for (auto& n : nodes_) workers.emplace_back(deliver_for, &n);
    for (auto& w : workers) w.join();
  } else {
    for (auto& n : nodes_) deliver_for(&n);
  }
  ++round_;
}

void NetworkSim::inject_failure(const FailureMode& f) {
  SimNode& n = node(f.target);
  switch (f.kind) {
    case FailureKind::Crash: n.alive = false; break;
    case FailureKind::WithholdMetadata: n.withhold = true; break;
    case FailureKind::Equivocate: n.equivocate_next = true; break;
  }
}

void NetworkSim::commit(SimNode& n) {
  if (!n.alive) throw Error(Err::Transport, "node is down");
  uint64_t latest = n.provider->store().size() - 1;
  Commitment c = make_commitment(*n.provider, latest);
  ledger_->submit_commitment(c);
  if (n.equivocate_next) {
    Commitment forged = c;
    forged.chain_hash.bytes[0] ^= 0xff;
    forged.provider_signature = n.provider->sign_as_provider(
        commitment_signing_preimage(forged.provider_id, forged.epoch_index,
                                    forged.chain_hash));
    ledger_->submit_commitment(forged);
    n.equivocate_next = false;
  }
}

const LedgerBlock& NetworkSim::produce_block() {
  std::vector<SignerId> signers;
  for (const auto& n : nodes_) {
    if (n.alive) signers.push_back({n.id, n.key});
  }
  return ledger_->produce_block(signers);
}

ProofOfProvenance NetworkSim::serve_proof(SimNode& server,
                                          const ProvenanceRequest& req) {
  if (!server.alive) throw Error(Err::Transport, "node is down");
  try {
    ProofOfProvenance proof =
        build_proof(req, server.metadata_view(), ledger_->blocks());
    ++server.fees.proofs_served;
    return proof;
  } catch (const Error& e) {
    if (e.code() == Err::InsufficientMetadata) {
      board_.publish(AssociationNotice{server.id,
                                       req.tethering_point.provider_id,
                                       "unable to provide proof of provenance"});
    }
    throw;
  }
}

std::string NetworkSim::serialize_state() const {
  Json nodes = Json::array();
  for (const auto& n : nodes_) {
    Json imported = Json::object();
    for (const auto& [id, store] : n.imported) {
      Json epochs = Json::array();
      for (const auto& e : store.epochs()) epochs.push_back(to_json(e));
      imported[id] = epochs;
    }
    Json own = Json::array();
    for (const auto& e : n.provider->store().epochs()) own.push_back(to_json(e));
    nodes.push_back(Json{{"alive", n.alive},
                         {"epochs", own},
                         {"fees", to_json(n.fees)},
                         {"id", n.id},
                         {"imported", imported},
                         {"withhold", n.withhold}});
  }
  Json j{{"board", to_json(board_)},
         {"ledger", ledger_snapshot_json(ledger_->blocks())},
         {"nodes", nodes},
         {"round", round_}};
  return canonical_dump(j);
}

// --- scenario runner --------------------------------------------------------

namespace {

struct DiplomaState {
  DiplomaBundle bundle;
  std::map<Digest, KeyPair> keys;  // ref -> pair, includes the pending head key
  std::optional<ProofOfProvenance> proof;
  std::optional<ValidationReport> report;
  std::string last_error;
};

struct ScenarioContext {
  NetworkSim sim;
  std::map<std::string, KeyPair> issuers;
  TrustStore trust;
  std::map<std::string, DiplomaState> diplomas;
  ScenarioContext(uint32_t n, uint32_t t, uint64_t seed, bool concurrent)
      : sim(n, t, seed) {
    sim.concurrent = concurrent;
  }
};

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') break;
    tokens.push_back(tok);
  }
  return tokens;
}

// key=value option lookup among tokens[from..]
std::optional<std::string> option(const std::vector<std::string>& tokens,
                                  size_t from, const std::string& key) {
  for (size_t i = from; i < tokens.size(); ++i) {
    if (tokens[i].rfind(key + "=", 0) == 0) {
      return tokens[i].substr(key.size() + 1);
    }
  }
  return std::nullopt;
}

uint64_t parse_u64(const std::string& s, size_t line_no) {
  try {
    return std::stoull(s);
  } catch (...) {
    throw Error(Err::ScriptError,
                "line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
}

KeyPair& issuer_key(ScenarioContext& ctx, const std::string& id) {
  auto it = ctx.issuers.find(id);
  if (it == ctx.issuers.end()) {
    KeyPair kp = keygen(ctx.sim.next_seed());
    it = ctx.issuers.emplace(id, kp).first;
    ctx.trust.trusted_issuers[id].push_back(kp.public_key);
  }
  return it->second;
}

DiplomaState& diploma_state(ScenarioContext& ctx, const std::string& name,
                            size_t line_no) {
  auto it = ctx.diplomas.find(name);
  if (it == ctx.diplomas.end()) {
    throw Error(Err::ScriptError,
                "line " + std::to_string(line_no) + ": unknown diploma " + name);
  }
  return it->second;
}

void do_issue(ScenarioContext& ctx, const std::vector<std::string>& t,
              size_t line_no) {
  if (t.size() < 2) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": issue needs a name");
  const std::string& name = t[1];
  auto issuer_id = option(t, 2, "issuer");
  auto provider = option(t, 2, "provider");
  if (!issuer_id || !provider) {
    throw Error(Err::ScriptError,
                "line " + std::to_string(line_no) + ": issue needs issuer= and provider=");
  }
  DiplomaState d;
  KeyPair creation = keygen(ctx.sim.next_seed());
  KeyPair update = keygen(ctx.sim.next_seed());
  d.keys[key_ref(creation.public_key).digest] = creation;
  d.keys[key_ref(update.public_key).digest] = update;
  try {
    SimNode& node = ctx.sim.node(*provider);
    if (!node.alive) throw Error(Err::Transport, "node is down");
    CertificateDatagram dg;
    dg.issuer_id = *issuer_id;
    dg.holder_id = option(t, 2, "holder");
    dg.qualification = option(t, 2, "qualification");
    if (auto v = option(t, 2, "issued")) dg.issued_at = static_cast<int64_t>(parse_u64(*v, line_no));
    if (auto v = option(t, 2, "expires")) dg.expires_at = static_cast<int64_t>(parse_u64(*v, line_no));
    dg.creation_key = key_ref(creation.public_key);
    dg.update_key = key_ref(update.public_key);
    dg.tethering_point = node.provider->tethering_point();
    InitialCertificate cert = issue_certificate(dg, issuer_key(ctx, *issuer_id));
    node.provider->register_submission(
        make_submission(canonical_bytes(cert), creation));
    ++node.fees.registrations;
    d.bundle.certificate = cert;
  } catch (const Error& e) {
    d.last_error = e.what();
  }
  ctx.diplomas[name] = std::move(d);
}

void do_update(ScenarioContext& ctx, const std::vector<std::string>& t,
               UpdateAction action, size_t line_no) {
  if (t.size() < 2) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": update needs a name");
  DiplomaState& d = diploma_state(ctx, t[1], line_no);
  auto new_provider = option(t, 2, "provider");
  std::string note = option(t, 2, "note").value_or(std::string(action_name(action)));
  try {
    KeyRef head = head_update_key(d.bundle);
    auto it = d.keys.find(head.digest);
    if (it == d.keys.end()) throw Error(Err::NotFound, "head key not held");
    KeyPair signer = it->second;
    KeyPair next = keygen(ctx.sim.next_seed());
    d.keys[key_ref(next.public_key).digest] = next;
    UpdateRecord u = append_update(d.bundle, action, note,
                                   key_ref(next.public_key),
                                   new_provider ? std::optional<ProviderId>(*new_provider)
                                                : std::nullopt,
                                   signer);
    ProviderId target = new_provider
                            ? *new_provider
                            : record_provider(d.bundle, d.bundle.updates.size());
    SimNode& node = ctx.sim.node(target);
    if (!node.alive) throw Error(Err::Transport, "node is down");
    node.provider->register_submission(make_submission(canonical_bytes(u), signer));
    ++node.fees.registrations;
    d.bundle.updates.push_back(u);
    d.last_error.clear();
  } catch (const Error& e) {
    d.last_error = e.what();
  }
}

void do_prove(ScenarioContext& ctx, const std::vector<std::string>& t,
              size_t line_no) {
  if (t.size() < 2) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": prove needs a name");
  DiplomaState& d = diploma_state(ctx, t[1], line_no);
  auto via = option(t, 2, "via");
  uint64_t freshness = parse_u64(option(t, 2, "freshness").value_or("8"), line_no);
  if (!via) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": prove needs via=");
  d.proof.reset();
  d.last_error.clear();
  try {
    SimNode& server = ctx.sim.node(*via);
    d.proof = ctx.sim.serve_proof(server, make_request(d.bundle, freshness));
  } catch (const Error& e) {
    d.last_error = e.what();
  }
}

void do_validate(ScenarioContext& ctx, const std::vector<std::string>& t,
                 size_t line_no) {
  if (t.size() < 2) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": validate needs a name");
  DiplomaState& d = diploma_state(ctx, t[1], line_no);
  uint64_t freshness = parse_u64(option(t, 2, "freshness").value_or("8"), line_no);
  int64_t now = static_cast<int64_t>(
      parse_u64(option(t, 2, "now").value_or("1000000"), line_no));
  if (!d.proof) {
    ValidationReport r;
    r.checked_at = now;
    r.integrity = {false, "no proof of provenance available: " + d.last_error};
    r.uniqueness = {false, "no proof of provenance available"};
    ChainCheck chain = verify_chain(d.bundle, ctx.trust);
    r.authenticity.pass = chain.issuer_sig_ok && chain.issuer_trusted;
    r.status = derive_status(d.bundle, now);
    d.report = r;
    return;
  }
  d.report = validate(d.bundle, *d.proof, ctx.trust, ctx.sim.board().notices(),
                      ctx.sim.ledger().validator_set(), ctx.sim.ledger().blocks(),
                      now, freshness);
}

void do_notice(ScenarioContext& ctx, const std::vector<std::string>& t,
               size_t line_no) {
  auto issuer_id = option(t, 1, "issuer");
  if (!issuer_id) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": notice needs issuer=");
  int64_t effective = static_cast<int64_t>(
      parse_u64(option(t, 1, "effective").value_or("0"), line_no));
  KeyPair& kp = issuer_key(ctx, *issuer_id);
  ctx.sim.board().publish(make_notice(NoticeSubject::IssuerKey,
                                      key_ref(kp.public_key), *issuer_id,
                                      effective, "key compromised", kp));
}

bool eval_assert(ScenarioContext& ctx, const std::vector<std::string>& t,
                 size_t line_no, std::string& detail) {
  if (t.size() >= 2 && t[1] == "fees") {
    if (t.size() < 3) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": assert fees needs a node");
    const FeeCounters& f = ctx.sim.node(t[2]).fees;
    bool ok = true;
    if (auto v = option(t, 3, "registrations")) ok &= f.registrations == parse_u64(*v, line_no);
    if (auto v = option(t, 3, "proofs")) ok &= f.proofs_served == parse_u64(*v, line_no);
    detail = "registrations=" + std::to_string(f.registrations) +
             " proofs=" + std::to_string(f.proofs_served);
    return ok;
  }
  if (t.size() < 3) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": assert needs a diploma and predicate");
  DiplomaState& d = diploma_state(ctx, t[1], line_no);
  const std::string& pred = t[2];
  auto report_detail = [&]() {
    return d.report ? canonical_dump(to_json(*d.report)) : "no report";
  };
  if (pred == "valid") {
    detail = report_detail();
    return d.report && d.report->fully_valid();
  }
  if (pred == "invalid") {
    detail = report_detail();
    return !d.report || !d.report->fully_valid();
  }
  if (pred == "revoked" || pred == "expired" || pred == "active") {
    detail = report_detail();
    return d.report && status_name(d.report->status.value) == pred;
  }
  if (pred == "compromised") {
    detail = report_detail();
    return d.report && d.report->compromised;
  }
  if (pred == "not_compromised") {
    detail = report_detail();
    return d.report && !d.report->compromised;
  }
  if (pred == "stale") {
    detail = report_detail();
    return d.report && !d.report->fresh;
  }
  if (pred == "authenticity_fail") {
    detail = report_detail();
    return d.report && !d.report->authenticity.pass;
  }
  if (pred == "integrity_fail") {
    detail = report_detail();
    return d.report && !d.report->integrity.pass;
  }
  if (pred == "uniqueness_fail") {
    detail = report_detail();
    return d.report && !d.report->uniqueness.pass;
  }
  if (pred.rfind("prove_error=", 0) == 0) {
    detail = d.last_error.empty() ? "no error" : d.last_error;
    return d.last_error.find(pred.substr(12)) != std::string::npos;
  }
  throw Error(Err::ScriptError,
              "line " + std::to_string(line_no) + ": unknown predicate " + pred);
}

}  // namespace

bool ScenarioReport::all_passed() const {
  for (const auto& a : assertions) {
    if (!a.passed) return false;
  }
  return true;
}

Json to_json(const ScenarioReport& r) {
  Json assertions = Json::array();
  for (const auto& a : r.assertions) {
    assertions.push_back(Json{{"detail", a.detail},
                              {"line", a.line},
                              {"passed", a.passed},
                              {"text", a.text}});
  }
  Json fees = Json::object();
  for (const auto& [id, f] : r.fees) fees[id] = to_json(f);
  return Json{{"assertions", assertions},
              {"fees", fees},
              {"state_digest", r.state_digest}};
}

std::string scenario_report_text(const ScenarioReport& r) {
  std::ostringstream out;
  for (const auto& a : r.assertions) {
    out << (a.passed ? "PASS" : "FAIL") << " line " << a.line << ": " << a.text;
    if (!a.passed) out << "  [" << a.detail << "]";
    out << "\n";
  }
  for (const auto& [id, f] : r.fees) {
    out << id << ": registrations=" << f.registrations
        << " proofs_served=" << f.proofs_served
        << " metadata_bytes_shared=" << f.metadata_bytes_shared << "\n";
  }
  out << "state: " << r.state_digest << "\n";
  out << (r.all_passed() ? "ALL ASSERTIONS PASSED" : "ASSERTION FAILURES") << "\n";
  return out.str();
}

ScenarioReport run_scenario(std::istream& script, uint32_t n_nodes,
                            uint32_t threshold, uint64_t seed, bool concurrent) {
  ScenarioContext ctx(n_nodes, threshold, seed, concurrent);
  ScenarioReport report;
  std::string line;
  size_t line_no = 0;
  while (std::getline(script, line)) {
    ++line_no;
    std::vector<std::string> t = tokenize(line);
    if (t.empty()) continue;
    const std::string& cmd = t[0];
    if (cmd == "issue") {
      do_issue(ctx, t, line_no);
    } else if (cmd == "update") {
      do_update(ctx, t, UpdateAction::Routine, line_no);
    } else if (cmd == "revoke") {
      do_update(ctx, t, UpdateAction::Revoke, line_no);
    } else if (cmd == "reinstate") {
      do_update(ctx, t, UpdateAction::Reinstate, line_no);
    } else if (cmd == "seal") {
      if (t.size() < 2) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": seal needs a node");
      SimNode& n = ctx.sim.node(t[1]);
      if (n.alive) n.provider->seal_epoch();
    } else if (cmd == "commit") {
      if (t.size() < 2) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": commit needs a node");
      SimNode& n = ctx.sim.node(t[1]);
      if (n.alive) ctx.sim.commit(n);
    } else if (cmd == "block") {
      ctx.sim.produce_block();
    } else if (cmd == "sync") {
      ctx.sim.sync_round();
    } else if (cmd == "fail") {
      if (t.size() < 3) throw Error(Err::ScriptError, "line " + std::to_string(line_no) + ": fail needs kind and node");
      ctx.sim.inject_failure(
          {failure_kind_from_name(t[1]), t[2], ctx.sim.round()});
    } else if (cmd == "prove") {
      do_prove(ctx, t, line_no);
    } else if (cmd == "validate") {
      do_validate(ctx, t, line_no);
    } else if (cmd == "notice") {
      do_notice(ctx, t, line_no);
    } else if (cmd == "assert") {
      AssertionResult result;
      result.line = line_no;
      result.text = line;
      result.passed = eval_assert(ctx, t, line_no, result.detail);
      report.assertions.push_back(std::move(result));
    } else {
      throw Error(Err::ScriptError,
                  "line " + std::to_string(line_no) + ": unknown command " + cmd);
    }
  }
  for (const auto& n : ctx.sim.nodes()) report.fees[n.id] = n.fees;
  report.state_digest =
      digest_hex(hash(to_bytes(ctx.sim.serialize_state())));
  return report;
}

}  // namespace diploma
