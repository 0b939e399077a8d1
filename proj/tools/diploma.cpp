// diploma: command-line surface for issuers, holders, relying parties, node
// operators, and the simulation driver.
//
// Exit codes:
//   0  success; for `verify`, fully valid and Active
//   1  validation failed (one or more criteria did not pass)
//   2  usage error
//   3  file I/O error
//   4  malformed input (decode/encoding, missing fields, bad lifetimes)
//   5  transport error talking to a node
//   6  cryptographic or authorization failure
//   7  configuration or script error
//   10 fully valid but status Revoked
//   11 fully valid but status Expired

#include <CLI11.hpp>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "diploma/service.hpp"
#include "diploma/sim.hpp"

using namespace diploma;

namespace {

int exit_code_for(Err e) {
  switch (e) {
    case Err::IoError:
      return 3;
    case Err::EncodingError:
    case Err::DecodeError:
    case Err::MissingField:
    case Err::InvalidLifetime:
      return 4;
    case Err::Transport:
      return 5;
    case Err::ConfigError:
    case Err::ScriptError:
      return 7;
    default:
      return 6;  // crypto, authorization, availability
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Err::IoError, "cannot write " + path);
  out << content;
  if (!out) throw Error(Err::IoError, "write failed for " + path);
}

Json load_json(const std::string& path) { return parse_json(read_file(path)); }

std::array<uint8_t, 32> random_seed() {
  std::array<uint8_t, 32> seed;
  std::random_device rd;
  for (size_t i = 0; i < seed.size(); i += 4) {
    uint32_t w = rd();
    for (size_t b = 0; b < 4 && i + b < seed.size(); ++b) {
      seed[i + b] = static_cast<uint8_t>(w >> (8 * b));
    }
  }
  return seed;
}

std::array<uint8_t, 32> parse_seed(const std::string& hex) {
  Bytes raw = from_hex(hex);
  if (raw.size() != 32) throw Error(Err::InvalidSeed, "seed must be 32 bytes of hex");
  std::array<uint8_t, 32> seed;
  std::copy(raw.begin(), raw.end(), seed.begin());
  return seed;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

DiplomaBundle load_bundle(const std::string& path) {
  return bundle_from_json(load_json(path));
}

void save_bundle(const std::string& path, const DiplomaBundle& b) {
  write_file(path, canonical_dump(to_json(b)));
}

// Mint fresh creation/update keys, fetch the tethering point, sign the
// certificate, and register it; shared by `issue` and `reissue`.
DiplomaBundle issue_flow(Json datagram_fields, const std::string& issuer_ref_hex,
                         const std::string& keystore_path,
                         const std::string& node_addr) {
  Keystore ks = Keystore::load(keystore_path);
  KeyPair issuer = ks.get(KeyRef{digest_from_hex(issuer_ref_hex)});
  KeyRef creation_ref = ks.add_seed(random_seed());
  KeyRef update_ref = ks.add_seed(random_seed());
  ks.save(keystore_path);

  datagram_fields["creation_key"] = digest_hex(creation_ref.digest);
  datagram_fields["update_key"] = digest_hex(update_ref.digest);
  datagram_fields["tethering_point"] = node_get(node_addr, "/tether");
  CertificateDatagram dg = datagram_from_json(datagram_fields);

  DiplomaBundle bundle{issue_certificate(dg, issuer), {}};
  TransactionSubmission sub = make_submission(
      canonical_bytes(bundle.certificate), ks.get(creation_ref));
  node_post(node_addr, "/register", to_json(sub));
  return bundle;
}

int update_flow(UpdateAction action, const std::string& bundle_path,
                const std::string& keystore_path, const std::string& node_addr,
                const std::string& new_provider, const std::string& note,
                const std::string& out_path) {
  DiplomaBundle bundle = load_bundle(bundle_path);
  Keystore ks = Keystore::load(keystore_path);
  KeyPair signer = ks.get(head_update_key(bundle));
  KeyRef next_ref = ks.add_seed(random_seed());
  ks.save(keystore_path);

  std::optional<ProviderId> switch_to;
  if (!new_provider.empty()) switch_to = new_provider;
  UpdateRecord u = append_update(bundle, action, note, next_ref, switch_to, signer);
  node_post(node_addr, "/register",
            to_json(make_submission(canonical_bytes(u), signer)));
  bundle.updates.push_back(u);
  save_bundle(out_path.empty() ? bundle_path : out_path, bundle);
  std::cout << "update registered; head key " << digest_hex(next_ref.digest)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline diploma credentials with integrity-provider anchoring"};
  app.require_subcommand(1);
  const std::string default_keystore = env_or("DIPLOMA_KEYSTORE", "keystore.json");
  const std::string default_node = env_or("DIPLOMA_NODE", "127.0.0.1:8420");

  // --- keygen ---------------------------------------------------------------
  auto* keygen_cmd = app.add_subcommand("keygen", "Derive a key from a seed and store it");
  std::string kg_seed, kg_out = default_keystore;
  keygen_cmd->add_option("--seed", kg_seed, "32-byte seed as hex (omit for random)");
  keygen_cmd->add_option("--out", kg_out, "keystore file");

  // --- issue ----------------------------------------------------------------
  auto* issue_cmd = app.add_subcommand("issue", "Issue a certificate and register it");
  std::string is_issuer_ref, is_fields, is_node = default_node,
              is_keystore = default_keystore, is_out;
  issue_cmd->add_option("--issuer-key", is_issuer_ref, "issuer key ref (hex)")->required();
  issue_cmd->add_option("--fields", is_fields, "datagram fields file")->required();
  issue_cmd->add_option("--provider", is_node, "provider node host:port");
  issue_cmd->add_option("--keystore", is_keystore, "keystore file");
  issue_cmd->add_option("--out", is_out, "output bundle file")->required();

  // --- update / rotate / revoke / reinstate ---------------------------------
  struct UpdateArgs {
    std::string bundle, keystore = "", node = "", new_provider, note, out;
  };
  auto add_update_cmd = [&](const std::string& name, const std::string& desc) {
    auto* cmd = app.add_subcommand(name, desc);
    auto args = std::make_shared<UpdateArgs>();
    args->keystore = default_keystore;
    args->node = default_node;
    cmd->add_option("--bundle", args->bundle, "bundle file")->required();
    cmd->add_option("--keystore", args->keystore, "keystore file");
    cmd->add_option("--provider", args->node, "provider node host:port");
    cmd->add_option("--new-provider", args->new_provider, "switch to this provider id");
    cmd->add_option("--note", args->note, "free-text note");
    cmd->add_option("--out", args->out, "output bundle (defaults to --bundle)");
    return std::pair(cmd, args);
  };
  auto [update_cmd, update_args] = add_update_cmd("update", "Append a routine update");
  auto [rotate_cmd, rotate_args] = add_update_cmd("rotate", "Rotate the update key (routine update)");
  auto [revoke_cmd, revoke_args] = add_update_cmd("revoke", "Append a revocation");
  auto [reinstate_cmd, reinstate_args] = add_update_cmd("reinstate", "Append a reinstatement");

  // --- prove ----------------------------------------------------------------
  auto* prove_cmd = app.add_subcommand("prove", "Request a proof of provenance");
  std::string pr_bundle, pr_node = default_node, pr_out;
  uint64_t pr_freshness = 8;
  prove_cmd->add_option("--bundle", pr_bundle, "bundle file")->required();
  prove_cmd->add_option("--node", pr_node, "serving node host:port");
  prove_cmd->add_option("--freshness", pr_freshness, "freshness bound in blocks");
  prove_cmd->add_option("--out", pr_out, "output proof file")->required();

  // --- verify ---------------------------------------------------------------
  auto* verify_cmd = app.add_subcommand("verify", "Validate a bundle against a proof");
  std::string vf_bundle, vf_pop, vf_trust, vf_notices, vf_ledger, vf_validators;
  uint64_t vf_freshness = 8;
  int64_t vf_now = static_cast<int64_t>(std::time(nullptr));
  bool vf_json = false;
  verify_cmd->add_option("--bundle", vf_bundle, "bundle file")->required();
  verify_cmd->add_option("--pop", vf_pop, "proof of provenance file")->required();
  verify_cmd->add_option("--trust", vf_trust, "trust store file")->required();
  verify_cmd->add_option("--notices", vf_notices, "notice board file");
  verify_cmd->add_option("--ledger", vf_ledger, "ledger snapshot file")->required();
  verify_cmd->add_option("--validators", vf_validators, "validator set file")->required();
  verify_cmd->add_option("--freshness", vf_freshness, "freshness bound in blocks");
  verify_cmd->add_option("--now", vf_now, "validation time, UTC seconds");
  verify_cmd->add_flag("--json", vf_json, "emit the report as canonical JSON");

  // --- reissue --------------------------------------------------------------
  auto* reissue_cmd = app.add_subcommand(
      "reissue", "Mint a fresh certificate with the same datagram content");
  std::string ri_bundle, ri_issuer_ref, ri_node = default_node,
              ri_keystore = default_keystore, ri_out;
  reissue_cmd->add_option("--bundle", ri_bundle, "existing bundle file")->required();
  reissue_cmd->add_option("--issuer-key", ri_issuer_ref, "issuer key ref (hex)")->required();
  reissue_cmd->add_option("--provider", ri_node, "provider node host:port");
  reissue_cmd->add_option("--keystore", ri_keystore, "keystore file");
  reissue_cmd->add_option("--out", ri_out, "output bundle file")->required();

  // --- trust ----------------------------------------------------------------
  auto* trust_cmd = app.add_subcommand("trust", "Manage a trust store file");
  auto* trust_add = trust_cmd->add_subcommand("add", "Trust an issuer public key");
  std::string ta_file, ta_issuer, ta_key, ta_from_bundle;
  trust_add->add_option("--trust", ta_file, "trust store file")->required();
  trust_add->add_option("--issuer", ta_issuer, "issuer identity")->required();
  trust_add->add_option("--key", ta_key, "issuer public key (hex)");
  trust_add->add_option("--from-bundle", ta_from_bundle,
                        "take the key from this bundle's certificate");

  // --- node -----------------------------------------------------------------
  auto* node_cmd = app.add_subcommand("node", "Run or operate a validator node");
  auto* node_run = node_cmd->add_subcommand("run", "Serve the node endpoints");
  std::string nr_config;
  node_run->add_option("--config", nr_config, "node configuration file")->required();
  auto* node_seal = node_cmd->add_subcommand("seal", "Seal the pending epoch");
  auto* node_commit = node_cmd->add_subcommand("commit", "Commit the newest epoch");
  auto* node_block = node_cmd->add_subcommand("block", "Produce a ledger block");
  std::string nc_addr = default_node;
  for (auto* c : {node_seal, node_commit, node_block}) {
    c->add_option("--node", nc_addr, "node host:port");
  }

  // --- ledger ---------------------------------------------------------------
  auto* ledger_cmd = app.add_subcommand("ledger", "Inspect the quorum ledger");
  auto* ledger_blocks = ledger_cmd->add_subcommand("blocks", "Print all blocks");
  auto* ledger_head = ledger_cmd->add_subcommand("head", "Print the head height");
  std::string lg_file, lg_node, lg_out;
  for (auto* c : {ledger_blocks, ledger_head}) {
    c->add_option("--ledger", lg_file, "ledger snapshot file");
    c->add_option("--node", lg_node, "fetch from a live node host:port");
    c->add_option("--out", lg_out, "also save the snapshot to this file");
  }

  // --- sim ------------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("sim", "Deterministic multi-node simulation");
  auto* sim_run = sim_cmd->add_subcommand("run", "Run a scenario script");
  std::string sr_script;
  uint64_t sr_seed = 1;
  uint32_t sr_nodes = 3, sr_threshold = 2;
  bool sr_concurrent = false, sr_json = false;
  sim_run->add_option("--script", sr_script, "scenario file")->required();
  sim_run->add_option("--seed", sr_seed, "simulation seed");
  sim_run->add_option("--nodes", sr_nodes, "node count");
  sim_run->add_option("--threshold", sr_threshold, "quorum threshold");
  sim_run->add_flag("--concurrent", sr_concurrent, "use the concurrent sync driver");
  sim_run->add_flag("--json", sr_json, "emit the report as canonical JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (keygen_cmd->parsed()) {
      Keystore ks;
      if (std::ifstream(kg_out).good()) ks = Keystore::load(kg_out);
      auto seed = kg_seed.empty() ? random_seed() : parse_seed(kg_seed);
      KeyRef ref = ks.add_seed(seed);
      ks.save(kg_out);
      std::cout << digest_hex(ref.digest) << "\n";
      return 0;
    }

    if (issue_cmd->parsed()) {
      DiplomaBundle bundle =
          issue_flow(load_json(is_fields), is_issuer_ref, is_keystore, is_node);
      save_bundle(is_out, bundle);
      std::cout << "issued; record hash "
                << digest_hex(record_hash(bundle.certificate)) << "\n";
      return 0;
    }

    for (auto& [cmd, args, action] :
         {std::tuple(update_cmd, update_args, UpdateAction::Routine),
          std::tuple(rotate_cmd, rotate_args, UpdateAction::Routine),
          std::tuple(revoke_cmd, revoke_args, UpdateAction::Revoke),
          std::tuple(reinstate_cmd, reinstate_args, UpdateAction::Reinstate)}) {
      if (cmd->parsed()) {
        std::string note =
            args->note.empty() ? std::string(action_name(action)) : args->note;
        return update_flow(action, args->bundle, args->keystore, args->node,
                           args->new_provider, note, args->out);
      }
    }

    if (prove_cmd->parsed()) {
      DiplomaBundle bundle = load_bundle(pr_bundle);
      Json proof =
          node_post(pr_node, "/prove", to_json(make_request(bundle, pr_freshness)));
      write_file(pr_out, canonical_dump(proof));
      std::cout << "proof saved to " << pr_out << "\n";
      return 0;
    }

    if (verify_cmd->parsed()) {
      DiplomaBundle bundle = load_bundle(vf_bundle);
      ProofOfProvenance proof = proof_from_json(load_json(vf_pop));
      TrustStore trust = trust_from_json(load_json(vf_trust));
      std::vector<CompromiseNotice> notices;
      if (!vf_notices.empty()) {
        notices = board_from_json(load_json(vf_notices)).notices();
      }
      std::vector<LedgerBlock> ledger =
          ledger_snapshot_from_json(load_json(vf_ledger));
      ValidatorSet vs = validator_set_from_json(load_json(vf_validators));
      ValidationReport report = validate(bundle, proof, trust, notices, vs,
                                         ledger, vf_now, vf_freshness);
      std::cout << (vf_json ? canonical_dump(to_json(report))
                            : report_text(report));
      if (!report.fully_valid()) return 1;
      if (report.status.value == StatusValue::Revoked) return 10;
      if (report.status.value == StatusValue::Expired) return 11;
      return 0;
    }

    if (reissue_cmd->parsed()) {
      Json fields = to_json(load_bundle(ri_bundle).certificate.datagram);
      fields.erase("creation_key");
      fields.erase("update_key");
      fields.erase("tethering_point");
      DiplomaBundle fresh = issue_flow(fields, ri_issuer_ref, ri_keystore, ri_node);
      save_bundle(ri_out, fresh);
      std::cout << "reissued; record hash "
                << digest_hex(record_hash(fresh.certificate)) << "\n";
      return 0;
    }

    if (trust_add->parsed()) {
      TrustStore trust;
      std::ifstream probe(ta_file);
      if (probe.good()) trust = trust_from_json(load_json(ta_file));
      PublicKey pk;
      if (!ta_from_bundle.empty()) {
        pk = load_bundle(ta_from_bundle).certificate.issuer_public_key;
      } else if (!ta_key.empty()) {
        Bytes raw = from_hex(ta_key);
        if (raw.size() != 32) throw Error(Err::DecodeError, "key must be 32 bytes");
        std::copy(raw.begin(), raw.end(), pk.bytes.begin());
      } else {
        throw Error(Err::ConfigError, "need --key or --from-bundle");
      }
      auto& keys = trust.trusted_issuers[ta_issuer];
      if (std::find(keys.begin(), keys.end(), pk) == keys.end()) keys.push_back(pk);
      write_file(ta_file, canonical_dump(to_json(trust)));
      std::cout << "trusted " << ta_issuer << "\n";
      return 0;
    }

    if (node_run->parsed()) {
      NodeConfig config = node_config_from_json(load_json(nr_config));
      NodeService service(config);
      std::cout << "listening on " << config.listen_host << ":"
                << config.listen_port << std::endl;
      return service.serve() ? 0 : exit_code_for(Err::Transport);
    }
    if (node_seal->parsed()) {
      std::cout << canonical_dump(node_post(nc_addr, "/seal", Json::object())) << "\n";
      return 0;
    }
    if (node_commit->parsed()) {
      std::cout << canonical_dump(node_post(nc_addr, "/commit", Json::object())) << "\n";
      return 0;
    }
    if (node_block->parsed()) {
      std::cout << canonical_dump(node_post(nc_addr, "/ledger/block", Json::object())) << "\n";
      return 0;
    }

    if (ledger_blocks->parsed() || ledger_head->parsed()) {
      Json snapshot;
      if (!lg_node.empty()) {
        snapshot = node_get(lg_node, "/ledger/blocks");
      } else if (!lg_file.empty()) {
        snapshot = load_json(lg_file);
      } else {
        throw Error(Err::ConfigError, "need --ledger or --node");
      }
      std::vector<LedgerBlock> blocks = ledger_snapshot_from_json(snapshot);
      if (!lg_out.empty()) write_file(lg_out, canonical_dump(snapshot));
      if (ledger_head->parsed()) {
        if (blocks.empty()) throw Error(Err::NotFound, "ledger is empty");
        std::cout << blocks.back().height << "\n";
      } else {
        std::cout << canonical_dump(snapshot) << "\n";
      }
      return 0;
    }

    if (sim_run->parsed()) {
      std::ifstream script(sr_script);
      if (!script) throw Error(Err::IoError, "cannot open " + sr_script);
      ScenarioReport report =
          run_scenario(script, sr_nodes, sr_threshold, sr_seed, sr_concurrent);
      std::cout << (sr_json ? canonical_dump(to_json(report))
                            : scenario_report_text(report));
      return report.all_passed() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
