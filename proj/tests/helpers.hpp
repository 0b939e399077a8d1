#pragma once

#include <random>

#include "diploma/sim.hpp"

namespace diploma::test {

// --- independent Merkle oracle ---------------------------------------------
// Bottom-up recomputation written separately from the library's tree code;
// used to cross-check roots, membership, and absence.

inline Digest oracle_pair(const Digest& l, const Digest& r) {
  Bytes buf{0x01};
  buf.insert(buf.end(), l.bytes.begin(), l.bytes.end());
  buf.insert(buf.end(), r.bytes.begin(), r.bytes.end());
  return hash(buf);
}

inline Digest oracle_leaf(const std::array<uint8_t, 32>& key, const Digest& rh) {
  Bytes buf{0x00};
  buf.insert(buf.end(), key.begin(), key.end());
  buf.insert(buf.end(), rh.bytes.begin(), rh.bytes.end());
  return hash(buf);
}

inline Digest oracle_root(std::vector<Digest> level) {
  if (level.empty()) {
    return oracle_leaf(std::array<uint8_t, 32>{}, Digest{});
  }
  while (level.size() > 1) {
    std::vector<Digest> up;
    size_t i = 0;
    while (i < level.size()) {
      if (i + 1 < level.size()) {
        up.push_back(oracle_pair(level[i], level[i + 1]));
        i += 2;
      } else {
        up.push_back(level[i]);  // promoted unchanged
        i += 1;
      }
    }
    level.swap(up);
  }
  return level[0];
}

// Linear-scan membership oracle over an epoch's leaves.
inline bool oracle_contains(const Epoch& e, const std::array<uint8_t, 32>& key) {
  for (const auto& l : e.leaves) {
    if (l.sort_key == key) return true;
  }
  return false;
}

// --- random byte generation -------------------------------------------------

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(uint64_t seed) : engine(seed) {}

  uint64_t u64() { return engine(); }
  uint64_t below(uint64_t n) { return engine() % n; }

  Bytes bytes(size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<uint8_t>(engine());
    return out;
  }
  std::array<uint8_t, 32> seed32() {
    std::array<uint8_t, 32> out;
    for (auto& b : out) b = static_cast<uint8_t>(engine());
    return out;
  }
  Digest digest() {
    Digest d;
    for (auto& b : d.bytes) b = static_cast<uint8_t>(engine());
    return d;
  }
};

// --- end-to-end world built on the simulator --------------------------------

struct TestDiploma {
  DiplomaBundle bundle;
  std::map<Digest, KeyPair> keys;
  std::string issuer;
};

struct TestWorld {
  NetworkSim sim;
  TrustStore trust;
  std::map<std::string, KeyPair> issuers;

  TestWorld(uint32_t n, uint32_t t, uint64_t seed) : sim(n, t, seed) {}

  KeyPair& issuer(const std::string& id) {
    auto it = issuers.find(id);
    if (it == issuers.end()) {
      KeyPair kp = keygen(sim.next_seed());
      it = issuers.emplace(id, kp).first;
      trust.trusted_issuers[id].push_back(kp.public_key);
    }
    return it->second;
  }

  TestDiploma issue(const std::string& issuer_id, const std::string& node_id,
                    std::optional<int64_t> issued_at = std::nullopt,
                    std::optional<int64_t> expires_at = std::nullopt,
                    std::optional<std::string> holder = std::nullopt) {
    TestDiploma d;
    d.issuer = issuer_id;
    KeyPair creation = keygen(sim.next_seed());
    KeyPair update = keygen(sim.next_seed());
    d.keys[key_ref(creation.public_key).digest] = creation;
    d.keys[key_ref(update.public_key).digest] = update;
    SimNode& node = sim.node(node_id);
    CertificateDatagram dg;
    dg.issuer_id = issuer_id;
    dg.issued_at = issued_at;
    dg.expires_at = expires_at;
    dg.holder_id = holder;
    dg.creation_key = key_ref(creation.public_key);
    dg.update_key = key_ref(update.public_key);
    dg.tethering_point = node.provider->tethering_point();
    d.bundle.certificate = issue_certificate(dg, issuer(issuer_id));
    node.provider->register_submission(
        make_submission(canonical_bytes(d.bundle.certificate), creation));
    ++node.fees.registrations;
    return d;
  }

  // Appends an update and registers it; registration target is the current
  // provider, or new_provider when switching.
  UpdateRecord update(TestDiploma& d, UpdateAction action,
                      std::optional<std::string> new_provider = std::nullopt,
                      bool register_it = true) {
    KeyPair signer = d.keys.at(head_update_key(d.bundle).digest);
    KeyPair next = keygen(sim.next_seed());
    d.keys[key_ref(next.public_key).digest] = next;
    UpdateRecord u = append_update(d.bundle, action, action_name(action),
                                   key_ref(next.public_key), new_provider, signer);
    if (register_it) {
      std::string target = new_provider
                               ? *new_provider
                               : record_provider(d.bundle, d.bundle.updates.size());
      SimNode& node = sim.node(target);
      node.provider->register_submission(make_submission(canonical_bytes(u), signer));
      ++node.fees.registrations;
    }
    d.bundle.updates.push_back(u);
    return u;
  }

  void seal(const std::string& node_id) { sim.node(node_id).provider->seal_epoch(); }
  void commit(const std::string& node_id) { sim.commit(sim.node(node_id)); }
  void block() { sim.produce_block(); }
  void sync() { sim.sync_round(); }

  // seal + commit every node, then one block and one sync round.
  void settle() {
    for (auto& n : sim.nodes()) {
      if (!n.alive) continue;
      n.provider->seal_epoch();
      sim.commit(n);
    }
    sim.produce_block();
    sim.sync_round();
  }

  ProofOfProvenance prove(TestDiploma& d, const std::string& server,
                          uint64_t freshness) {
    return sim.serve_proof(sim.node(server), make_request(d.bundle, freshness));
  }

  ValidationReport validate_diploma(const TestDiploma& d,
                                    const ProofOfProvenance& proof, int64_t now,
                                    uint64_t freshness) {
    return validate(d.bundle, proof, trust, sim.board().notices(),
                    sim.ledger().validator_set(), sim.ledger().blocks(), now,
                    freshness);
  }
};

}  // namespace diploma::test
