#pragma once

#include <mutex>

#include "diploma/validation.hpp"

namespace diploma {

struct NodeConfig {
  std::string node_id;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8420;
  std::array<uint8_t, 32> seed{};
  // Known programme participants; defaults to just this node, threshold 1.
  ValidatorSet validators;
};

NodeConfig node_config_from_json(const Json& j);
Json to_json(const NodeConfig& c);

// One validator node: integrity provider, proof server, metadata peer, and
// (simulated) ledger host, behind an HTTP interface.
class NodeService {
 public:
  explicit NodeService(const NodeConfig& config);

  // Blocks serving requests until stop() is called from another thread.
  bool serve();
  void stop();

  IntegrityProvider& provider() { return provider_; }
  Ledger& ledger() { return ledger_; }

 private:
  friend class NodeServiceHandlers;
  NodeConfig config_;
  KeyPair key_;
  IntegrityProvider provider_;
  Ledger ledger_;
  NoticeBoard board_;
  std::map<ProviderId, EpochStore> imported_;
  std::mutex mutex_;
  void* server_ = nullptr;  // httplib::Server, kept out of the public header

  MetadataView metadata_view() const;
};

// --- thin HTTP client used by the CLI --------------------------------------
// All calls throw Error(Err::Transport) on connection failure and rethrow the
// server's coded error otherwise.

Json node_get(const std::string& addr, const std::string& path);
Json node_post(const std::string& addr, const std::string& path, const Json& body);

}  // namespace diploma
