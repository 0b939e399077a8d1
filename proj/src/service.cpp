#include "diploma/service.hpp"

#include <httplib.h>

namespace diploma {

NodeConfig node_config_from_json(const Json& j) {
  NodeConfig c;
  c.node_id = get_string(j, "node_id");
  if (auto v = opt_string(j, "listen_host")) c.listen_host = *v;
  if (j.contains("listen_port")) c.listen_port = static_cast<int>(get_u64(j, "listen_port"));
  Bytes seed = from_hex(get_string(j, "seed"));
  if (seed.size() != 32) throw Error(Err::ConfigError, "seed must be 32 bytes of hex");
  std::copy(seed.begin(), seed.end(), c.seed.begin());
  if (j.contains("validators")) {
    c.validators = validator_set_from_json(j.at("validators"));
  }
  return c;
}

Json to_json(const NodeConfig& c) {
  return Json{{"listen_host", c.listen_host},
              {"listen_port", c.listen_port},
              {"node_id", c.node_id},
              {"seed", to_hex(c.seed)},
              {"validators", to_json(c.validators)}};
}

namespace {

ValidatorSet default_validators(const NodeConfig& c, const KeyPair& key) {
  if (!c.validators.members.empty()) return c.validators;
  ValidatorSet vs;
  vs.threshold = 1;
  vs.members.emplace_back(c.node_id, key.public_key);
  return vs;
}

void reply_error(httplib::Response& res, const Error& e) {
  Json j{{"error", err_name(e.code())}, {"message", e.what()}};
  res.status = e.code() == Err::Transport ? 502 : 400;
  res.set_content(j.dump(), "application/json");
}

void reply_json(httplib::Response& res, const Json& j) {
  res.set_content(canonical_dump(j), "application/json");
}

}  // namespace

NodeService::NodeService(const NodeConfig& config)
    : config_(config),
      key_(keygen(config.seed)),
      provider_(config.node_id, key_),
      ledger_(default_validators(config, key_)) {
  std::vector<SignerId> self{{config_.node_id, key_}};
  if (ledger_.validator_set().threshold == 1) {
    ledger_.produce_block(self);  // genesis
  }
}

MetadataView NodeService::metadata_view() const {
  MetadataView view;
  view.stores[provider_.id()] = &provider_.store();
  for (const auto& [id, store] : imported_) {
    if (id != provider_.id()) view.stores[id] = &store;
  }
  return view;
}

bool NodeService::serve() {
  httplib::Server server;
  server_ = &server;
  auto guarded = [this](auto fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mutex_);
      try {
        fn(req, res);
      } catch (const Error& e) {
        reply_error(res, e);
      } catch (const std::exception& e) {
        reply_error(res, Error(Err::DecodeError, e.what()));
      }
    };
  };

  server.Post("/register", guarded([this](const httplib::Request& req,
                                          httplib::Response& res) {
    TransactionSubmission s = submission_from_json(parse_json(req.body));
    RegistrationReceipt r = provider_.register_submission(s);
    reply_json(res, Json{{"pending_epoch_index", r.pending_epoch_index}});
  }));

  server.Get("/tether", guarded([this](const httplib::Request&,
                                       httplib::Response& res) {
    reply_json(res, to_json(provider_.tethering_point()));
  }));

  server.Post("/seal", guarded([this](const httplib::Request&,
                                      httplib::Response& res) {
    reply_json(res, to_json(provider_.seal_epoch().header));
  }));

  server.Post("/commit", guarded([this](const httplib::Request&,
                                        httplib::Response& res) {
    uint64_t latest = provider_.store().size() - 1;
    Commitment c = make_commitment(provider_, latest);
    ledger_.submit_commitment(c);
    reply_json(res, to_json(c));
  }));

  server.Post("/ledger/block", guarded([this](const httplib::Request&,
                                              httplib::Response& res) {
    std::vector<SignerId> self{{config_.node_id, key_}};
    reply_json(res, to_json(ledger_.produce_block(self)));
  }));

  server.Get("/ledger/head", guarded([this](const httplib::Request&,
                                            httplib::Response& res) {
    reply_json(res, Json{{"height", ledger_.head_height()}});
  }));

  server.Get("/ledger/blocks", guarded([this](const httplib::Request&,
                                              httplib::Response& res) {
    reply_json(res, ledger_snapshot_json(ledger_.blocks()));
  }));

  server.Get("/validators", guarded([this](const httplib::Request&,
                                           httplib::Response& res) {
    reply_json(res, to_json(ledger_.validator_set()));
  }));

  server.Post("/prove", guarded([this](const httplib::Request& req,
                                       httplib::Response& res) {
    ProvenanceRequest r = request_from_json(parse_json(req.body));
    try {
      reply_json(res, to_json(build_proof(r, metadata_view(), ledger_.blocks())));
    } catch (const Error& e) {
      if (e.code() == Err::InsufficientMetadata) {
        board_.publish(AssociationNotice{config_.node_id,
                                         r.tethering_point.provider_id,
                                         "unable to provide proof of provenance"});
      }
      throw;
    }
  }));

  server.Get("/export", guarded([this](const httplib::Request& req,
                                       httplib::Response& res) {
    uint64_t from = req.has_param("from") ? std::stoull(req.get_param_value("from")) : 0;
    uint64_t to = req.has_param("to") ? std::stoull(req.get_param_value("to"))
                                      : provider_.store().size() - 1;
    reply_json(res, to_json(export_metadata(provider_.id(), provider_.store(),
                                            from, to)));
  }));

  server.Post("/import", guarded([this](const httplib::Request& req,
                                        httplib::Response& res) {
    MetadataBatch batch = batch_from_json(parse_json(req.body));
    const PublicKey* key = ledger_.validator_set().find(batch.provider_id);
    if (!key) throw Error(Err::CorruptBatch, "unknown provider " + batch.provider_id);
    ImportReport r = import_metadata(imported_[batch.provider_id], batch, *key);
    reply_json(res, Json{{"first_index", r.first_index},
                         {"imported", r.imported},
                         {"last_index", r.last_index}});
  }));

  server.Post("/notices", guarded([this](const httplib::Request& req,
                                         httplib::Response& res) {
    board_.publish(notice_from_json(parse_json(req.body)));
    reply_json(res, Json{{"ok", true}});
  }));

  server.Get("/notices", guarded([this](const httplib::Request&,
                                        httplib::Response& res) {
    reply_json(res, to_json(board_));
  }));

  bool ok = server.listen(config_.listen_host, config_.listen_port);
  server_ = nullptr;
  return ok;
}

void NodeService::stop() {
  if (server_) static_cast<httplib::Server*>(server_)->stop();
}

namespace {

std::pair<std::string, int> split_addr(const std::string& addr) {
  auto pos = addr.rfind(':');
  if (pos == std::string::npos) throw Error(Err::ConfigError, "node address must be host:port");
  return {addr.substr(0, pos), std::stoi(addr.substr(pos + 1))};
}

Json handle_response(const httplib::Result& result) {
  if (!result) throw Error(Err::Transport, "connection failed");
  Json j = parse_json(result->body);
  if (result->status != 200) {
    Err code = Err::Transport;
    if (j.is_object() && j.contains("error")) {
      std::string name = j.at("error").get<std::string>();
      for (int e = 0; e <= static_cast<int>(Err::IoError); ++e) {
        if (name == err_name(static_cast<Err>(e))) code = static_cast<Err>(e);
      }
    }
    std::string message = j.value("message", "remote error");
    // the server's message already starts with the error name; avoid doubling
    std::string prefix = std::string(err_name(code)) + ": ";
    if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
    throw Error(code, message);
  }
  return j;
}

}  // namespace

Json node_get(const std::string& addr, const std::string& path) {
  auto [host, port] = split_addr(addr);
  httplib::Client client(host, port);
  client.set_connection_timeout(5);
  return handle_response(client.Get(path));
}

Json node_post(const std::string& addr, const std::string& path, const Json& body) {
  auto [host, port] = split_addr(addr);
  httplib::Client client(host, port);
  client.set_connection_timeout(5);
  return handle_response(client.Post(path, canonical_dump(body), "application/json"));
}

}  // namespace diploma
