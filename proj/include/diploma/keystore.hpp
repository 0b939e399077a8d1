#pragma once

#include <map>

#include "diploma/encoding.hpp"

namespace diploma {

// Holder/issuer side secret storage: KeyRef -> seed. Never written into
// bundles, proofs, or node state.
class Keystore {
 public:
  KeyRef add_seed(ByteView seed);  // keygen + store, returns the ref
  KeyPair get(const KeyRef& ref) const;  // throws NotFound
  bool contains(const KeyRef& ref) const;
  size_t size() const { return seeds_.size(); }

  static Keystore load(const std::string& path);
  void save(const std::string& path) const;  // chmod 0600 where supported

 private:
  std::map<Digest, std::array<uint8_t, 32>> seeds_;
};

}  // namespace diploma
