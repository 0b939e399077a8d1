#include "diploma/keystore.hpp"

#include <sys/stat.h>

#include <fstream>
#include <sstream>

namespace diploma {

KeyRef Keystore::add_seed(ByteView seed) {
  KeyPair kp = keygen(seed);
  KeyRef ref = key_ref(kp.public_key);
  seeds_[ref.digest] = kp.secret.seed;
  return ref;
}

KeyPair Keystore::get(const KeyRef& ref) const {
  auto it = seeds_.find(ref.digest);
  if (it == seeds_.end()) throw Error(Err::NotFound, "key not in keystore");
  return keygen(it->second);
}

bool Keystore::contains(const KeyRef& ref) const {
  return seeds_.contains(ref.digest);
}

Keystore Keystore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open keystore " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j = parse_json(buf.str());
  Keystore ks;
  for (const auto& [ref_hex, seed_hex] : j.at("entries").items()) {
    Bytes seed = from_hex(seed_hex.get<std::string>());
    if (seed.size() != 32) throw Error(Err::DecodeError, "bad keystore seed");
    KeyRef ref = ks.add_seed(seed);
    if (digest_hex(ref.digest) != ref_hex) {
      throw Error(Err::DecodeError, "keystore entry ref does not match seed");
    }
  }
  return ks;
}

void Keystore::save(const std::string& path) const {
  Json entries = Json::object();
  for (const auto& [ref, seed] : seeds_) {
    entries[digest_hex(ref)] = to_hex(seed);
  }
  Json j{{"entries", entries}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Err::IoError, "cannot write keystore " + path);
  out << canonical_dump(j);
  out.close();
  ::chmod(path.c_str(), 0600);
}

}  // namespace diploma
