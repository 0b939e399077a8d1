#include "diploma/encoding.hpp"

namespace diploma {

namespace {

void check_canonical(const Json& j) {
  switch (j.type()) {
    case Json::value_t::object:
      for (const auto& [k, v] : j.items()) {
        (void)k;
        check_canonical(v);
      }
      return;
    case Json::value_t::array:
      for (const auto& v : j) check_canonical(v);
      return;
    case Json::value_t::number_float:
      throw Error(Err::EncodingError, "floating point is outside the canonical grammar");
    case Json::value_t::binary:
    case Json::value_t::discarded:
      throw Error(Err::EncodingError, "unencodable value");
    default:
      return;
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  check_canonical(j);
  // nlohmann objects are std::map-backed: keys already sorted; dump() emits
  // no insignificant whitespace and decimal integers.
  return j.dump();
}

Json parse_json(std::string_view text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(Err::DecodeError, "malformed json");
  return j;
}

namespace {
const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(Err::DecodeError, std::string("missing field ") + name);
  }
  return j.at(name);
}
std::string field_string(const Json& j, const char* name) {
  const Json& f = field(j, name);
  if (!f.is_string()) throw Error(Err::DecodeError, std::string(name) + " must be a string");
  return f.get<std::string>();
}
}  // namespace

Digest get_digest(const Json& j, const char* name) {
  return digest_from_hex(field_string(j, name));
}

PublicKey get_public_key(const Json& j, const char* name) {
  Bytes raw = from_hex(field_string(j, name));
  if (raw.size() != 32) throw Error(Err::DecodeError, "public key must be 32 bytes");
  PublicKey pk;
  std::copy(raw.begin(), raw.end(), pk.bytes.begin());
  return pk;
}

Signature get_signature(const Json& j, const char* name) {
  Bytes raw = from_hex(field_string(j, name));
  if (raw.size() != 64) throw Error(Err::DecodeError, "signature must be 64 bytes");
  Signature s;
  std::copy(raw.begin(), raw.end(), s.bytes.begin());
  return s;
}

KeyRef get_key_ref(const Json& j, const char* name) {
  return KeyRef{get_digest(j, name)};
}

uint64_t get_u64(const Json& j, const char* name) {
  const Json& f = field(j, name);
  if (!f.is_number_unsigned()) {
    throw Error(Err::DecodeError, std::string(name) + " must be a non-negative integer");
  }
  return f.get<uint64_t>();
}

int64_t get_i64(const Json& j, const char* name) {
  const Json& f = field(j, name);
  if (!f.is_number_integer()) {
    throw Error(Err::DecodeError, std::string(name) + " must be an integer");
  }
  return f.get<int64_t>();
}

std::string get_string(const Json& j, const char* name) {
  return field_string(j, name);
}

std::optional<int64_t> opt_i64(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) return std::nullopt;
  return get_i64(j, name);
}

std::optional<std::string> opt_string(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) return std::nullopt;
  return get_string(j, name);
}

}  // namespace diploma
