#pragma once

#include <nlohmann/json.hpp>
#include <optional>

#include "diploma/common.hpp"
#include "diploma/crypto.hpp"

namespace diploma {

// Canonical encoding: JSON with lexicographically sorted object keys, no
// insignificant whitespace, binary fields as lowercase hex text, integers in
// decimal, absent optional fields omitted. This encoding doubles as the wire
// and file format; every hashing and signing preimage goes through it.
using Json = nlohmann::json;

// Serializes a JSON value under the canonical rules. Throws EncodingError if
// the value contains anything outside the canonical grammar (e.g. floats).
std::string canonical_dump(const Json& j);

Json parse_json(std::string_view text);  // throws DecodeError

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

// --- json helpers for the primitive crypto types ---------------------------

inline Json json_hex(ByteView b) { return to_hex(b); }

Digest get_digest(const Json& j, const char* field);
PublicKey get_public_key(const Json& j, const char* field);
Signature get_signature(const Json& j, const char* field);
KeyRef get_key_ref(const Json& j, const char* field);
uint64_t get_u64(const Json& j, const char* field);
int64_t get_i64(const Json& j, const char* field);
std::string get_string(const Json& j, const char* field);
std::optional<int64_t> opt_i64(const Json& j, const char* field);
std::optional<std::string> opt_string(const Json& j, const char* field);

// Canonical bytes of any type with a to_json().
template <typename T>
Bytes canonical_bytes(const T& value) {
  return to_bytes(canonical_dump(to_json(value)));
}

}  // namespace diploma
