#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace diploma {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

// 32-byte hash value; equality is byte equality.
struct Digest {
  std::array<uint8_t, 32> bytes{};
  auto operator<=>(const Digest&) const = default;
};

inline constexpr Digest kZeroDigest{};

enum class Err {
  InvalidSeed,
  EncodingError,
  DecodeError,
  MissingField,
  InvalidLifetime,
  NotAuthorizedKey,
  InvalidSubmission,
  DuplicateKey,
  NotFound,
  NotSealed,
  KeyPresent,
  CorruptBatch,
  EmptyAggregate,
  Rejected,
  InsufficientQuorum,
  InsufficientMetadata,
  UnknownKey,
  StaleLedger,
  ConfigError,
  ScriptError,
  Transport,
  IoError,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);  // throws DecodeError on bad input

std::string digest_hex(const Digest& d);
Digest digest_from_hex(std::string_view hex);

bool is_valid_utf8(std::string_view s);

}  // namespace diploma
