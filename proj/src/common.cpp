#include "diploma/common.hpp"

namespace diploma {

const char* err_name(Err e) {
  switch (e) {
    case Err::InvalidSeed: return "InvalidSeed";
    case Err::EncodingError: return "EncodingError";
    case Err::DecodeError: return "DecodeError";
    case Err::MissingField: return "MissingField";
    case Err::InvalidLifetime: return "InvalidLifetime";
    case Err::NotAuthorizedKey: return "NotAuthorizedKey";
    case Err::InvalidSubmission: return "InvalidSubmission";
    case Err::DuplicateKey: return "DuplicateKey";
    case Err::NotFound: return "NotFound";
    case Err::NotSealed: return "NotSealed";
    case Err::KeyPresent: return "KeyPresent";
    case Err::CorruptBatch: return "CorruptBatch";
    case Err::EmptyAggregate: return "EmptyAggregate";
    case Err::Rejected: return "Rejected";
    case Err::InsufficientQuorum: return "InsufficientQuorum";
    case Err::InsufficientMetadata: return "InsufficientMetadata";
    case Err::UnknownKey: return "UnknownKey";
    case Err::StaleLedger: return "StaleLedger";
    case Err::ConfigError: return "ConfigError";
    case Err::ScriptError: return "ScriptError";
    case Err::Transport: return "Transport";
    case Err::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

// Canonical hex is lowercase only; rejecting uppercase keeps the encoding
// injective at the byte level.
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}
}  // namespace

std::string to_hex(ByteView data) {
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Err::DecodeError, "odd hex length");
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Err::DecodeError, "bad hex digit");
    out[i] = static_cast<uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string digest_hex(const Digest& d) { return to_hex(d.bytes); }

Digest digest_from_hex(std::string_view hex) {
  Bytes raw = from_hex(hex);
  if (raw.size() != 32) throw Error(Err::DecodeError, "digest must be 32 bytes");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

bool is_valid_utf8(std::string_view s) {
  size_t i = 0;
  while (i < s.size()) {
    uint8_t c = static_cast<uint8_t>(s[i]);
    size_t len;
    uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (size_t k = 1; k < len; ++k) {
      uint8_t cc = static_cast<uint8_t>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // overlong, surrogate, out of range
    if (len == 2 && cp < 0x80) return false;
    if (len == 3 && (cp < 0x800 || (cp >= 0xd800 && cp <= 0xdfff))) return false;
    if (len == 4 && (cp < 0x10000 || cp > 0x10ffff)) return false;
    i += len;
  }
  return true;
}

}  // namespace diploma
