#pragma once

#include "diploma/common.hpp"

namespace diploma {

// Concrete algorithms (SHA-256, Ed25519) are confined to crypto.cpp; the rest
// of the library only touches these abstract operations.

struct PublicKey {
  std::array<uint8_t, 32> bytes{};
  auto operator<=>(const PublicKey&) const = default;
};

// Holds the 32-byte seed; never serialized into protocol messages.
struct SecretKey {
  std::array<uint8_t, 32> seed{};
};

struct Signature {
  std::array<uint8_t, 64> bytes{};
  auto operator<=>(const Signature&) const = default;
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret;
};

// Hash of the canonical encoding of a public key.
struct KeyRef {
  Digest digest;
  auto operator<=>(const KeyRef&) const = default;
};

Digest hash(ByteView message);

// Deterministic: same seed yields the same pair. Throws InvalidSeed unless
// the seed is exactly 32 bytes.
KeyPair keygen(ByteView seed);

Signature sign(const SecretKey& secret, ByteView message);

// Returns false for malformed signatures or keys, never throws.
bool verify(const PublicKey& pub, ByteView message, const Signature& sig);

KeyRef key_ref(const PublicKey& pub);

}  // namespace diploma
