#include "diploma/crypto.hpp"

#include <openssl/evp.h>

#include <memory>

namespace diploma {

namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct CtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using CtxPtr = std::unique_ptr<EVP_MD_CTX, CtxDeleter>;

PkeyPtr load_private(const SecretKey& sk) {
  PkeyPtr p(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                         sk.seed.data(), sk.seed.size()));
  if (!p) throw Error(Err::EncodingError, "ed25519 private key load failed");
  return p;
}

PkeyPtr load_public(const PublicKey& pk) {
  return PkeyPtr(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                             pk.bytes.data(), pk.bytes.size()));
}

}  // namespace

Digest hash(ByteView message) {
  Digest out;
  unsigned int len = 0;
  CtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), message.data(), message.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.bytes.data(), &len) != 1 || len != 32) {
    throw Error(Err::EncodingError, "sha256 failure");
  }
  return out;
}

KeyPair keygen(ByteView seed) {
  if (seed.size() != 32) throw Error(Err::InvalidSeed, "seed must be 32 bytes");
  KeyPair kp;
  std::copy(seed.begin(), seed.end(), kp.secret.seed.begin());
  PkeyPtr p = load_private(kp.secret);
  size_t len = kp.public_key.bytes.size();
  if (EVP_PKEY_get_raw_public_key(p.get(), kp.public_key.bytes.data(), &len) != 1 ||
      len != 32) {
    throw Error(Err::InvalidSeed, "public key derivation failed");
  }
  return kp;
}

Signature sign(const SecretKey& secret, ByteView message) {
  PkeyPtr p = load_private(secret);
  CtxPtr ctx(EVP_MD_CTX_new());
  Signature sig;
  size_t len = sig.bytes.size();
  if (!ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, p.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.bytes.data(), &len, message.data(),
                     message.size()) != 1 ||
      len != 64) {
    throw Error(Err::EncodingError, "ed25519 sign failure");
  }
  return sig;
}

bool verify(const PublicKey& pub, ByteView message, const Signature& sig) {
  PkeyPtr p = load_public(pub);
  if (!p) return false;
  CtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx ||
      EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, p.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), sig.bytes.data(), sig.bytes.size(),
                          message.data(), message.size()) == 1;
}

KeyRef key_ref(const PublicKey& pub) { return KeyRef{hash(pub.bytes)}; }

}  // namespace diploma
