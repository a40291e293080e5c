#include "ibcs/hash.h"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace ibcs {
namespace {

struct CtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

EVP_MD_CTX* ThreadContext() {
  thread_local std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  return ctx.get();
}

}  // namespace

Digest Sha256(ByteSpan data) { return Sha256({data}); }

Digest Sha256(std::initializer_list<ByteSpan> parts) {
  EVP_MD_CTX* ctx = ThreadContext();
  if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init");
  for (ByteSpan p : parts) {
    if (!p.empty() && EVP_DigestUpdate(ctx, p.data(), p.size()) != 1) {
      throw std::runtime_error("sha256 update");
    }
  }
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, out.data(), &len) != 1 || len != kDigestSize) {
    throw std::runtime_error("sha256 final");
  }
  return out;
}

}  // namespace ibcs
