#include "vmot/content_hash.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <memory>

#include "vmot/error.hpp"

namespace vmot {

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ErrorKind::kIo, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(kHex[digest[k] >> 4]);
    out.push_back(kHex[digest[k] & 0xf]);
  }
  return out;
}

std::string instance_hash(const VmotInstance& instance) {
  const MarginalSystem& sys = instance.system();
  std::string s = "vmot-instance/1\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu %zu\n", sys.periods(), sys.assets());
  s += buf;
  for (std::size_t t = 0; t < sys.periods(); ++t) {
    for (std::size_t i = 0; i < sys.assets(); ++i) {
      const auto& mu = sys.at(t, i);
      std::snprintf(buf, sizeof buf, "m %zu %zu %zu\n", t, i, mu.size());
      s += buf;
      for (std::size_t a = 0; a < mu.size(); ++a) {
        std::snprintf(buf, sizeof buf, "%a %a\n", mu.points()[a], mu.weights()[a]);
        s += buf;
      }
    }
  }
  s += "payoff ";
  s += instance.payoff().text();
  s += '\n';
  return sha256_hex(s);
}

}  // namespace vmot
