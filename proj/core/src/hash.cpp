#include "xga/hash.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "xga/common.hpp"

namespace xga {

std::string git_blob_sha1(const std::string& content) {
  std::string header = "blob " + std::to_string(content.size());
  header.push_back('\0');

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr ||
      EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw NumericalError("sha1 digest failed");
  }
  EVP_MD_CTX_free(ctx);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string git_blob_sha1_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot read file for hashing: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return git_blob_sha1(buf.str());
}

}  // namespace xga
