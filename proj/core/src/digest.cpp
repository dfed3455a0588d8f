#include "nettwin/digest.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>

namespace nettwin {

void Encoder::u32(uint32_t v) {
  for (int i = 3; i >= 0; --i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void Encoder::i64(int64_t v) {
  auto u = static_cast<uint64_t>(v);
  for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<uint8_t>(u >> (8 * i)));
}

void Encoder::f64(double v) {
  if (v == 0.0) v = 0.0;  // collapse -0.0 so equal values hash equally
  uint64_t u = std::bit_cast<uint64_t>(v);
  for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<uint8_t>(u >> (8 * i)));
}

void Encoder::str(const std::string& s) {
  u32(static_cast<uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

namespace {

std::string digest_hex(const uint8_t* data, size_t len) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int md_len = 0;
  EVP_Digest(data, len, md, &md_len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(md_len * 2);
  for (unsigned int i = 0; i < md_len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(const std::vector<uint8_t>& data) {
  return digest_hex(data.data(), data.size());
}

std::string sha256_hex(const std::string& data) {
  return digest_hex(reinterpret_cast<const uint8_t*>(data.data()), data.size());
}

}  // namespace nettwin
