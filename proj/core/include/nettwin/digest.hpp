#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nettwin {

// Canonical binary encoder used for content addressing. Every field is
// length- or tag-prefixed and big-endian so encodings are unambiguous and
// platform independent.
class Encoder {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u32(uint32_t v);
  void i64(int64_t v);
  void f64(double v);
  void str(const std::string& s);

  const std::vector<uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<uint8_t> buf_;
};

std::string sha256_hex(const std::vector<uint8_t>& data);
std::string sha256_hex(const std::string& data);

}  // namespace nettwin
