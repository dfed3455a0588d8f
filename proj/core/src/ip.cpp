#include "nettwin/ip.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <cstring>

namespace nettwin {

const char* family_name(IpFamily f) { return f == IpFamily::V4 ? "v4" : "v6"; }

std::optional<IpFamily> family_from_name(std::string_view name) {
  if (name == "v4") return IpFamily::V4;
  if (name == "v6") return IpFamily::V6;
  return std::nullopt;
}

std::optional<IpAddr> IpAddr::parse(std::string_view text) {
  std::string s(text);
  IpAddr out;
  if (s.find(':') != std::string::npos) {
    out.family = IpFamily::V6;
    if (inet_pton(AF_INET6, s.c_str(), out.bytes.data()) != 1) return std::nullopt;
  } else {
    out.family = IpFamily::V4;
    if (inet_pton(AF_INET, s.c_str(), out.bytes.data()) != 1) return std::nullopt;
  }
  return out;
}

std::string IpAddr::str() const {
  char buf[INET6_ADDRSTRLEN] = {};
  if (family == IpFamily::V4) {
    inet_ntop(AF_INET, bytes.data(), buf, sizeof(buf));
  } else {
    inet_ntop(AF_INET6, bytes.data(), buf, sizeof(buf));
  }
  return buf;
}

std::optional<Prefix> Prefix::parse(std::string_view text) {
  auto slash = text.rfind('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto addr = IpAddr::parse(text.substr(0, slash));
  if (!addr) return std::nullopt;
  auto len_text = text.substr(slash + 1);
  unsigned len = 0;
  auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc() || ptr != len_text.data() + len_text.size()) return std::nullopt;
  Prefix p{*addr, static_cast<uint8_t>(len)};
  if (len > p.max_len()) return std::nullopt;
  return p;
}

namespace {

std::array<uint8_t, 16> masked(const std::array<uint8_t, 16>& in, uint8_t len) {
  std::array<uint8_t, 16> out{};
  unsigned full = len / 8;
  unsigned rem = len % 8;
  std::memcpy(out.data(), in.data(), full);
  if (rem != 0 && full < 16) {
    out[full] = static_cast<uint8_t>(in[full] & (0xFFu << (8 - rem)));
  }
  return out;
}

}  // namespace

Prefix Prefix::network() const {
  Prefix p = *this;
  p.addr.bytes = masked(addr.bytes, len);
  return p;
}

bool Prefix::contains(const IpAddr& ip) const {
  if (ip.family != addr.family) return false;
  return masked(ip.bytes, len) == masked(addr.bytes, len);
}

bool Prefix::contains(const Prefix& other) const {
  if (other.addr.family != addr.family || other.len < len) return false;
  return masked(other.addr.bytes, len) == masked(addr.bytes, len);
}

std::string Prefix::str() const {
  return network().addr.str() + "/" + std::to_string(len);
}

}  // namespace nettwin
