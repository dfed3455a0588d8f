#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nettwin {

enum class IpFamily : uint8_t { V4 = 4, V6 = 6 };

const char* family_name(IpFamily f);
std::optional<IpFamily> family_from_name(std::string_view name);

// Value type for a v4 or v6 address. v4 occupies bytes[0..3]; the tail is zero.
struct IpAddr {
  IpFamily family = IpFamily::V4;
  std::array<uint8_t, 16> bytes{};

  static std::optional<IpAddr> parse(std::string_view text);
  std::string str() const;

  auto operator<=>(const IpAddr&) const = default;
};

// CIDR prefix. `addr` keeps host bits as written; network() masks them off.
struct Prefix {
  IpAddr addr;
  uint8_t len = 0;

  static std::optional<Prefix> parse(std::string_view text);

  uint8_t max_len() const { return addr.family == IpFamily::V4 ? 32 : 128; }
  Prefix network() const;
  bool contains(const IpAddr& ip) const;
  // True when `other` lies inside this prefix (other.len >= len required).
  bool contains(const Prefix& other) const;
  std::string str() const;

  auto operator<=>(const Prefix&) const = default;
};

}  // namespace nettwin
