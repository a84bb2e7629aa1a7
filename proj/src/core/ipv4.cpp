// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#include "gps/ipv4.hpp"

#include "gps/error.hpp"

#include <charconv>

namespace gps {

std::optional<IPv4Address> IPv4Address::try_parse(std::string_view text) {
  std::uint32_t value = 0;
  std::size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (pos >= text.size() || text[pos] != '.')
        return std::nullopt;
      ++pos;
    }
    auto start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9' && pos - start < 4)
      ++pos;
    auto digits = pos - start;
    if (digits == 0 || digits > 3)
      return std::nullopt;
    if (digits > 1 && text[start] == '0')
      return std::nullopt;
    unsigned v = 0;
    std::from_chars(text.data() + start, text.data() + pos, v);
    if (v > 255)
      return std::nullopt;
    value = (value << 8) | v;
  }
  if (pos != text.size())
    return std::nullopt;
  return IPv4Address{value};
}

IPv4Address IPv4Address::parse(std::string_view text) {
  if (auto ip = try_parse(text))
    return *ip;
  throw Error(Errc::parse, "invalid IPv4 address '" + std::string(text) + "'");
}

std::string IPv4Address::to_string() const {
  std::string out;
  out.reserve(15);
  for (int shift = 24; shift >= 0; shift -= 8) {
    out += std::to_string((value >> shift) & 0xff);
    if (shift)
      out += '.';
  }
  return out;
}

Subnet::Subnet(IPv4Address addr, int prefix_len) {
  if (prefix_len < 0 || prefix_len > 32)
    throw Error(Errc::invalid_argument,
                "prefix length " + std::to_string(prefix_len) + " outside [0, 32]");
  prefix_len_ = prefix_len;
  base_ = IPv4Address{addr.value & mask_for(prefix_len)};
}

std::optional<Subnet> Subnet::try_parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos)
    return std::nullopt;
  auto ip = IPv4Address::try_parse(text.substr(0, slash));
  if (!ip)
    return std::nullopt;
  auto len_text = text.substr(slash + 1);
  int len = -1;
  auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc{} || ptr != len_text.data() + len_text.size() || len_text.empty())
    return std::nullopt;
  if (len < 0 || len > 32)
    return std::nullopt;
  return Subnet{*ip, len};
}

Subnet Subnet::parse(std::string_view text) {
  if (auto s = try_parse(text))
    return *s;
  throw Error(Errc::parse, "invalid subnet '" + std::string(text) + "'");
}

std::string Subnet::to_string() const {
  return base_.to_string() + "/" + std::to_string(prefix_len_);
}

} // namespace gps
