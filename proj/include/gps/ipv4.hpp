// Copyright 2026 The GPS Scanner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace gps {

/// An IPv4 address in host byte order.
struct IPv4Address {
  std::uint32_t value = 0;

  constexpr IPv4Address() = default;
  constexpr explicit IPv4Address(std::uint32_t v) : value(v) {}

  /// Parses strict dotted-quad text ("1.2.3.4"). No leading zeros beyond a
  /// single "0", no whitespace, every octet <= 255.
  static std::optional<IPv4Address> try_parse(std::string_view text);

  /// As try_parse, but throws Error(Errc::parse).
  static IPv4Address parse(std::string_view text);

  std::string to_string() const;

  friend constexpr auto operator<=>(IPv4Address, IPv4Address) = default;
};

/// A CIDR block. The base address never has host bits set; constructors mask.
class Subnet {
public:
  /// The whole address space, 0.0.0.0/0.
  constexpr Subnet() = default;

  /// Masks `addr` down to `prefix_len` bits. Throws Error(Errc::invalid_argument)
  /// when prefix_len is outside [0, 32].
  Subnet(IPv4Address addr, int prefix_len);

  /// Parses "a.b.c.d/len". Host bits in the text are masked off.
  static Subnet parse(std::string_view text);
  static std::optional<Subnet> try_parse(std::string_view text);

  static constexpr std::uint32_t mask_for(int prefix_len) {
    return prefix_len == 0 ? 0u : ~std::uint32_t{0} << (32 - prefix_len);
  }

  constexpr IPv4Address base() const { return base_; }
  constexpr int prefix_len() const { return prefix_len_; }
  constexpr std::uint32_t mask() const { return mask_for(prefix_len_); }

  /// Number of addresses covered (2^32 for /0).
  constexpr std::uint64_t size() const { return std::uint64_t{1} << (32 - prefix_len_); }

  /// Last address in the block.
  constexpr IPv4Address last() const { return IPv4Address{base_.value | ~mask()}; }

  constexpr bool contains(IPv4Address ip) const {
    return (ip.value & mask()) == base_.value;
  }

  constexpr bool contains(const Subnet& other) const {
    return other.prefix_len_ >= prefix_len_ && contains(other.base_);
  }

  /// |this ∩ other|. CIDR blocks either nest or are disjoint.
  constexpr std::uint64_t overlap(const Subnet& other) const {
    if (contains(other))
      return other.size();
    if (other.contains(*this))
      return size();
    return 0;
  }

  std::string to_string() const;

  friend constexpr auto operator<=>(const Subnet& x, const Subnet& y) {
    if (auto c = x.base_ <=> y.base_; c != 0)
      return c;
    return x.prefix_len_ <=> y.prefix_len_;
  }
  friend constexpr bool operator==(const Subnet&, const Subnet&) = default;

private:
  IPv4Address base_{};
  int prefix_len_ = 0;
};

} // namespace gps

template <>
struct std::hash<gps::IPv4Address> {
  std::size_t operator()(gps::IPv4Address ip) const noexcept {
    return std::hash<std::uint32_t>{}(ip.value);
  }
};
