#include "dictct/hash.hpp"

#include <array>
#include <bit>
#include <cstring>

namespace dictct {

namespace {
constexpr std::uint64_t kPrime = 0x100000001b3ULL;
}

Fnv1a& Fnv1a::update(std::span<const std::byte> bytes) {
  for (const std::byte b : bytes) {
    state_ ^= static_cast<std::uint64_t>(b);
    state_ *= kPrime;
  }
  return *this;
}

Fnv1a& Fnv1a::update(std::string_view text) {
  return update(std::as_bytes(std::span(text.data(), text.size())));
}

Fnv1a& Fnv1a::update(std::span<const double> values) {
  // Hash the little-endian encoding so digests agree across platforms.
  for (const double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    std::array<std::byte, 8> le{};
    for (auto& b : le) {
      b = static_cast<std::byte>(bits & 0xffU);
      bits >>= 8;
    }
    update(std::span<const std::byte>(le));
  }
  return *this;
}

std::string Fnv1a::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xfU];
    value >>= 4;
  }
  return out;
}

}  // namespace dictct
