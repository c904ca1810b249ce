#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace dictct {

/// 64-bit FNV-1a, used to fingerprint artifacts and their inputs.
class Fnv1a {
 public:
  Fnv1a& update(std::span<const std::byte> bytes);
  Fnv1a& update(std::string_view text);
  Fnv1a& update(std::span<const double> values);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

}  // namespace dictct
