#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dnagpt {

// 64-bit FNV-1a. Stable across platforms; used for cache keys and seed
// derivation, never for anything security-relevant.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  Fnv1a& update(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<unsigned char>(v >> (8 * i));
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  // Length-prefixed so that ("ab","c") and ("a","bc") hash differently.
  Fnv1a& field(std::string_view bytes) noexcept {
    update(static_cast<std::uint64_t>(bytes.size()));
    return update(bytes);
  }

  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// splitmix64 finalizer; decorrelates nearby seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t v);

}  // namespace dnagpt
