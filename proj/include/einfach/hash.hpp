#pragma once

#include <cstdint>
#include <string_view>

namespace einfach {

// splitmix64 finalizer; used for seed derivation and feature hashing.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// FNV-1a, streamable; used for deterministic run ids.
struct Fnv1a {
  std::uint64_t state = 0xCBF29CE484222325ull;

  constexpr void update(std::string_view bytes) {
    for (const char c : bytes) {
      state ^= static_cast<unsigned char>(c);
      state *= 0x100000001B3ull;
    }
  }
  constexpr std::uint64_t digest() const { return state; }
};

}  // namespace einfach
