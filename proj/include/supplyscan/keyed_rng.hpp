#pragma once

// Counter-based random streams. A draw is a pure function of its key, so the
// value at (seed, tag, i, j, ...) never depends on how many draws were made
// before it or on which thread asks for it.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace supplyscan::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a; used to turn stream tags ("fpn", "read", ...) into key words.
constexpr std::uint64_t tag(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// A position in key space. Deriving a child mixes one more word in.
class Key {
public:
  constexpr explicit Key(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {}

  constexpr Key with(std::uint64_t word) const noexcept {
    Key k = *this;
    k.state_ = splitmix64(state_ ^ splitmix64(word + 0x632be59bd9b4e019ULL));
    return k;
  }
  constexpr Key with(std::string_view name) const noexcept { return with(tag(name)); }

  constexpr std::uint64_t bits() const noexcept { return state_; }

private:
  std::uint64_t state_;
};

/// Uniform in (0, 1]; never zero, so it is safe under log().
inline double uniform_open0(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Uniform in [0, 1).
inline double uniform(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct NormalPair {
  double first;
  double second;
};

/// Box-Muller on two words derived from the key.
inline NormalPair normal_pair(const Key& key) noexcept {
  const double u1 = uniform_open0(key.with(0).bits());
  const double u2 = uniform(key.with(1).bits());
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

inline double normal(const Key& key) noexcept { return normal_pair(key).first; }

}  // namespace supplyscan::rng
