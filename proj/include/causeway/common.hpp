#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace causeway {

enum class ErrorCode {
  IndexOutOfRange,
  MalformedActionSpec,
  IdenticalPair,
  RemoteUnavailable,
  DecompositionFailed,
  EmptyGraph,
  DuplicateSubtask,
  UnknownPath,
  NoOpenPath,
  UnknownAgent,
  NoSubtask,
  ZeroIndicators,
  EmptyBlueprint,
  NoViewpoints,
  ZeroTime,
  DegenerateDenominator,
  EmptyRecipe,
  ZeroTotal,
  EmptyRooms,
  ZeroAttempts,
  ScenarioInvalid,
  TraceCorrupt,
  DivergenceDetected,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Vec3 {
  int x = 0;
  int y = 0;
  int z = 0;

  auto operator<=>(const Vec3&) const = default;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

inline int chebyshev(const Vec3& a, const Vec3& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

std::string to_string(const Vec3& v);

// FNV-1a, stable across platforms (std::hash is not).
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// mt19937_64 output is pinned by the standard; the distribution adaptors are
// not, so bounded draws go through plain modulo to keep runs reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Inclusive range.
  int range(int lo, int hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

  bool chance(double p) { return unit() < p; }

  // Derive an independent, label-keyed stream from the same scenario seed.
  Rng fork(std::string_view label) const { return Rng(seed_ ^ fnv1a(label)); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace causeway
