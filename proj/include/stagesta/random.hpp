#ifndef STAGESTA_RANDOM_HPP
#define STAGESTA_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace stagesta {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Key for an independent stream: (seed, domain tag, index).
constexpr std::uint64_t stream_key(std::uint64_t seed, std::string_view domain,
                                   std::uint64_t index) {
  return mix64(mix64(seed ^ fnv1a64(domain)) + mix64(index + 0x632be59bd9b4e019ULL));
}

// Counter-based generator: draw i of a stream is mix64(key + i * golden).
// Streams are fully determined by their key, so realizations do not depend
// on evaluation order or thread scheduling.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t next_u64() { return mix64(key_ + 0xd1b54a32d192ed03ULL * counter_++); }

  // Uniform on (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes two draws per call.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace stagesta

#endif  // STAGESTA_RANDOM_HPP
