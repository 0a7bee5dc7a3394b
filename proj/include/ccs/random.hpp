#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace ccs {

// Named stream families. A stream is identified by (master seed, family,
// index), so each replication, population or search trial owns a disjoint
// generator regardless of which thread runs it.
enum class StreamFamily : std::uint64_t {
  kPopulation = 1,
  kCounts = 2,
  kReplication = 3,
  kTruth = 4,
  kSearch = 5,
  kSingleSample = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 64-bit Mersenne Twister keyed by a splitmix64 hash of (seed, family, index).
// Satisfies UniformRandomBitGenerator so the <random> distributions apply.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed,
                        StreamFamily family = StreamFamily::kPopulation,
                        std::uint64_t index = 0)
      : engine_(derive(seed, static_cast<std::uint64_t>(family), index)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  result_type operator()() { return engine_(); }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t family,
                              std::uint64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (family * 0xd1b54a32d192ed03ULL));
    return splitmix64(h ^ index);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ccs
