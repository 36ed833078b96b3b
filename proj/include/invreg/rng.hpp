#pragma once

#include <cstdint>
#include <random>

namespace invreg {

// Seeded generator used throughout the library: std::mt19937_64 seeded with
// a splitmix64 digest. Substreams are derived from (seed, stream, index) so a
// replication's draws depend only on its index, never on scheduling.
// Instances are not shared across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Named stream identifiers for substream derivation.
namespace streams {
inline constexpr std::uint64_t params = 0x7061'7261'6d73ULL;
inline constexpr std::uint64_t replication = 0x7265'706cULL;
inline constexpr std::uint64_t oracle = 0x6f72'636cULL;
}  // namespace streams

}  // namespace invreg
