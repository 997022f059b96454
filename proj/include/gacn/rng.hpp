#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <string_view>

namespace gacn {

using Rng = std::mt19937_64;

// One seed fans out into independent named substreams, so that drawing more
// numbers from one component does not shift the draws of another.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  // Created lazily from (seed, name).
  Rng& stream(std::string_view name);

  // Text form of every substream that has been touched so far.
  void save(std::ostream& os) const;
  void load(std::istream& is);

  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);

 private:
  std::uint64_t seed_;
  std::map<std::string, Rng, std::less<>> streams_;
};

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace gacn
