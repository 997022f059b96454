#include "gacn/rng.hpp"

#include <istream>
#include <ostream>

#include "gacn/error.hpp"

namespace gacn {

std::uint64_t RngStreams::derive_seed(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the name, then one splitmix64 round to decorrelate.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng& RngStreams::stream(std::string_view name) {
  auto it = streams_.find(name);
  if (it == streams_.end()) {
    it = streams_.emplace(std::string(name), Rng(derive_seed(seed_, name))).first;
  }
  return it->second;
}

void RngStreams::save(std::ostream& os) const {
  os << "seed " << seed_ << '\n';
  for (const auto& [name, rng] : streams_) os << name << ' ' << rng << '\n';
}

void RngStreams::load(std::istream& is) {
  std::string tag;
  if (!(is >> tag >> seed_) || tag != "seed") throw ParseError("rng-state", 0, "missing seed record");
  streams_.clear();
  std::string name;
  while (is >> name) {
    Rng rng;
    if (!(is >> rng)) throw ParseError("rng-state", 0, "bad state for stream '" + name + "'");
    streams_.emplace(name, rng);
  }
}

}  // namespace gacn
