#include "cscorr/random.h"

namespace cscorr {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t key : keys) {
    h = SplitMix64(h ^ SplitMix64(key));
  }
  return seed ^ h;
}

Rng MakeRng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(SplitMix64(seed)),
                    static_cast<std::uint32_t>(SplitMix64(seed) >> 32)};
  return Rng(seq);
}

}  // namespace cscorr
