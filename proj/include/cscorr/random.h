#ifndef CSCORR_RANDOM_H_
#define CSCORR_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cscorr {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used both as a hash and to turn arbitrary 64-bit
// seeds into well-mixed generator states.
std::uint64_t SplitMix64(std::uint64_t x);

// seed XOR hash(keys). Each key is folded through SplitMix64 in order, so
// (1, 2) and (2, 1) give different streams.
std::uint64_t DeriveSeed(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> keys);

Rng MakeRng(std::uint64_t seed);

}  // namespace cscorr

#endif  // CSCORR_RANDOM_H_
