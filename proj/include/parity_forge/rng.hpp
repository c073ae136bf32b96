#pragma once

// Counter-based keyed random numbers. Every draw is a pure function of
// (seed, domain, replicate, step, row), so results do not depend on iteration
// order or thread count.

#include <array>
#include <cstdint>

namespace parity_forge {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Separates independent uses of the same master seed.
enum class Domain : std::uint16_t {
  transform = 1,
  simulation = 2,
  bootstrap = 3,
  feature_sampling = 4,
  split = 5,
  pit = 6,
  test = 7,
};

struct DrawKey {
  std::uint64_t seed = 0;
  Domain domain = Domain::transform;
  std::uint32_t replicate = 0;
  std::uint16_t step = 0;

  DrawKey with_replicate(std::uint32_t r) const {
    DrawKey k = *this;
    k.replicate = r;
    return k;
  }
  DrawKey with_step(std::uint16_t s) const {
    DrawKey k = *this;
    k.step = s;
    return k;
  }
};

// Four raw 32-bit words for (key, row).
std::array<std::uint32_t, 4> keyed_bits(const DrawKey& key, std::uint64_t row);

// Uniform on the open interval (0, 1); `lane` selects one of two independent
// doubles per counter (0 or 1).
double keyed_uniform(const DrawKey& key, std::uint64_t row, unsigned lane = 0);

// Standard normal via the inverse CDF of a keyed uniform.
double keyed_normal(const DrawKey& key, std::uint64_t row, unsigned lane = 0);

// Derives a child seed from a parent seed and a tag (SplitMix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace parity_forge
