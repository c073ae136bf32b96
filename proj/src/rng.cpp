#include "parity_forge/rng.hpp"

#include "parity_forge/error.hpp"
#include "parity_forge/special.hpp"

namespace parity_forge {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  // 53 random bits, offset by half an ulp so 0 and 1 are excluded.
  std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<std::uint32_t, 4> keyed_bits(const DrawKey& key, std::uint64_t row) {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32), key.replicate,
      (static_cast<std::uint32_t>(key.domain) << 16) | key.step};
  std::array<std::uint32_t, 2> k = {static_cast<std::uint32_t>(key.seed),
                                    static_cast<std::uint32_t>(key.seed >> 32)};
  return philox4x32(ctr, k);
}

double keyed_uniform(const DrawKey& key, std::uint64_t row, unsigned lane) {
  if (lane > 1) throw Error(ErrorKind::contract, "keyed draws have two lanes per counter");
  auto w = keyed_bits(key, row);
  return lane == 0 ? to_open_unit(w[0], w[1]) : to_open_unit(w[2], w[3]);
}

double keyed_normal(const DrawKey& key, std::uint64_t row, unsigned lane) {
  return normal_quantile(keyed_uniform(key, row, lane));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace parity_forge
