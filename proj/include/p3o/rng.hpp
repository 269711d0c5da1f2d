#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace p3o {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Boost 1.74 does not ship it, so it lives here.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

// Counter-based stream. Key = 64-bit seed, counter words 2..3 = stream id,
// words 0..1 = block index inside the stream. Distinct (seed, stream) pairs
// never share blocks, so a trajectory's draws do not depend on n or on the
// order in which trajectories are produced.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Standard normal by Box-Muller; no cached second variate.
  double normal();
  // Inverse-CDF draw from a probability vector of length n.
  int categorical(const double* p, int n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

// splitmix64 finaliser; used to derive child seeds deterministically.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace p3o
