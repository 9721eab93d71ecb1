#pragma once

// Reproducible random streams for the Monte Carlo harness.
//
// Stream splitting rule: stream k of a run with root seed s is an
// mt19937_64 engine seeded with splitmix64(s ^ splitmix64(k + 1)).  The
// mapping depends only on (s, k), so trajectory k is reproducible for any
// worker count.  Normal variates come from the inverse CDF applied to
// uniforms, so runs are comparable across implementations of this layout.

#include <cstdint>
#include <random>

namespace llsde {

std::uint64_t splitmix64(std::uint64_t x);

inline std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream_index) {
  return splitmix64(root ^ splitmix64(stream_index + 1));
}

// Inverse of the standard normal CDF (Wichura's AS241, ~1e-15 accurate).
double inverse_normal_cdf(double p);

class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::uint64_t stream_index)
      : eng_(split_seed(root_seed, stream_index)) {}

  // uniform on (0, 1), endpoints excluded
  double uniform() {
    // 53-bit mantissa, shifted into the open interval
    const std::uint64_t bits = eng_() >> 11;
    return (double(bits) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() { return inverse_normal_cdf(uniform()); }

  // +-1 with probability 1/2 each
  double two_point() { return uniform() < 0.5 ? -1.0 : 1.0; }

  // exponential with the given rate (mean 1/rate)
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace llsde
