#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace gcedmd {

// 64-bit FNV-1a hash, used to derive named substreams from a master seed.
std::uint64_t fnv1a64(std::string_view s);

// Deterministic random stream. All draws go through explicit 53-bit uniforms
// and Box-Muller so sequences are bit-identical across platforms and standard
// library versions (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  // Independent named stream: same seed + same label => same sequence.
  Rng(std::uint64_t seed, std::string_view label) : eng_(seed ^ fnv1a64(label)) {}

  std::uint64_t bits() { return eng_(); }
  double uniform();                    // [0, 1) with 53-bit resolution
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);     // inclusive bounds, rejection sampled
  double normal();                     // standard normal
  std::complex<double> cnormal();      // complex normal, E|z|^2 = 1

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gcedmd
