#ifndef SMM_RANDOM_H_
#define SMM_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

namespace smm {

// mt19937_64 plus hand-rolled draws, so sampled streams do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Inverse-CDF draw; weights need not be normalized but must be nonnegative.
  std::size_t Categorical(std::span<const double> weights);

  std::size_t UniformIndex(std::size_t n);

  // Box-Muller; consumes two uniforms per call.
  double Normal();

  uint64_t NextU64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent-looking seed for a sub-stream (splitmix64 finalizer).
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

}  // namespace smm

#endif  // SMM_RANDOM_H_
