#pragma once

#include <cstdint>

namespace coltkf {

// Identifies a reproducible random stream. Equal (seed, stream) pairs always
// produce bitwise-identical draw sequences, and distinct streams are
// statistically independent, so Monte Carlo runs can be keyed by run index.
struct RngHandle {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngHandle substream(std::uint64_t offset) const { return {seed, stream + offset}; }
};

// Counter-based splittable generator in the SplitMix64 family: the state
// advances by a per-stream odd gamma and each output is a strong 64-bit mix
// of the counter. Passes the usual statistical batteries and is cheap enough
// for 1e8+ Gaussian draws.
class Rng {
public:
  explicit Rng(RngHandle handle);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double gaussian();

private:
  std::uint64_t state_;
  std::uint64_t gamma_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace coltkf
