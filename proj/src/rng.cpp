#include "coltkf/rng.hpp"

#include <cmath>

namespace coltkf {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Stafford's Mix13 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Gamma derivation as in SplittableRandom: a mixed odd increment with enough
// bit transitions to keep the Weyl sequence well conditioned.
std::uint64_t mix_gamma(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
  z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ULL;
  z = (z ^ (z >> 33)) | 1ULL;
  int transitions = __builtin_popcountll(z ^ (z >> 1));
  return (transitions < 24) ? z ^ 0xAAAAAAAAAAAAAAAAULL : z;
}

}  // namespace

Rng::Rng(RngHandle handle)
    : state_(mix64(handle.seed ^ 0x43F6A8885A308D31ULL)),
      gamma_(mix_gamma(handle.stream * kGolden + 0x452821E638D01377ULL)) {}

std::uint64_t Rng::next_u64() {
  state_ += gamma_;
  return mix64(state_);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace coltkf
