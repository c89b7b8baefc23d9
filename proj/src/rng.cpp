#include "lqrlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace lqrlab {

namespace {

// splitmix64 finalizer (Vigna). Full-avalanche 64-bit mixer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Absorbs one 64-bit field into a running hash state.
std::uint64_t absorb(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return absorb(absorb(0x6C71D3A5E0F8B249ULL, base), salt);
}

NormalStream::NormalStream(const RngKey& key) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;  // arbitrary fixed IV
  h = absorb(h, key.seed);
  h = absorb(h, static_cast<std::uint64_t>(key.context));
  h = absorb(h, key.s1_index);
  h = absorb(h, key.trajectory_index);
  // Expand the digest into the xoshiro state with a splitmix64 sequence.
  for (auto& word : state_) {
    h += 0x9E3779B97F4A7C15ULL;
    word = mix64(h);
  }
  if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
    state_[0] = 1;  // all-zero state is the one forbidden xoshiro state
  }
}

std::uint64_t NormalStream::next_u64() {
  // xoshiro256++ (Blackman & Vigna).
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double NormalStream::next_uniform() {
  has_cached_ = false;  // keep the draw sequence a pure function of call order
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Box-Muller on (0,1] x [0,1) so the log argument never vanishes.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

Vec NormalStream::next_vector(Eigen::Index k) {
  Vec v(k);
  for (Eigen::Index i = 0; i < k; ++i) v(i) = next();
  return v;
}

void NormalStream::fill(Eigen::Ref<Mat> out) {
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = next();
  }
}

}  // namespace lqrlab
