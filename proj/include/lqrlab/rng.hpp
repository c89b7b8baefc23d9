#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "lqrlab/types.hpp"

namespace lqrlab {

// Substream contexts. The numeric values are part of the reproducibility
// contract: changing one silently changes every draw made under it.
enum class StreamContext : std::uint32_t {
  kRollout = 0,       // trajectory noise (action and state innovations)
  kInitState = 1,     // initial-state draws for estimation / training
  kEvalState = 2,     // fixed evaluation initial-state sets
  kPerturbation = 3,  // gain-perturbation directions
  kProblemGen = 4,    // random problem instances
  kPrototype = 5,     // eigenvalue prototypes
  kPlacement = 6,     // randomized input directions for pole placement
};

// Key selecting one independent random substream. Equal keys always
// reproduce the identical draw sequence; there is no shared generator state,
// so streams may be consumed in any order and from any thread.
struct RngKey {
  std::uint64_t seed = 0;
  StreamContext context = StreamContext::kRollout;
  std::uint64_t s1_index = 0;
  std::uint64_t trajectory_index = 0;

  RngKey with_trajectory(std::uint64_t t) const {
    RngKey k = *this;
    k.trajectory_index = t;
    return k;
  }
  RngKey with_s1(std::uint64_t s) const {
    RngKey k = *this;
    k.s1_index = s;
    return k;
  }
};

// Stretches (base, salt) into a fresh 64-bit seed; used to give sub-tasks
// (per-problem, per-run) their own top-level seeds deterministically.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

// xoshiro256++ generator seeded from an avalanche hash of an RngKey, with a
// Box-Muller front end for standard normals. Two consecutive uniform words
// produce two normals; the second is cached, so interleaving next() and
// next_uniform() calls is well-defined but flushes the cache.
class NormalStream {
 public:
  explicit NormalStream(const RngKey& key);

  // Uniform on [0, 1), 53-bit mantissa.
  double next_uniform();

  // One standard normal draw.
  double next();

  // k iid standard normals as a column vector.
  Vec next_vector(Eigen::Index k);

  // Fills the matrix with iid standard normals in row-major order. The fill
  // order is part of the reproducibility contract.
  void fill(Eigen::Ref<Mat> out);

 private:
  std::uint64_t next_u64();

  std::array<std::uint64_t, 4> state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace lqrlab
