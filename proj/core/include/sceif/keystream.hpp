#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sceif/image.hpp"

namespace sceif {

// Deterministic SplitMix64 stream. A fixed (seed, draw sequence) yields the
// same outputs on every platform; fold and unfold rely on replaying streams
// draw for draw.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    ++counter_;
    return z ^ (z >> 31);
  }

  // uniform in [-1, 1), from the top 53 bits
  double uniform() {
    return 2.0 * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53) - 1.0;
  }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t state_;
  std::uint64_t counter_ = 0;
};

struct KeyMaterial {
  std::uint64_t private_key = 0;  // never serialized
  std::uint32_t public_seed = 0;  // travels in the container header
};

// n x n matrix filled row-major with consecutive uniform draws.
Eigen::MatrixXd random_matrix(RandomStream& stream, int n);

// Keyed span-preserving mixing: 2L plane rotations on random pairs of list
// entries, angles and pair choices drawn from the key stream. A single-entry
// list is returned unchanged (no valid pair exists).
void pi_key_transform(RandomStream& key_stream, std::vector<Eigen::MatrixXd>& mats);

// In-place modified Gram-Schmidt (Frobenius inner products) with one
// re-orthogonalization pass, in list order. Throws when an entry collapses
// below tol times its original norm.
void orthonormalize(std::vector<Eigen::MatrixXd>& mats, double tol = 1e-10);

}  // namespace sceif
