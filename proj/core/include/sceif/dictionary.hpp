#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sceif/image.hpp"

namespace sceif {

// 1-based pair of atom indices into the x and y sub-dictionaries.
struct AtomIndexPair {
  int lx = 0;
  int ly = 0;
  friend bool operator==(const AtomIndexPair&, const AtomIndexPair&) = default;
};

// Bank of unit-norm column atoms of length n. Either a single family or the
// mixed concatenation [RDC redundancy 2 | Dirac | spline-3 | spline-7], whose
// family start offsets are exposed via sub_offsets().
class Dictionary1D {
 public:
  Dictionary1D(Eigen::MatrixXd atoms, std::vector<int> sub_offsets);

  int length() const { return static_cast<int>(atoms_.rows()); }  // n
  int size() const { return static_cast<int>(atoms_.cols()); }    // m
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  // zero-based column accessor
  Eigen::MatrixXd::ConstColXpr atom(int i) const { return atoms_.col(i); }
  const std::vector<int>& sub_offsets() const { return sub_offsets_; }

 private:
  Eigen::MatrixXd atoms_;  // n x m, columns unit norm
  std::vector<int> sub_offsets_;
};

// Redundant discrete cosine family: redundancy*n atoms with entries
// cos(pi*(2j-1)*(i-1)/(2m)), normalized. Redundancy 1 yields the orthonormal
// DCT basis.
Dictionary1D build_rdc(int n, int redundancy = 2);

// Standard basis e_1..e_n.
Dictionary1D build_dirac(int n);

// Translates of the discrete cubic B-spline prototype with 3 or 7 nonzero
// taps, one center per sample, truncated at the borders and renormalized.
Dictionary1D build_bspline(int n, int support);

// [RDC(2) | Dirac | spline-3 | spline-7]; m = 5n, offsets (0, 2n, 3n, 4n).
Dictionary1D build_mixed(int n);

// Maps the ordered pair to the single label (lx-1)*my + ly in 1..mx*my.
long flatten_index(AtomIndexPair pair, int my);
AtomIndexPair unflatten_index(long flat, int mx, int my);

}  // namespace sceif
