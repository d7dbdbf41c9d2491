#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "sceif/dictionary.hpp"
#include "sceif/image.hpp"

namespace sceif {

// Relative Gram-Schmidt dependence threshold. Fold and unfold must agree on
// it, so it is a protocol constant rather than a tunable.
inline constexpr double kDependenceTol = 1e-10;

struct OmpConfig {
  double rho = 0.0;                      // stop when sum_z ||R_z||_F^2 < rho
  int max_k = 0;                         // 0 means block_n^2
  double tol_dependent = kDependenceTol;
};

// Selected-atom state of one block: the rank-one 2D atoms A_n, their
// Gram-Schmidt orthogonalization W_n and the dual (biorthogonal) matrices
// B_n with <A_n, B_m>_F = delta_nm. Everything is stored vectorized
// (side^2-row columns) and is rebuildable from the index list alone, which
// is what recovery does.
class OmpState {
 public:
  explicit OmpState(int side);

  int side() const { return side_; }
  int count() const { return k_; }
  const std::vector<AtomIndexPair>& selected() const { return selected_; }

  // Appends the atom pair: Gram-Schmidt against W_1..W_k plus one
  // re-orthogonalization pass, dual update by the rank-one recursion.
  // Returns false (state untouched) when the atom is numerically dependent
  // on the current span.
  bool try_extend(AtomIndexPair pair, const Dictionary1D& dx, const Dictionary1D& dy,
                  double tol = kDependenceTol);
  // Throwing variant of try_extend.
  void extend(AtomIndexPair pair, const Dictionary1D& dx, const Dictionary1D& dy,
              double tol = kDependenceTol);

  // Orthogonal projection onto the span of the selected atoms (zero for k=0).
  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;

  // c_n = <B_n, channel>_F for n = 1..k; the least-squares coefficients.
  std::vector<double> coefficients(const Eigen::MatrixXd& channel) const;

  const Eigen::MatrixXd& atoms_vec() const { return a_; }
  const Eigen::MatrixXd& gs_vec() const { return w_; }
  const Eigen::MatrixXd& duals_vec() const { return b_; }

 private:
  int side_;
  int k_ = 0;
  Eigen::MatrixXd a_, w_, b_;  // side^2 x k
  std::vector<double> w_norm_sq_;
  std::vector<AtomIndexPair> selected_;
};

// Argmax over unblocked (n, m) of sum_z |Dx_n^T R_z Dy_m|, computed
// separably; ties resolved toward the smallest flat label. Returns nullopt
// when every admissible score is zero. `blocked` is a flat bitmap indexed
// by flatten_index(pair, my) - 1.
std::optional<AtomIndexPair> select_atom(const std::vector<Eigen::MatrixXd>& residuals,
                                         const Dictionary1D& dx, const Dictionary1D& dy,
                                         const std::vector<std::uint8_t>& blocked);

struct BlockApproximation {
  std::vector<AtomIndexPair> indices;        // selection order, shared by channels
  std::vector<std::vector<double>> coeffs;   // [channel][atom]
  int block_n = 0;
  double residual_sq = 0.0;                  // final sum_z ||R_z||_F^2
};

// Full OMP2D loop on one block: select / extend / update residual until the
// rho criterion, the atom cap, or atom exhaustion. Dependent selections are
// blocked and reselected. Coefficients are recomputed from the final duals.
BlockApproximation approximate_block(const std::vector<Eigen::MatrixXd>& blocks,
                                     const Dictionary1D& dx, const Dictionary1D& dy,
                                     const OmpConfig& cfg,
                                     std::vector<double>* trajectory = nullptr);

// Per-block squared-residual budget equivalent to a global PSNR target.
double rho_from_psnr(double target_psnr, int bits, int block_n, int channels);

// Replays extends for a stored index list in order, reproducing the original
// state bit for bit. lenient: skip pairs failing the dependence check (wrong
// keys decode garbage indices) instead of throwing.
OmpState rebuild_state(const std::vector<AtomIndexPair>& indices, const Dictionary1D& dx,
                       const Dictionary1D& dy, double tol = kDependenceTol,
                       bool lenient = false);

// Per-channel reconstruction sum_n c_n A_n of one block.
std::vector<Eigen::MatrixXd> reconstruct_block(const BlockApproximation& approx,
                                               const Dictionary1D& dx, const Dictionary1D& dy);

struct ImageApproximation {
  std::vector<BlockApproximation> blocks;  // raster order over the padded grid
  Image approximation;                     // assembled, cropped to source dims
  std::uint64_t total_coeffs = 0;          // channel count times sum of K_q
  double achieved_psnr = 0.0;              // against the source image
  bool band_missed = false;                // only set by the calibrated variant
};

// Blockwise approximation of a whole image; block geometry comes from the
// dictionary length. Blocks are independent, `threads` only partitions them.
ImageApproximation approximate_image(const Image& img, const Dictionary1D& dict,
                                     const OmpConfig& cfg, int threads = 1);

// Fixed-quality methodology: runs the greedy pass once past the target and
// picks the stop threshold whose achieved PSNR lands in
// [target, target + band] (or the closest achievable point above target).
ImageApproximation approximate_image_at_psnr(const Image& img, const Dictionary1D& dict,
                                             double target_psnr, double band = 0.2,
                                             int threads = 1);

}  // namespace sceif
