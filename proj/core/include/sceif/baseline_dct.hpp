#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "sceif/image.hpp"

namespace sceif {

// Orthonormal 2D DCT-II of a square block and its inverse.
Eigen::MatrixXd dct2_block(const Eigen::MatrixXd& block);
Eigen::MatrixXd idct2_block(const Eigen::MatrixXd& block);

struct DctApproxResult {
  Image approximation;
  std::uint64_t retained_coeffs = 0;
  double sr = 0.0;
  double psnr = 0.0;
  bool target_unreachable = false;
};

// Blockwise DCT with a global magnitude threshold chosen by bisection so the
// reconstruction PSNR lands in [target, target + 0.2] dB.
DctApproxResult dct_approximate(const Image& img, double target_psnr, int block_n = 8);

}  // namespace sceif
