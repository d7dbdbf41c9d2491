#include "sceif/baseline_dct.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "sceif/container.hpp"
#include "sceif/metrics.hpp"

namespace sceif {

namespace {

Eigen::MatrixXd dct_matrix(int n) {
  Eigen::MatrixXd t(n, n);
  for (int i = 0; i < n; ++i) {
    const double s = i == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int j = 0; j < n; ++j)
      t(i, j) = s * std::cos(std::numbers::pi * (2 * j + 1) * i / (2.0 * n));
  }
  return t;
}

}  // namespace

Eigen::MatrixXd dct2_block(const Eigen::MatrixXd& block) {
  if (block.rows() != block.cols()) throw Error("dct2: block must be square");
  const Eigen::MatrixXd t = dct_matrix(static_cast<int>(block.rows()));
  return t * block * t.transpose();
}

Eigen::MatrixXd idct2_block(const Eigen::MatrixXd& block) {
  if (block.rows() != block.cols()) throw Error("idct2: block must be square");
  const Eigen::MatrixXd t = dct_matrix(static_cast<int>(block.rows()));
  return t.transpose() * block * t;
}

namespace {

struct DctPlanes {
  // per channel, per block: DCT coefficients
  std::vector<std::vector<Eigen::MatrixXd>> coeffs;
  double max_abs = 0.0;
};

// reconstruction keeping only |coeff| >= threshold; returns retained count
std::uint64_t reconstruct(const DctPlanes& planes, const Eigen::MatrixXd& t, double threshold,
                          const Image& src, Image& out) {
  const int n = static_cast<int>(t.rows());
  std::uint64_t retained = 0;
  for (std::size_t z = 0; z < planes.coeffs.size(); ++z) {
    std::vector<Eigen::MatrixXd> rec;
    rec.reserve(planes.coeffs[z].size());
    for (const auto& c : planes.coeffs[z]) {
      Eigen::MatrixXd kept =
          (c.cwiseAbs().array() >= threshold).select(c, Eigen::MatrixXd::Zero(n, n));
      retained += static_cast<std::uint64_t>((c.cwiseAbs().array() >= threshold).count());
      rec.push_back(t.transpose() * kept * t);
    }
    out.channels[z] =
        assemble_plane(rec, static_cast<int>(src.rows()), static_cast<int>(src.cols()), n);
  }
  return retained;
}

}  // namespace

DctApproxResult dct_approximate(const Image& img, double target_psnr, int block_n) {
  if (img.channel_count() != 1 && img.channel_count() != 3)
    throw Error("dct_approximate: channel count must be 1 or 3");
  const Eigen::MatrixXd t = dct_matrix(block_n);

  DctPlanes planes;
  planes.coeffs.resize(static_cast<std::size_t>(img.channel_count()));
  for (int z = 0; z < img.channel_count(); ++z) {
    for (const auto& block : tile_plane(img.channels[static_cast<std::size_t>(z)], block_n)) {
      Eigen::MatrixXd c = t * block * t.transpose();
      planes.max_abs = std::max(planes.max_abs, c.cwiseAbs().maxCoeff());
      planes.coeffs[static_cast<std::size_t>(z)].push_back(std::move(c));
    }
  }

  DctApproxResult result;
  result.approximation = Image(static_cast<int>(img.rows()), static_cast<int>(img.cols()),
                               img.channel_count(), img.bits);

  // psnr(threshold) is non-increasing; keep lo feasible (psnr >= target)
  double lo = 0.0;
  double hi = planes.max_abs + 1.0;
  Image trial = result.approximation;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    reconstruct(planes, t, mid, img, trial);
    const double p = psnr(img, trial, img.bits);
    if (p >= target_psnr)
      lo = mid;
    else
      hi = mid;
  }

  result.retained_coeffs = reconstruct(planes, t, lo, img, result.approximation);
  result.psnr = psnr(img, result.approximation, img.bits);
  if (result.psnr < target_psnr) {
    // even the all-retained reconstruction stays short of the target
    result.retained_coeffs = reconstruct(planes, t, 0.0, img, result.approximation);
    result.psnr = psnr(img, result.approximation, img.bits);
    result.target_unreachable = result.psnr < target_psnr;
  }
  const std::uint64_t pixels = static_cast<std::uint64_t>(img.rows()) *
                               static_cast<std::uint64_t>(img.cols()) *
                               static_cast<std::uint64_t>(img.channel_count());
  result.sr = result.retained_coeffs > 0
                  ? sparsity_ratio(pixels, result.retained_coeffs)
                  : std::numeric_limits<double>::infinity();
  return result;
}

}  // namespace sceif
