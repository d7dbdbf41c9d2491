#include "sceif/metrics.hpp"

#include <cmath>
#include <limits>

namespace sceif {

namespace {

void check_dims(const Image& a, const Image& b) {
  if (a.channel_count() != b.channel_count() || a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("metric: image dimensions differ");
  if (a.channel_count() == 0) throw Error("metric: empty image");
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

const Eigen::Matrix<double, kWindow, 1>& gaussian_kernel() {
  static const auto kernel = [] {
    Eigen::Matrix<double, kWindow, 1> w;
    for (int i = 0; i < kWindow; ++i) {
      const double x = i - kWindow / 2;
      w(i) = std::exp(-x * x / (2.0 * kSigma * kSigma));
    }
    w /= w.sum();
    return w;
  }();
  return kernel;
}

// separable valid-mode Gaussian filtering; output is (r-10) x (c-10)
Eigen::MatrixXd filter_valid(const Eigen::MatrixXd& img) {
  const auto& k = gaussian_kernel();
  const Eigen::Index r = img.rows();
  const Eigen::Index c = img.cols();
  Eigen::MatrixXd tmp(r, c - kWindow + 1);
  for (Eigen::Index j = 0; j < tmp.cols(); ++j)
    tmp.col(j) = img.middleCols(j, kWindow) * k;
  Eigen::MatrixXd out(r - kWindow + 1, tmp.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    out.row(i) = k.transpose() * tmp.middleRows(i, kWindow);
  return out;
}

double ssim_plane(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double peak) {
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  const Eigen::MatrixXd mu1 = filter_valid(a);
  const Eigen::MatrixXd mu2 = filter_valid(b);
  const Eigen::MatrixXd v11 = filter_valid(a.cwiseProduct(a)) - mu1.cwiseProduct(mu1);
  const Eigen::MatrixXd v22 = filter_valid(b.cwiseProduct(b)) - mu2.cwiseProduct(mu2);
  const Eigen::MatrixXd v12 = filter_valid(a.cwiseProduct(b)) - mu1.cwiseProduct(mu2);

  const Eigen::ArrayXXd num =
      (2.0 * mu1.cwiseProduct(mu2).array() + c1) * (2.0 * v12.array() + c2);
  const Eigen::ArrayXXd den =
      (mu1.cwiseProduct(mu1).array() + mu2.cwiseProduct(mu2).array() + c1) *
      (v11.array() + v22.array() + c2);
  return (num / den).mean();
}

}  // namespace

double mse(const Image& a, const Image& b) {
  check_dims(a, b);
  double sum = 0.0;
  for (int z = 0; z < a.channel_count(); ++z)
    sum += (a.channels[static_cast<std::size_t>(z)] - b.channels[static_cast<std::size_t>(z)])
               .squaredNorm();
  return sum / (static_cast<double>(a.channel_count()) * a.rows() * a.cols());
}

double psnr(const Image& a, const Image& b, int bits) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = static_cast<double>((1u << bits) - 1u);
  return 10.0 * std::log10(peak * peak / m);
}

double mssim(const Image& a, const Image& b, int bits) {
  check_dims(a, b);
  if (a.rows() < kWindow || a.cols() < kWindow)
    throw Error("mssim: image smaller than the 11x11 window");
  const double peak = static_cast<double>((1u << bits) - 1u);
  double sum = 0.0;
  for (int z = 0; z < a.channel_count(); ++z)
    sum += ssim_plane(a.channels[static_cast<std::size_t>(z)],
                      b.channels[static_cast<std::size_t>(z)], peak);
  return sum / a.channel_count();
}

double sparsity_ratio(std::uint64_t total_pixels, std::uint64_t total_coeffs) {
  if (total_coeffs == 0) throw Error("sparsity ratio undefined for zero coefficients");
  return static_cast<double>(total_pixels) / static_cast<double>(total_coeffs);
}

}  // namespace sceif
