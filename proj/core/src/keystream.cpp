#include "sceif/keystream.hpp"

#include <cmath>
#include <numbers>

namespace sceif {

Eigen::MatrixXd random_matrix(RandomStream& stream, int n) {
  if (n < 1) throw Error("random_matrix: invalid dimension");
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = stream.uniform();
  return m;
}

namespace {

std::size_t draw_index(RandomStream& stream, std::size_t count) {
  const double u01 = 0.5 * (stream.uniform() + 1.0);
  auto i = static_cast<std::size_t>(u01 * static_cast<double>(count));
  return i < count ? i : count - 1;
}

}  // namespace

void pi_key_transform(RandomStream& key_stream, std::vector<Eigen::MatrixXd>& mats) {
  const std::size_t count = mats.size();
  if (count == 0) throw Error("pi_key_transform: empty matrix list");
  if (count == 1) return;

  for (std::size_t step = 0; step < 2 * count; ++step) {
    const std::size_t a = draw_index(key_stream, count);
    std::size_t b = draw_index(key_stream, count);
    while (b == a) b = draw_index(key_stream, count);
    const double theta = 0.5 * (key_stream.uniform() + 1.0) * 2.0 * std::numbers::pi;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::MatrixXd rotated_a = c * mats[a] + s * mats[b];
    mats[b] = -s * mats[a] + c * mats[b];
    mats[a] = std::move(rotated_a);
  }
}

void orthonormalize(std::vector<Eigen::MatrixXd>& mats, double tol) {
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const double original_norm = mats[i].norm();
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < i; ++j)
        mats[i] -= mats[j].cwiseProduct(mats[i]).sum() * mats[j];
    const double norm = mats[i].norm();
    if (norm <= tol * original_norm)
      throw Error("orthonormalize: degenerate set at position " + std::to_string(i + 1));
    mats[i] /= norm;
  }
}

}  // namespace sceif
