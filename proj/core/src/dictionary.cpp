#include "sceif/dictionary.hpp"

#include <cmath>
#include <numbers>

namespace sceif {

Dictionary1D::Dictionary1D(Eigen::MatrixXd atoms, std::vector<int> sub_offsets)
    : atoms_(std::move(atoms)), sub_offsets_(std::move(sub_offsets)) {}

Dictionary1D build_rdc(int n, int redundancy) {
  if (n < 1) throw Error("rdc: invalid dimension");
  if (redundancy < 1) throw Error("rdc: redundancy must be positive");
  const int m = redundancy * n;
  Eigen::MatrixXd atoms(n, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j)
      atoms(j, i) = std::cos(std::numbers::pi * (2 * (j + 1) - 1) * i / (2.0 * m));
    atoms.col(i) /= atoms.col(i).norm();
  }
  return Dictionary1D(std::move(atoms), {0});
}

Dictionary1D build_dirac(int n) {
  if (n < 1) throw Error("dirac: invalid dimension");
  return Dictionary1D(Eigen::MatrixXd::Identity(n, n), {0});
}

namespace {

// Prototype taps of the discrete cubic B-spline, centered: support 3 comes
// from sampling at the interior integer knots, support 7 from the dilation
// by 2 sampled at integers.
std::vector<double> bspline_taps(int support) {
  if (support == 3) return {1.0, 4.0, 1.0};
  if (support == 7) return {1.0, 8.0, 23.0, 32.0, 23.0, 8.0, 1.0};
  throw Error("bspline: unsupported support (expected 3 or 7)");
}

}  // namespace

Dictionary1D build_bspline(int n, int support) {
  if (n < 1) throw Error("bspline: invalid dimension");
  const std::vector<double> taps = bspline_taps(support);
  const int half = support / 2;
  Eigen::MatrixXd atoms = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < support; ++t) {
      const int j = i + t - half;
      if (j >= 0 && j < n) atoms(j, i) = taps[static_cast<std::size_t>(t)];
    }
    atoms.col(i) /= atoms.col(i).norm();
  }
  return Dictionary1D(std::move(atoms), {0});
}

Dictionary1D build_mixed(int n) {
  if (n < 7) throw Error("mixed dictionary requires n >= 7");
  const Dictionary1D rdc = build_rdc(n, 2);
  const Dictionary1D dirac = build_dirac(n);
  const Dictionary1D sp3 = build_bspline(n, 3);
  const Dictionary1D sp7 = build_bspline(n, 7);

  Eigen::MatrixXd atoms(n, 5 * n);
  atoms << rdc.atoms(), dirac.atoms(), sp3.atoms(), sp7.atoms();
  return Dictionary1D(std::move(atoms), {0, 2 * n, 3 * n, 4 * n});
}

long flatten_index(AtomIndexPair pair, int my) {
  if (pair.lx < 1 || pair.ly < 1 || pair.ly > my)
    throw Error("flatten_index: pair out of range");
  return static_cast<long>(pair.lx - 1) * my + pair.ly;
}

AtomIndexPair unflatten_index(long flat, int mx, int my) {
  if (flat < 1 || flat > static_cast<long>(mx) * my)
    throw Error("unflatten_index: label out of range");
  const long z = flat - 1;
  return AtomIndexPair{static_cast<int>(z / my) + 1, static_cast<int>(z % my) + 1};
}

}  // namespace sceif
