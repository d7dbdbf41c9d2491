#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sceif/container.hpp"
#include "sceif/dictionary.hpp"
#include "sceif/image.hpp"
#include "sceif/keystream.hpp"
#include "sceif/omp2d.hpp"

namespace sceif {

// Atom count of the mixed dictionary for block side n.
inline int mixed_atom_count(int n) { return 5 * n; }

struct FoldPlan {
  int q_total = 0;  // Q
  int hosts = 0;    // H, first blocks in raster order
  int adhoc = 0;    // H~
  int block_n = 0;
  int adhoc_n = 0;
  std::vector<int> k_per_block;
  // K_q followed by the flat labels in selection order, for every block
  std::vector<long> index_stream;
  // concatenated non-host coefficients per channel, raster block order
  std::vector<std::vector<double>> payload;
};

// Chooses the minimal host count H whose free null-space capacity covers the
// non-host coefficients, and lays out the index stream and payload streams.
FoldPlan plan_fold(const std::vector<BlockApproximation>& approxs, int block_n, int adhoc_n);

// The all-entries-equal unit-norm anchor atom.
Eigen::MatrixXd constant_atom(int n);

// Draws `count` random matrices from the public seed stream, projects them
// onto the orthogonal complement of the state's span, mixes them with the
// keyed transform and orthonormalizes. Both sides of the codec replay this
// with identical stream positions.
std::vector<Eigen::MatrixXd> build_nullspace_basis(const OmpState& state,
                                                   RandomStream& seed_stream,
                                                   RandomStream& key_stream, int count);

// G = I^K + sum_i payload[i] U_i; unused basis directions carry zero.
Eigen::MatrixXd embed_host(const Eigen::MatrixXd& approx_block, std::span<const double> payload,
                           const std::vector<Eigen::MatrixXd>& basis);

struct HostExtract {
  Eigen::MatrixXd approx;        // P(G), the plain-text block
  std::vector<double> payload;   // <U_i, G - P(G)> for every basis element
};
HostExtract extract_host(const Eigen::MatrixXd& host_block, const OmpState& state,
                         const std::vector<Eigen::MatrixXd>& basis);

// Ad-hoc block: anchor amplitude carries the used-slot count, integer values
// ride the keyed orthonormal basis of the anchor's complement.
Eigen::MatrixXd build_adhoc_block(std::span<const long> values, RandomStream& seed_stream,
                                  RandomStream& key_stream, int adhoc_n);

struct AdhocExtract {
  int count = 0;
  std::vector<long> values;
};
AdhocExtract extract_adhoc(const Eigen::MatrixXd& block, RandomStream& seed_stream,
                           RandomStream& key_stream, int adhoc_n);

struct FoldResult {
  FoldedContainer container;
  Image approximation;  // the plain-text approximation I^K
  FoldPlan plan;
  std::uint64_t total_coeffs = 0;
};

// approximate + plan + embed; deterministic in (image, key, cfg).
FoldResult fold(const Image& image, const KeyMaterial& key, const OmpConfig& cfg,
                int block_n = 8, int threads = 1);

// Folding of an existing blockwise approximation (keeps the approximation
// phase out of fold timings).
FoldResult fold_approximation(const ImageApproximation& approx, const KeyMaterial& key,
                              int block_n = 8);

struct UnfoldResult {
  Image image;
  // decoded integers fell outside their valid ranges somewhere; a wrong key
  // is the usual cause. Recovery still completes (garbled output).
  bool suspect = false;
};

// Replays the streams (ad-hoc blocks first, then hosts) and reassembles the
// plain-text approximation. A wrong key is not detectable as an error.
UnfoldResult unfold(const FoldedContainer& container, std::uint64_t private_key);

}  // namespace sceif
