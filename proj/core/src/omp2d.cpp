#include "sceif/omp2d.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "sceif/container.hpp"
#include "sceif/metrics.hpp"

namespace sceif {

namespace {

Eigen::VectorXd vec_outer(const Dictionary1D& dx, const Dictionary1D& dy, AtomIndexPair pair) {
  const Eigen::MatrixXd a = dx.atom(pair.lx - 1) * dy.atom(pair.ly - 1).transpose();
  return Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
}

}  // namespace

OmpState::OmpState(int side) : side_(side) {
  if (side < 1) throw Error("OmpState: invalid block side");
  const int dim = side * side;
  a_.resize(dim, 0);
  w_.resize(dim, 0);
  b_.resize(dim, 0);
}

bool OmpState::try_extend(AtomIndexPair pair, const Dictionary1D& dx, const Dictionary1D& dy,
                          double tol) {
  if (dx.length() != side_ || dy.length() != side_)
    throw Error("OmpState: dictionary length does not match block side");
  if (pair.lx < 1 || pair.lx > dx.size() || pair.ly < 1 || pair.ly > dy.size())
    throw Error("OmpState: atom index out of range");

  const Eigen::VectorXd av = vec_outer(dx, dy, pair);
  Eigen::VectorXd wv = av;
  // Gram-Schmidt plus exactly one re-orthogonalization pass
  for (int pass = 0; pass < 2; ++pass)
    for (int j = 0; j < k_; ++j)
      wv -= w_.col(j) * (w_.col(j).dot(wv) / w_norm_sq_[static_cast<std::size_t>(j)]);

  const double w_norm = wv.norm();
  if (w_norm <= tol * av.norm()) return false;

  a_.conservativeResize(Eigen::NoChange, k_ + 1);
  w_.conservativeResize(Eigen::NoChange, k_ + 1);
  b_.conservativeResize(Eigen::NoChange, k_ + 1);
  a_.col(k_) = av;
  w_.col(k_) = wv;
  b_.col(k_) = wv / (w_norm * w_norm);
  w_norm_sq_.push_back(w_norm * w_norm);
  // dual recursion: B_n <- B_n - B_{k+1} <A_{k+1}, B_n>
  for (int n = 0; n < k_; ++n) b_.col(n) -= b_.col(k_) * av.dot(b_.col(n));
  selected_.push_back(pair);
  ++k_;
  return true;
}

void OmpState::extend(AtomIndexPair pair, const Dictionary1D& dx, const Dictionary1D& dy,
                      double tol) {
  if (!try_extend(pair, dx, dy, tol))
    throw Error("extend_state: dependent atom (" + std::to_string(pair.lx) + "," +
                std::to_string(pair.ly) + ")");
}

Eigen::MatrixXd OmpState::project(const Eigen::MatrixXd& x) const {
  if (x.rows() != side_ || x.cols() != side_) throw Error("project: dimension mismatch");
  if (k_ == 0) return Eigen::MatrixXd::Zero(side_, side_);
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
  const Eigen::VectorXd proj = a_ * (b_.transpose() * xv);
  return Eigen::Map<const Eigen::MatrixXd>(proj.data(), side_, side_);
}

std::vector<double> OmpState::coefficients(const Eigen::MatrixXd& channel) const {
  if (channel.rows() != side_ || channel.cols() != side_)
    throw Error("coefficients: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> xv(channel.data(), channel.size());
  const Eigen::VectorXd c = b_.transpose() * xv;
  return std::vector<double>(c.data(), c.data() + c.size());
}

std::optional<AtomIndexPair> select_atom(const std::vector<Eigen::MatrixXd>& residuals,
                                         const Dictionary1D& dx, const Dictionary1D& dy,
                                         const std::vector<std::uint8_t>& blocked) {
  if (residuals.empty()) throw Error("select_atom: no residual channels");
  const int mx = dx.size();
  const int my = dy.size();
  if (blocked.size() != static_cast<std::size_t>(mx) * my)
    throw Error("select_atom: blocked bitmap size mismatch");

  Eigen::MatrixXd score = Eigen::MatrixXd::Zero(mx, my);
  for (const Eigen::MatrixXd& r : residuals)
    score += (dx.atoms().transpose() * r * dy.atoms()).cwiseAbs();

  double best = 0.0;
  AtomIndexPair best_pair;
  std::size_t flat = 0;
  for (int n = 0; n < mx; ++n)
    for (int m = 0; m < my; ++m, ++flat) {
      if (blocked[flat]) continue;
      if (score(n, m) > best) {
        best = score(n, m);
        best_pair = AtomIndexPair{n + 1, m + 1};
      }
    }
  if (best == 0.0) return std::nullopt;
  return best_pair;
}

BlockApproximation approximate_block(const std::vector<Eigen::MatrixXd>& blocks,
                                     const Dictionary1D& dx, const Dictionary1D& dy,
                                     const OmpConfig& cfg, std::vector<double>* trajectory) {
  const int z_count = static_cast<int>(blocks.size());
  if (z_count < 1) throw Error("approximate_block: no channels");
  const int n = dx.length();
  const int max_k = cfg.max_k > 0 ? std::min(cfg.max_k, n * n) : n * n;

  std::vector<Eigen::MatrixXd> residuals = blocks;
  double res_sq = 0.0;
  for (const auto& r : residuals) res_sq += r.squaredNorm();
  if (trajectory) {
    trajectory->clear();
    trajectory->push_back(res_sq);
  }

  OmpState state(n);
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(dx.size()) * dy.size(), 0);

  while (res_sq >= cfg.rho && state.count() < max_k) {
    const auto pick = select_atom(residuals, dx, dy, blocked);
    if (!pick) break;
    blocked[static_cast<std::size_t>(flatten_index(*pick, dy.size())) - 1] = 1;
    if (!state.try_extend(*pick, dx, dy, cfg.tol_dependent)) continue;

    // orthogonal residual update against the newest Gram-Schmidt direction
    const int k = state.count() - 1;
    const Eigen::VectorXd wk = state.gs_vec().col(k);
    const double w_sq = wk.squaredNorm();
    for (auto& r : residuals) {
      Eigen::Map<Eigen::VectorXd> rv(r.data(), r.size());
      const double proj = wk.dot(rv);
      rv -= wk * (proj / w_sq);
      res_sq = std::max(0.0, res_sq - proj * proj / w_sq);
    }
    if (trajectory) trajectory->push_back(res_sq);
  }

  BlockApproximation out;
  out.block_n = n;
  out.indices = state.selected();
  out.coeffs.reserve(static_cast<std::size_t>(z_count));
  double final_sq = 0.0;
  for (const auto& block : blocks) {
    out.coeffs.push_back(state.coefficients(block));
    final_sq += (block - state.project(block)).squaredNorm();
  }
  out.residual_sq = final_sq;
  return out;
}

double rho_from_psnr(double target_psnr, int bits, int block_n, int channels) {
  const double peak = static_cast<double>((1u << bits) - 1u);
  return channels * block_n * block_n * peak * peak * std::pow(10.0, -target_psnr / 10.0);
}

OmpState rebuild_state(const std::vector<AtomIndexPair>& indices, const Dictionary1D& dx,
                       const Dictionary1D& dy, double tol, bool lenient) {
  OmpState state(dx.length());
  for (const AtomIndexPair& pair : indices) {
    if (!state.try_extend(pair, dx, dy, tol) && !lenient)
      throw ContainerError("container holds dependent atom indices");
  }
  return state;
}

std::vector<Eigen::MatrixXd> reconstruct_block(const BlockApproximation& approx,
                                               const Dictionary1D& dx, const Dictionary1D& dy) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(approx.coeffs.size());
  for (const auto& channel_coeffs : approx.coeffs) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(approx.block_n, approx.block_n);
    for (std::size_t i = 0; i < approx.indices.size(); ++i) {
      const AtomIndexPair p = approx.indices[i];
      acc.noalias() +=
          channel_coeffs[i] * dx.atom(p.lx - 1) * dy.atom(p.ly - 1).transpose();
    }
    out.push_back(std::move(acc));
  }
  return out;
}

namespace {

struct TiledImage {
  std::vector<std::vector<Eigen::MatrixXd>> blocks;  // [channel][block]
  std::size_t block_count = 0;
};

TiledImage tile_channels(const Image& img, int block_n) {
  TiledImage t;
  for (const auto& plane : img.channels) t.blocks.push_back(tile_plane(plane, block_n));
  t.block_count = t.blocks.empty() ? 0 : t.blocks[0].size();
  return t;
}

void run_blocks(std::size_t count, int threads, const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || count < 2) {
    for (std::size_t q = 0; q < count; ++q) work(q);
    return;
  }
  const int used = std::min<int>(threads, static_cast<int>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(used));
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < used; ++t)
    pool.emplace_back([&] {
      for (std::size_t q = next.fetch_add(1); q < count; q = next.fetch_add(1)) work(q);
    });
  for (auto& th : pool) th.join();
}

Image assemble_approximation(const Image& src, const std::vector<BlockApproximation>& blocks,
                             const Dictionary1D& dict) {
  const int n = dict.length();
  Image out(static_cast<int>(src.rows()), static_cast<int>(src.cols()), src.channel_count(),
            src.bits);
  for (int z = 0; z < src.channel_count(); ++z) {
    std::vector<Eigen::MatrixXd> planes;
    planes.reserve(blocks.size());
    for (const auto& b : blocks) {
      std::vector<Eigen::MatrixXd> rec = reconstruct_block(b, dict, dict);
      planes.push_back(std::move(rec[static_cast<std::size_t>(z)]));
    }
    out.channels[static_cast<std::size_t>(z)] =
        assemble_plane(planes, static_cast<int>(src.rows()), static_cast<int>(src.cols()), n);
  }
  return out;
}

}  // namespace

ImageApproximation approximate_image(const Image& img, const Dictionary1D& dict,
                                     const OmpConfig& cfg, int threads) {
  if (img.channel_count() != 1 && img.channel_count() != 3)
    throw Error("approximate_image: channel count must be 1 or 3");
  const int n = dict.length();
  TiledImage tiled = tile_channels(img, n);

  ImageApproximation out;
  out.blocks.resize(tiled.block_count);
  run_blocks(tiled.block_count, threads, [&](std::size_t q) {
    std::vector<Eigen::MatrixXd> channels;
    channels.reserve(tiled.blocks.size());
    for (const auto& plane_blocks : tiled.blocks) channels.push_back(plane_blocks[q]);
    out.blocks[q] = approximate_block(channels, dict, dict, cfg);
  });

  for (const auto& b : out.blocks)
    out.total_coeffs += static_cast<std::uint64_t>(b.indices.size()) * img.channel_count();
  out.approximation = assemble_approximation(img, out.blocks, dict);
  out.achieved_psnr = psnr(img, out.approximation, img.bits);
  return out;
}

namespace {

// Greedy selections do not depend on rho, so one deep pass plus the recorded
// residual trajectories give the exact prefix lengths for any threshold.
struct Trajectories {
  std::vector<BlockApproximation> deep;
  std::vector<std::vector<double>> res_sq;  // [block][k]
};

double psnr_at_rho(const Trajectories& t, double rho, double denom_scaled,
                   std::vector<int>* k_out) {
  double total_sq = 0.0;
  for (std::size_t q = 0; q < t.res_sq.size(); ++q) {
    const auto& traj = t.res_sq[q];
    std::size_t k = 0;
    while (traj[k] >= rho && k + 1 < traj.size()) ++k;
    if (k_out) (*k_out)[q] = static_cast<int>(k);
    total_sq += traj[k];
  }
  if (total_sq <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(denom_scaled / total_sq);
}

}  // namespace

ImageApproximation approximate_image_at_psnr(const Image& img, const Dictionary1D& dict,
                                             double target_psnr, double band, int threads) {
  const int n = dict.length();
  const int z_count = img.channel_count();
  TiledImage tiled = tile_channels(img, n);

  // deep pass: half a dB past the top of the band so every prefix is recorded
  OmpConfig deep_cfg;
  deep_cfg.rho = rho_from_psnr(target_psnr + band + 0.5, img.bits, n, z_count);
  Trajectories traj;
  traj.deep.resize(tiled.block_count);
  traj.res_sq.resize(tiled.block_count);
  run_blocks(tiled.block_count, threads, [&](std::size_t q) {
    std::vector<Eigen::MatrixXd> channels;
    channels.reserve(tiled.blocks.size());
    for (const auto& plane_blocks : tiled.blocks) channels.push_back(plane_blocks[q]);
    traj.deep[q] = approximate_block(channels, dict, dict, deep_cfg, &traj.res_sq[q]);
  });

  // peak^2 * total sample count: PSNR = 10 log10(denom / sum of squared residuals)
  const double peak = img.peak();
  const double denom_scaled = peak * peak * static_cast<double>(z_count) *
                              static_cast<double>(img.rows()) * static_cast<double>(img.cols());

  // rho_lo stays feasible (psnr >= target), rho_hi infeasible; the sparsest
  // feasible threshold is approached from both sides
  std::vector<int> k_per_block(tiled.block_count, 0);
  double rho_lo = deep_cfg.rho;
  double rho_hi = rho_from_psnr(0.0, img.bits, n, z_count);
  if (psnr_at_rho(traj, rho_lo, denom_scaled, nullptr) >= target_psnr) {
    for (int it = 0; it < 60; ++it) {
      const double rho_mid = 0.5 * (rho_lo + rho_hi);
      if (psnr_at_rho(traj, rho_mid, denom_scaled, nullptr) >= target_psnr)
        rho_lo = rho_mid;
      else
        rho_hi = rho_mid;
    }
  }

  ImageApproximation out;
  const double landed = psnr_at_rho(traj, rho_lo, denom_scaled, &k_per_block);
  out.band_missed = !(landed >= target_psnr && landed <= target_psnr + band);

  out.blocks.resize(tiled.block_count);
  run_blocks(tiled.block_count, threads, [&](std::size_t q) {
    const int k = k_per_block[q];
    BlockApproximation truncated;
    truncated.block_n = n;
    truncated.indices.assign(traj.deep[q].indices.begin(), traj.deep[q].indices.begin() + k);
    const OmpState state = rebuild_state(truncated.indices, dict, dict);
    double final_sq = 0.0;
    for (const auto& plane_blocks : tiled.blocks) {
      truncated.coeffs.push_back(state.coefficients(plane_blocks[q]));
      final_sq += (plane_blocks[q] - state.project(plane_blocks[q])).squaredNorm();
    }
    truncated.residual_sq = final_sq;
    out.blocks[q] = std::move(truncated);
  });

  for (const auto& b : out.blocks)
    out.total_coeffs += static_cast<std::uint64_t>(b.indices.size()) * z_count;
  out.approximation = assemble_approximation(img, out.blocks, dict);
  out.achieved_psnr = psnr(img, out.approximation, img.bits);
  return out;
}

}  // namespace sceif
