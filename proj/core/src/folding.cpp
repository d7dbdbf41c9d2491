#include "sceif/folding.hpp"

#include <algorithm>
#include <cmath>

namespace sceif {

FoldPlan plan_fold(const std::vector<BlockApproximation>& approxs, int block_n, int adhoc_n) {
  const std::size_t q_total = approxs.size();
  if (q_total < 1) throw Error("plan_fold: no blocks");
  if (adhoc_n < 2) throw Error("plan_fold: ad-hoc block side must be at least 2");

  const long cap_per_block = static_cast<long>(block_n) * block_n;
  const std::size_t z_count = approxs[0].coeffs.size();

  FoldPlan plan;
  plan.q_total = static_cast<int>(q_total);
  plan.block_n = block_n;
  plan.adhoc_n = adhoc_n;
  plan.k_per_block.reserve(q_total);
  long total_k = 0;
  for (const auto& a : approxs) {
    if (a.block_n != block_n) throw Error("plan_fold: block size mismatch");
    if (a.coeffs.size() != z_count) throw Error("plan_fold: channel count mismatch");
    plan.k_per_block.push_back(static_cast<int>(a.indices.size()));
    total_k += static_cast<long>(a.indices.size());
  }

  // minimal H with sum_{q<=H} (n^2 - K_q) >= sum_{q>H} K_q; both sides move
  // the right way as H grows, so the first hit is minimal
  long host_free = 0;
  long payload_k = total_k;
  int hosts = -1;
  for (std::size_t h = 0; h < q_total; ++h) {
    if (host_free >= payload_k) {
      hosts = static_cast<int>(h);
      break;
    }
    host_free += cap_per_block - plan.k_per_block[h];
    payload_k -= plan.k_per_block[h];
  }
  if (hosts < 0) throw Error("image not foldable at this quality");
  plan.hosts = hosts;

  const int my = mixed_atom_count(block_n);
  for (std::size_t q = 0; q < q_total; ++q) {
    plan.index_stream.push_back(plan.k_per_block[q]);
    for (const AtomIndexPair& p : approxs[q].indices)
      plan.index_stream.push_back(flatten_index(p, my));
  }

  plan.payload.resize(z_count);
  for (std::size_t q = static_cast<std::size_t>(hosts); q < q_total; ++q)
    for (std::size_t z = 0; z < z_count; ++z)
      plan.payload[z].insert(plan.payload[z].end(), approxs[q].coeffs[z].begin(),
                             approxs[q].coeffs[z].end());

  const long slots = static_cast<long>(adhoc_n) * adhoc_n - 1;
  plan.adhoc = static_cast<int>((static_cast<long>(plan.index_stream.size()) + slots - 1) / slots);
  return plan;
}

Eigen::MatrixXd constant_atom(int n) {
  return Eigen::MatrixXd::Constant(n, n, 1.0 / n);
}

std::vector<Eigen::MatrixXd> build_nullspace_basis(const OmpState& state,
                                                   RandomStream& seed_stream,
                                                   RandomStream& key_stream, int count) {
  const int n = state.side();
  if (count < 1) throw Error("build_nullspace_basis: empty basis requested");
  if (count > n * n - state.count())
    throw Error("build_nullspace_basis: count exceeds the null-space dimension");

  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::MatrixXd y = random_matrix(seed_stream, n);
    mats.push_back(y - state.project(y));
  }
  pi_key_transform(key_stream, mats);
  orthonormalize(mats);
  return mats;
}

Eigen::MatrixXd embed_host(const Eigen::MatrixXd& approx_block, std::span<const double> payload,
                           const std::vector<Eigen::MatrixXd>& basis) {
  if (payload.size() > basis.size()) throw Error("embed_host: payload exceeds basis size");
  Eigen::MatrixXd g = approx_block;
  for (std::size_t i = 0; i < payload.size(); ++i) g += payload[i] * basis[i];
  return g;
}

HostExtract extract_host(const Eigen::MatrixXd& host_block, const OmpState& state,
                         const std::vector<Eigen::MatrixXd>& basis) {
  HostExtract out;
  out.approx = state.project(host_block);
  const Eigen::MatrixXd f = host_block - out.approx;
  out.payload.reserve(basis.size());
  for (const auto& u : basis) out.payload.push_back(u.cwiseProduct(f).sum());
  return out;
}

namespace {

// One keyed orthonormal basis of the anchor's complement; always the full
// slot count so stream positions never depend on block contents.
std::vector<Eigen::MatrixXd> adhoc_basis(RandomStream& seed_stream, RandomStream& key_stream,
                                         int adhoc_n) {
  const Eigen::MatrixXd anchor = constant_atom(adhoc_n);
  const int slots = adhoc_n * adhoc_n - 1;
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(static_cast<std::size_t>(slots));
  for (int i = 0; i < slots; ++i) {
    Eigen::MatrixXd y = random_matrix(seed_stream, adhoc_n);
    mats.push_back(y - anchor * anchor.cwiseProduct(y).sum());
  }
  pi_key_transform(key_stream, mats);
  orthonormalize(mats);
  return mats;
}

}  // namespace

Eigen::MatrixXd build_adhoc_block(std::span<const long> values, RandomStream& seed_stream,
                                  RandomStream& key_stream, int adhoc_n) {
  const int slots = adhoc_n * adhoc_n - 1;
  if (static_cast<long>(values.size()) > slots)
    throw Error("build_adhoc_block: value count exceeds the slot count");
  const std::vector<Eigen::MatrixXd> basis = adhoc_basis(seed_stream, key_stream, adhoc_n);

  Eigen::MatrixXd g = static_cast<double>(values.size()) * constant_atom(adhoc_n);
  for (std::size_t i = 0; i < values.size(); ++i)
    g += static_cast<double>(values[i]) * basis[i];
  return g;
}

AdhocExtract extract_adhoc(const Eigen::MatrixXd& block, RandomStream& seed_stream,
                           RandomStream& key_stream, int adhoc_n) {
  const int slots = adhoc_n * adhoc_n - 1;
  const std::vector<Eigen::MatrixXd> basis = adhoc_basis(seed_stream, key_stream, adhoc_n);

  const Eigen::MatrixXd anchor = constant_atom(adhoc_n);
  const long count = std::lround(anchor.cwiseProduct(block).sum());
  if (count < 0 || count > slots)
    throw ContainerError("extract_adhoc: slot count out of range");

  const Eigen::MatrixXd f = block - static_cast<double>(count) * anchor;
  AdhocExtract out;
  out.count = static_cast<int>(count);
  out.values.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i)
    out.values.push_back(std::lround(basis[static_cast<std::size_t>(i)].cwiseProduct(f).sum()));
  return out;
}

FoldResult fold(const Image& image, const KeyMaterial& key, const OmpConfig& cfg, int block_n,
                int threads) {
  const Dictionary1D dict = build_mixed(block_n);
  ImageApproximation approx = approximate_image(image, dict, cfg, threads);
  return fold_approximation(approx, key, block_n);
}

FoldResult fold_approximation(const ImageApproximation& ia, const KeyMaterial& key, int block_n) {
  const Image& plain = ia.approximation;
  const int z_count = plain.channel_count();
  const int n = block_n;

  FoldPlan plan = plan_fold(ia.blocks, n, n);

  HeaderFields header;
  header.orig_rows = static_cast<std::uint32_t>(plain.rows());
  header.orig_cols = static_cast<std::uint32_t>(plain.cols());
  header.channels = static_cast<std::uint16_t>(z_count);
  header.block_n = static_cast<std::uint16_t>(n);
  header.q_total = static_cast<std::uint32_t>(plan.q_total);
  header.hosts = static_cast<std::uint32_t>(plan.hosts);
  header.adhoc = static_cast<std::uint32_t>(plan.adhoc);
  header.public_seed = key.public_seed;
  header.flags = plain.bits == 16 ? kFlagDeepSource : 0;

  const ContainerGeometry g = container_geometry(header);
  if (g.width < kHeaderWords)
    throw Error("image too narrow to carry the container header");

  const Dictionary1D dict = build_mixed(n);
  RandomStream seed_stream(header.public_seed);
  RandomStream key_stream(key.private_key);

  FoldedContainer container;
  container.header = header;
  container.host_section.assign(static_cast<std::size_t>(z_count),
                                Eigen::MatrixXd::Zero(g.host_rows, g.width));
  container.adhoc_section.assign(static_cast<std::size_t>(z_count),
                                 Eigen::MatrixXd::Zero(g.adhoc_rows, g.width));

  // ad-hoc blocks first: recovery must decode the index stream before it can
  // size the host null spaces
  const long slots = static_cast<long>(n) * n - 1;
  const long stream_len = static_cast<long>(plan.index_stream.size());
  for (int j = 0; j < plan.adhoc; ++j) {
    const long lo = static_cast<long>(j) * slots;
    const long take = std::min(slots, stream_len - lo);
    const Eigen::MatrixXd block = build_adhoc_block(
        std::span<const long>(plan.index_stream).subspan(static_cast<std::size_t>(lo),
                                                         static_cast<std::size_t>(take)),
        seed_stream, key_stream, n);
    const int z = j % z_count;
    const int slot = j / z_count;
    container.adhoc_section[static_cast<std::size_t>(z)].block(
        (slot / g.blocks_per_row) * n, (slot % g.blocks_per_row) * n, n, n) = block;
  }

  std::vector<std::size_t> cursor(static_cast<std::size_t>(z_count), 0);
  for (int q = 0; q < plan.hosts; ++q) {
    const BlockApproximation& ba = ia.blocks[static_cast<std::size_t>(q)];
    const std::vector<Eigen::MatrixXd> plain_blocks = reconstruct_block(ba, dict, dict);
    const int free_dims = n * n - static_cast<int>(ba.indices.size());
    const int br = (q / g.blocks_per_row) * n;
    const int bc = (q % g.blocks_per_row) * n;

    if (free_dims == 0) {
      for (int z = 0; z < z_count; ++z)
        container.host_section[static_cast<std::size_t>(z)].block(br, bc, n, n) =
            plain_blocks[static_cast<std::size_t>(z)];
      continue;
    }
    const OmpState state = rebuild_state(ba.indices, dict, dict);
    for (int z = 0; z < z_count; ++z) {
      const std::vector<Eigen::MatrixXd> basis =
          build_nullspace_basis(state, seed_stream, key_stream, free_dims);
      auto& cur = cursor[static_cast<std::size_t>(z)];
      const std::size_t take =
          std::min(static_cast<std::size_t>(free_dims), plan.payload[z].size() - cur);
      container.host_section[static_cast<std::size_t>(z)].block(br, bc, n, n) = embed_host(
          plain_blocks[static_cast<std::size_t>(z)],
          std::span<const double>(plan.payload[z]).subspan(cur, take), basis);
      cur += take;
    }
  }
  for (int z = 0; z < z_count; ++z)
    if (cursor[static_cast<std::size_t>(z)] != plan.payload[static_cast<std::size_t>(z)].size())
      throw Error("fold: payload not fully embedded");

  FoldResult result;
  result.container = std::move(container);
  result.approximation = ia.approximation;
  result.plan = std::move(plan);
  result.total_coeffs = ia.total_coeffs;
  return result;
}

UnfoldResult unfold(const FoldedContainer& container, std::uint64_t private_key) {
  const HeaderFields& h = container.header;
  const ContainerGeometry g = container_geometry(h);
  const int n = h.block_n;
  const int z_count = h.channels;
  const int q_total = static_cast<int>(h.q_total);
  const int hosts = static_cast<int>(h.hosts);
  if (n < 7) throw ContainerError("container: block size below the dictionary minimum");
  if (container.host_section.size() != static_cast<std::size_t>(z_count) ||
      container.adhoc_section.size() != static_cast<std::size_t>(z_count))
    throw ContainerError("container: section channel count mismatch");

  const Dictionary1D dict = build_mixed(n);
  RandomStream seed_stream(h.public_seed);
  RandomStream key_stream(private_key);

  UnfoldResult result;

  // ad-hoc section first, replaying the fold-side stream order
  std::vector<long> stream;
  for (int j = 0; j < static_cast<int>(h.adhoc); ++j) {
    const int z = j % z_count;
    const int slot = j / z_count;
    const Eigen::MatrixXd block =
        container.adhoc_section[static_cast<std::size_t>(z)].block(
            (slot / g.blocks_per_row) * n, (slot % g.blocks_per_row) * n, n, n);
    const AdhocExtract ex = extract_adhoc(block, seed_stream, key_stream, n);
    stream.insert(stream.end(), ex.values.begin(), ex.values.end());
  }

  // index-stream parse; decoded integers are clamped into range so a wrong
  // key garbles the output instead of faulting
  const long max_label =
      static_cast<long>(mixed_atom_count(n)) * static_cast<long>(mixed_atom_count(n));
  std::vector<std::vector<AtomIndexPair>> pairs_per_block(static_cast<std::size_t>(q_total));
  std::size_t pos = 0;
  for (int q = 0; q < q_total; ++q) {
    long k = 0;
    if (pos < stream.size()) {
      const long raw = stream[pos++];
      k = std::clamp(raw, 0L, static_cast<long>(n) * n);
      if (k != raw) result.suspect = true;
      if (k > static_cast<long>(stream.size() - pos)) {
        k = static_cast<long>(stream.size() - pos);
        result.suspect = true;
      }
    } else {
      result.suspect = true;
    }
    auto& pairs = pairs_per_block[static_cast<std::size_t>(q)];
    pairs.reserve(static_cast<std::size_t>(k));
    for (long i = 0; i < k; ++i) {
      long label = stream[pos++];
      const long clamped = std::clamp(label, 1L, max_label);
      if (clamped != label) result.suspect = true;
      pairs.push_back(unflatten_index(clamped, mixed_atom_count(n), mixed_atom_count(n)));
    }
  }
  if (pos != stream.size()) result.suspect = true;

  std::vector<std::size_t> payload_needed(static_cast<std::size_t>(z_count), 0);
  for (int q = hosts; q < q_total; ++q)
    for (auto& need : payload_needed)
      need += pairs_per_block[static_cast<std::size_t>(q)].size();

  // hosts: projector splits G into plain block and payload carrier
  std::vector<std::vector<Eigen::MatrixXd>> plain_blocks(
      static_cast<std::size_t>(z_count),
      std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(q_total)));
  std::vector<std::vector<double>> payload(static_cast<std::size_t>(z_count));
  for (int q = 0; q < hosts; ++q) {
    const auto& pairs = pairs_per_block[static_cast<std::size_t>(q)];
    const OmpState state = rebuild_state(pairs, dict, dict, kDependenceTol, /*lenient=*/true);
    if (state.count() != static_cast<int>(pairs.size())) result.suspect = true;
    const int free_dims = n * n - static_cast<int>(pairs.size());
    const int br = (q / g.blocks_per_row) * n;
    const int bc = (q % g.blocks_per_row) * n;

    for (int z = 0; z < z_count; ++z) {
      const Eigen::MatrixXd host_block =
          container.host_section[static_cast<std::size_t>(z)].block(br, bc, n, n);
      if (free_dims == 0) {
        plain_blocks[static_cast<std::size_t>(z)][static_cast<std::size_t>(q)] =
            state.project(host_block);
        continue;
      }
      const std::vector<Eigen::MatrixXd> basis =
          build_nullspace_basis(state, seed_stream, key_stream, free_dims);
      HostExtract ex = extract_host(host_block, state, basis);
      plain_blocks[static_cast<std::size_t>(z)][static_cast<std::size_t>(q)] =
          std::move(ex.approx);
      auto& sink = payload[static_cast<std::size_t>(z)];
      const std::size_t take = std::min(static_cast<std::size_t>(free_dims),
                                        payload_needed[static_cast<std::size_t>(z)] - sink.size());
      sink.insert(sink.end(), ex.payload.begin(), ex.payload.begin() + static_cast<long>(take));
    }
  }

  // non-host blocks are rebuilt from decoded indices and recovered coefficients
  std::vector<std::size_t> cursor(static_cast<std::size_t>(z_count), 0);
  for (int q = hosts; q < q_total; ++q) {
    const auto& pairs = pairs_per_block[static_cast<std::size_t>(q)];
    for (int z = 0; z < z_count; ++z) {
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
      auto& cur = cursor[static_cast<std::size_t>(z)];
      const auto& source = payload[static_cast<std::size_t>(z)];
      for (const AtomIndexPair& p : pairs) {
        if (cur >= source.size()) {
          result.suspect = true;
          break;
        }
        block.noalias() +=
            source[cur++] * dict.atom(p.lx - 1) * dict.atom(p.ly - 1).transpose();
      }
      plain_blocks[static_cast<std::size_t>(z)][static_cast<std::size_t>(q)] = std::move(block);
    }
  }

  Image out(static_cast<int>(h.orig_rows), static_cast<int>(h.orig_cols), z_count,
            (h.flags & kFlagDeepSource) ? 16 : 8);
  for (int z = 0; z < z_count; ++z)
    out.channels[static_cast<std::size_t>(z)] =
        assemble_plane(plain_blocks[static_cast<std::size_t>(z)],
                       static_cast<int>(h.orig_rows), static_cast<int>(h.orig_cols), n);
  result.image = std::move(out);
  return result;
}

}  // namespace sceif
