#include "sceif/container.hpp"

#include <bit>
#include <cmath>

namespace sceif {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

void put_u32(std::vector<std::uint16_t>& w, std::size_t at, std::uint32_t v) {
  w[at] = static_cast<std::uint16_t>(v >> 16);
  w[at + 1] = static_cast<std::uint16_t>(v & 0xFFFF);
}

std::uint32_t get_u32(std::span<const std::uint16_t> w, std::size_t at) {
  return (static_cast<std::uint32_t>(w[at]) << 16) | w[at + 1];
}

void put_f64(std::vector<std::uint16_t>& w, std::size_t at, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 4; ++i)
    w[at + static_cast<std::size_t>(i)] =
        static_cast<std::uint16_t>((bits >> (48 - 16 * i)) & 0xFFFF);
}

double get_f64(std::span<const std::uint16_t> w, std::size_t at) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 4; ++i)
    bits = (bits << 16) | w[at + static_cast<std::size_t>(i)];
  return std::bit_cast<double>(bits);
}

}  // namespace

ContainerGeometry container_geometry(const HeaderFields& h) {
  if (h.block_n < 1) throw ContainerError("container: bad block size");
  if (h.channels != 1 && h.channels != 3) throw ContainerError("container: bad channel count");
  const int bn = h.block_n;
  ContainerGeometry g;
  g.blocks_per_row = ceil_div(static_cast<int>(h.orig_cols), bn);
  g.width = g.blocks_per_row * bn;
  g.host_rows = ceil_div(static_cast<int>(h.hosts), g.blocks_per_row) * bn;
  g.adhoc_slots_per_channel = ceil_div(static_cast<int>(h.adhoc), h.channels);
  g.adhoc_rows = ceil_div(g.adhoc_slots_per_channel, g.blocks_per_row) * bn;
  g.rows = g.host_rows + g.adhoc_rows + 1;
  return g;
}

QuantizedSection quantize_section(std::span<const double> values) {
  SectionQuant q;
  if (!values.empty()) {
    double lo = values[0];
    double hi = values[0];
    for (double v : values) {
      if (!std::isfinite(v)) throw Error("quantize: non-finite value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    q.min = lo;
    q.scale = hi > lo ? 65535.0 / (hi - lo) : 1.0;
  }
  return {quantize_section(values, q), q};
}

std::vector<std::uint16_t> quantize_section(std::span<const double> values, SectionQuant q) {
  std::vector<std::uint16_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw Error("quantize: non-finite value");
    const double w = std::round((values[i] - q.min) * q.scale);
    words[i] = static_cast<std::uint16_t>(std::min(std::max(w, 0.0), 65535.0));
  }
  return words;
}

std::vector<double> dequantize_section(std::span<const std::uint16_t> words, SectionQuant q) {
  std::vector<double> values(words.size());
  for (std::size_t i = 0; i < words.size(); ++i)
    values[i] = static_cast<double>(words[i]) / q.scale + q.min;
  return values;
}

std::vector<std::uint16_t> encode_header(const HeaderFields& h, int width) {
  if (width < kHeaderWords)
    throw Error("encode_header: image too narrow for the header row");
  std::vector<std::uint16_t> w(static_cast<std::size_t>(width), 0);
  w[0] = kContainerMagic;
  w[1] = kContainerVersion;
  put_u32(w, 2, h.orig_rows);
  put_u32(w, 4, h.orig_cols);
  w[6] = h.channels;
  w[7] = h.block_n;
  put_u32(w, 8, h.q_total);
  put_u32(w, 10, h.hosts);
  put_u32(w, 12, h.adhoc);
  put_u32(w, 14, h.public_seed);
  w[16] = h.flags;
  put_f64(w, 17, h.host_quant.min);
  put_f64(w, 21, h.host_quant.scale);
  put_f64(w, 25, h.adhoc_quant.min);
  put_f64(w, 29, h.adhoc_quant.scale);
  return w;
}

HeaderFields decode_header(std::span<const std::uint16_t> row) {
  if (row.size() < static_cast<std::size_t>(kHeaderWords))
    throw ContainerError("container: header row too short");
  if (row[0] != kContainerMagic) throw ContainerError("container: bad magic word");
  if (row[1] != kContainerVersion) throw ContainerError("container: unsupported version");

  HeaderFields h;
  h.orig_rows = get_u32(row, 2);
  h.orig_cols = get_u32(row, 4);
  h.channels = row[6];
  h.block_n = row[7];
  h.q_total = get_u32(row, 8);
  h.hosts = get_u32(row, 10);
  h.adhoc = get_u32(row, 12);
  h.public_seed = get_u32(row, 14);
  h.flags = row[16];
  h.host_quant.min = get_f64(row, 17);
  h.host_quant.scale = get_f64(row, 21);
  h.adhoc_quant.min = get_f64(row, 25);
  h.adhoc_quant.scale = get_f64(row, 29);

  if (h.orig_rows < 1 || h.orig_cols < 1) throw ContainerError("container: bad dimensions");
  if (h.channels != 1 && h.channels != 3) throw ContainerError("container: bad channel count");
  if (h.block_n < 1) throw ContainerError("container: bad block size");
  const std::uint32_t expected_q =
      static_cast<std::uint32_t>(ceil_div(static_cast<int>(h.orig_rows), h.block_n)) *
      static_cast<std::uint32_t>(ceil_div(static_cast<int>(h.orig_cols), h.block_n));
  if (h.q_total != expected_q) throw ContainerError("container: block count mismatch");
  if (h.hosts > h.q_total) throw ContainerError("container: host count out of range");
  if (!std::isfinite(h.host_quant.min) || !std::isfinite(h.host_quant.scale) ||
      !std::isfinite(h.adhoc_quant.min) || !std::isfinite(h.adhoc_quant.scale) ||
      h.host_quant.scale <= 0.0 || h.adhoc_quant.scale <= 0.0)
    throw ContainerError("container: bad quantization parameters");
  return h;
}

namespace {

std::vector<double> section_values(const std::vector<Eigen::MatrixXd>& section) {
  std::vector<double> values;
  for (const auto& plane : section) {
    for (Eigen::Index r = 0; r < plane.rows(); ++r)
      for (Eigen::Index c = 0; c < plane.cols(); ++c) values.push_back(plane(r, c));
  }
  return values;
}

std::vector<Eigen::MatrixXd> section_planes(std::span<const double> values, int channels,
                                            int rows, int cols) {
  std::vector<Eigen::MatrixXd> section;
  std::size_t i = 0;
  for (int z = 0; z < channels; ++z) {
    Eigen::MatrixXd plane(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) plane(r, c) = values[i++];
    section.push_back(std::move(plane));
  }
  return section;
}

}  // namespace

void write_container(const FoldedContainer& c, const std::string& path) {
  const HeaderFields& h = c.header;
  const ContainerGeometry g = container_geometry(h);
  if (c.host_section.size() != h.channels || c.adhoc_section.size() != h.channels)
    throw Error("write_container: section channel count mismatch");
  for (const auto& p : c.host_section)
    if (p.rows() != g.host_rows || p.cols() != g.width)
      throw Error("write_container: host section shape mismatch");
  for (const auto& p : c.adhoc_section)
    if (p.rows() != g.adhoc_rows || p.cols() != g.width)
      throw Error("write_container: ad-hoc section shape mismatch");

  const std::vector<double> host_vals = section_values(c.host_section);
  const std::vector<double> adhoc_vals = section_values(c.adhoc_section);

  HeaderFields out_header = h;
  std::vector<std::uint16_t> host_words, adhoc_words;
  if (c.quant_fixed) {
    host_words = quantize_section(host_vals, h.host_quant);
    adhoc_words = quantize_section(adhoc_vals, h.adhoc_quant);
  } else {
    QuantizedSection hq = quantize_section(host_vals);
    QuantizedSection aq = quantize_section(adhoc_vals);
    out_header.host_quant = hq.quant;
    out_header.adhoc_quant = aq.quant;
    host_words = std::move(hq.words);
    adhoc_words = std::move(aq.words);
  }

  RawPnm raw;
  raw.rows = g.rows;
  raw.cols = g.width;
  raw.channel_count = h.channels;
  raw.maxval = 65535;
  raw.samples.assign(static_cast<std::size_t>(g.rows) * g.width * h.channels, 0);

  auto sample_at = [&](int r, int col, int z) -> std::uint16_t& {
    return raw.samples[(static_cast<std::size_t>(r) * g.width + static_cast<std::size_t>(col)) *
                           h.channels +
                       static_cast<std::size_t>(z)];
  };

  std::size_t i = 0;
  for (int z = 0; z < h.channels; ++z)
    for (int r = 0; r < g.host_rows; ++r)
      for (int col = 0; col < g.width; ++col) sample_at(r, col, z) = host_words[i++];
  i = 0;
  for (int z = 0; z < h.channels; ++z)
    for (int r = 0; r < g.adhoc_rows; ++r)
      for (int col = 0; col < g.width; ++col)
        sample_at(g.host_rows + r, col, z) = adhoc_words[i++];

  const std::vector<std::uint16_t> header_row = encode_header(out_header, g.width);
  for (int col = 0; col < g.width; ++col)
    sample_at(g.rows - 1, col, 0) = header_row[static_cast<std::size_t>(col)];

  write_pnm_raw(raw, path);
}

FoldedContainer read_container(const std::string& path) {
  const RawPnm raw = read_pnm_raw(path);
  if (raw.maxval != 65535) throw ContainerError("container must be 16-bit");
  if (raw.rows < 1) throw ContainerError("container: no header row");

  auto sample_at = [&](int r, int col, int z) -> std::uint16_t {
    return raw.samples[(static_cast<std::size_t>(r) * raw.cols + static_cast<std::size_t>(col)) *
                           raw.channel_count +
                       static_cast<std::size_t>(z)];
  };

  std::vector<std::uint16_t> header_row;
  header_row.reserve(static_cast<std::size_t>(raw.cols));
  for (int col = 0; col < raw.cols; ++col) header_row.push_back(sample_at(raw.rows - 1, col, 0));
  const HeaderFields h = decode_header(header_row);

  if (h.channels != raw.channel_count)
    throw ContainerError("container: channel count does not match the file");
  const ContainerGeometry g = container_geometry(h);
  if (g.rows != raw.rows || g.width != raw.cols)
    throw ContainerError("container: geometry does not match the file dimensions");

  std::vector<std::uint16_t> host_words, adhoc_words;
  for (int z = 0; z < h.channels; ++z)
    for (int r = 0; r < g.host_rows; ++r)
      for (int col = 0; col < g.width; ++col) host_words.push_back(sample_at(r, col, z));
  for (int z = 0; z < h.channels; ++z)
    for (int r = 0; r < g.adhoc_rows; ++r)
      for (int col = 0; col < g.width; ++col)
        adhoc_words.push_back(sample_at(g.host_rows + r, col, z));

  FoldedContainer c;
  c.header = h;
  c.quant_fixed = true;
  c.host_section =
      section_planes(dequantize_section(host_words, h.host_quant), h.channels, g.host_rows, g.width);
  c.adhoc_section = section_planes(dequantize_section(adhoc_words, h.adhoc_quant), h.channels,
                                   g.adhoc_rows, g.width);
  return c;
}

std::vector<Eigen::MatrixXd> tile_plane(const Eigen::MatrixXd& plane, int block_n) {
  if (block_n < 1) throw Error("tile_plane: bad block size");
  const int rows = static_cast<int>(plane.rows());
  const int cols = static_cast<int>(plane.cols());
  const int brs = ceil_div(rows, block_n);
  const int bcs = ceil_div(cols, block_n);
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(static_cast<std::size_t>(brs) * bcs);
  for (int br = 0; br < brs; ++br)
    for (int bc = 0; bc < bcs; ++bc) {
      Eigen::MatrixXd b(block_n, block_n);
      for (int i = 0; i < block_n; ++i)
        for (int j = 0; j < block_n; ++j)
          b(i, j) = plane(std::min(br * block_n + i, rows - 1),
                          std::min(bc * block_n + j, cols - 1));
      blocks.push_back(std::move(b));
    }
  return blocks;
}

Eigen::MatrixXd assemble_plane(const std::vector<Eigen::MatrixXd>& blocks, int rows, int cols,
                               int block_n) {
  const int brs = ceil_div(rows, block_n);
  const int bcs = ceil_div(cols, block_n);
  if (blocks.size() != static_cast<std::size_t>(brs) * bcs)
    throw Error("assemble_plane: block count mismatch");
  Eigen::MatrixXd plane(rows, cols);
  for (int br = 0; br < brs; ++br)
    for (int bc = 0; bc < bcs; ++bc) {
      const Eigen::MatrixXd& b = blocks[static_cast<std::size_t>(br) * bcs + bc];
      for (int i = 0; i < block_n && br * block_n + i < rows; ++i)
        for (int j = 0; j < block_n && bc * block_n + j < cols; ++j)
          plane(br * block_n + i, bc * block_n + j) = b(i, j);
    }
  return plane;
}

}  // namespace sceif
