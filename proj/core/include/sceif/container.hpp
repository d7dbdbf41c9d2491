#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sceif/image.hpp"

namespace sceif {

inline constexpr std::uint16_t kContainerMagic = 0x5343;
inline constexpr std::uint16_t kContainerVersion = 1;
// flags bit 0: plain-text source was 16-bit
inline constexpr std::uint16_t kFlagDeepSource = 0x0001;

struct SectionQuant {
  double min = 0.0;
  double scale = 1.0;
};

struct HeaderFields {
  std::uint32_t orig_rows = 0;
  std::uint32_t orig_cols = 0;
  std::uint16_t channels = 1;
  std::uint16_t block_n = 8;
  std::uint32_t q_total = 0;   // Q
  std::uint32_t hosts = 0;     // H
  std::uint32_t adhoc = 0;     // H~
  std::uint32_t public_seed = 0;
  std::uint16_t flags = 0;
  SectionQuant host_quant;
  SectionQuant adhoc_quant;
};

// Fixed header-row layout, 16-bit words, multi-word fields most significant
// word first, doubles as raw IEEE-754 bits:
//   magic(1) version(1) orig_rows(2) orig_cols(2) channels(1) block_n(1)
//   Q(2) H(2) H~(2) public_seed(2) flags(1)
//   host_min(4) host_scale(4) adhoc_min(4) adhoc_scale(4)
inline constexpr int kHeaderWords = 33;

struct ContainerGeometry {
  int width = 0;  // folded width, multiple of block_n
  int blocks_per_row = 0;
  int host_rows = 0;
  int adhoc_rows = 0;
  int adhoc_slots_per_channel = 0;
  int rows = 0;  // host_rows + adhoc_rows + 1 (header row)
};

ContainerGeometry container_geometry(const HeaderFields& h);

// The cipher image prior to / after 16-bit quantization: real-valued host
// and ad-hoc sections plus the plain header. Section quantizers become
// authoritative (quant_fixed) once a container has been read from disk, so
// a rewrite reproduces the file bit for bit.
struct FoldedContainer {
  HeaderFields header;
  std::vector<Eigen::MatrixXd> host_section;   // [channel] host_rows x width
  std::vector<Eigen::MatrixXd> adhoc_section;  // [channel] adhoc_rows x width
  bool quant_fixed = false;
};

struct QuantizedSection {
  std::vector<std::uint16_t> words;
  SectionQuant quant;
};

// Affine 16-bit quantization: scale = 65535/(max-min), or 1 for a constant
// section; word = round((v-min)*scale).
QuantizedSection quantize_section(std::span<const double> values);
std::vector<std::uint16_t> quantize_section(std::span<const double> values, SectionQuant q);
std::vector<double> dequantize_section(std::span<const std::uint16_t> words, SectionQuant q);

// Header row, zero-padded to `width` words. Throws when width < kHeaderWords.
std::vector<std::uint16_t> encode_header(const HeaderFields& h, int width);
HeaderFields decode_header(std::span<const std::uint16_t> row);

// Binary PPM (P6) / PGM (P5), maxval 65535, big-endian samples; rows are the
// host section, then the ad-hoc section, then one header row (channel 1 only).
void write_container(const FoldedContainer& c, const std::string& path);
FoldedContainer read_container(const std::string& path);

// Raster-order tiling into block_n x block_n blocks; edge blocks replicate
// the last row/column, assemble_plane crops back to (rows, cols).
std::vector<Eigen::MatrixXd> tile_plane(const Eigen::MatrixXd& plane, int block_n);
Eigen::MatrixXd assemble_plane(const std::vector<Eigen::MatrixXd>& blocks, int rows, int cols,
                               int block_n);

}  // namespace sceif
