#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sceif {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed, truncated or otherwise unusable container/file data.
struct ContainerError : Error {
  using Error::Error;
};

// Multi-channel intensity image. Channel planes are rows x cols matrices of
// doubles; `bits` is the nominal sample depth (8 or 16) used for peak-value
// metrics and for rounding on write.
struct Image {
  std::vector<Eigen::MatrixXd> channels;
  int bits = 8;

  Image() = default;
  Image(int rows, int cols, int channel_count, int bit_depth = 8)
      : bits(bit_depth) {
    channels.assign(static_cast<std::size_t>(channel_count),
                    Eigen::MatrixXd::Zero(rows, cols));
  }

  Eigen::Index rows() const { return channels.empty() ? 0 : channels[0].rows(); }
  Eigen::Index cols() const { return channels.empty() ? 0 : channels[0].cols(); }
  int channel_count() const { return static_cast<int>(channels.size()); }
  double peak() const { return static_cast<double>((1u << bits) - 1u); }
};

// Raw netpbm payload: `samples` holds maxval-scaled words, interleaved per
// pixel for PPM (P6) and planar-free for PGM (P5), row-major.
struct RawPnm {
  int rows = 0;
  int cols = 0;
  int channel_count = 1;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

RawPnm read_pnm_raw(const std::string& path);
void write_pnm_raw(const RawPnm& raw, const std::string& path);

// 8- or 16-bit PGM/PPM. Other maxvals are rejected.
Image read_pnm(const std::string& path);

// Samples are rounded and clamped to the image's bit depth.
void write_pnm(const Image& img, const std::string& path);

}  // namespace sceif
