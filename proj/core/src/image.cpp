#include "sceif/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace sceif {

namespace {

// Reads the next whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c) && c != '#') {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  // keep the terminator: the byte after maxval belongs to the raster
  if (c != EOF) in.unget();
  return tok;
}

long parse_positive(const std::string& tok, const char* what) {
  if (tok.empty()) throw ContainerError(std::string("pnm: missing ") + what);
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw ContainerError(std::string("pnm: bad ") + what + " '" + tok + "'");
  }
  return std::stol(tok);
}

}  // namespace

RawPnm read_pnm_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContainerError("cannot open '" + path + "'");

  std::string magic = next_token(in);
  int channel_count;
  if (magic == "P5") {
    channel_count = 1;
  } else if (magic == "P6") {
    channel_count = 3;
  } else {
    throw ContainerError("'" + path + "' is not a binary PGM/PPM file");
  }

  RawPnm raw;
  raw.channel_count = channel_count;
  raw.cols = static_cast<int>(parse_positive(next_token(in), "width"));
  raw.rows = static_cast<int>(parse_positive(next_token(in), "height"));
  raw.maxval = static_cast<int>(parse_positive(next_token(in), "maxval"));
  if (raw.cols < 1 || raw.rows < 1)
    throw ContainerError("pnm: degenerate dimensions");
  if (raw.maxval < 1 || raw.maxval > 65535)
    throw ContainerError("pnm: maxval out of range");
  in.get();  // single whitespace byte before the raster

  const std::size_t count = static_cast<std::size_t>(raw.rows) * raw.cols * channel_count;
  raw.samples.resize(count);
  const int bytes_per_sample = raw.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(count * bytes_per_sample);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size())
    throw ContainerError("'" + path + "': truncated raster");

  if (bytes_per_sample == 1) {
    for (std::size_t i = 0; i < count; ++i) raw.samples[i] = buf[i];
  } else {
    // big-endian sample words
    for (std::size_t i = 0; i < count; ++i)
      raw.samples[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
  }
  return raw;
}

void write_pnm_raw(const RawPnm& raw, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContainerError("cannot create '" + path + "'");
  out << (raw.channel_count == 3 ? "P6" : "P5") << "\n"
      << raw.cols << " " << raw.rows << "\n"
      << raw.maxval << "\n";

  const std::size_t count = static_cast<std::size_t>(raw.rows) * raw.cols * raw.channel_count;
  if (raw.samples.size() != count) throw Error("pnm: sample count mismatch");
  if (raw.maxval > 255) {
    std::vector<unsigned char> buf(count * 2);
    for (std::size_t i = 0; i < count; ++i) {
      buf[2 * i] = static_cast<unsigned char>(raw.samples[i] >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(raw.samples[i] & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    std::vector<unsigned char> buf(count);
    for (std::size_t i = 0; i < count; ++i) buf[i] = static_cast<unsigned char>(raw.samples[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

Image read_pnm(const std::string& path) {
  RawPnm raw = read_pnm_raw(path);
  if (raw.maxval != 255 && raw.maxval != 65535)
    throw ContainerError("'" + path + "': only 8- or 16-bit PGM/PPM is supported");

  Image img(raw.rows, raw.cols, raw.channel_count, raw.maxval == 255 ? 8 : 16);
  std::size_t s = 0;
  for (int r = 0; r < raw.rows; ++r)
    for (int c = 0; c < raw.cols; ++c)
      for (int z = 0; z < raw.channel_count; ++z)
        img.channels[static_cast<std::size_t>(z)](r, c) = raw.samples[s++];
  return img;
}

void write_pnm(const Image& img, const std::string& path) {
  if (img.channel_count() != 1 && img.channel_count() != 3)
    throw Error("pnm: only 1- or 3-channel images can be written");
  if (img.bits != 8 && img.bits != 16) throw Error("pnm: bit depth must be 8 or 16");

  RawPnm raw;
  raw.rows = static_cast<int>(img.rows());
  raw.cols = static_cast<int>(img.cols());
  raw.channel_count = img.channel_count();
  raw.maxval = img.bits == 8 ? 255 : 65535;
  raw.samples.resize(static_cast<std::size_t>(raw.rows) * raw.cols * raw.channel_count);

  const double peak = raw.maxval;
  std::size_t s = 0;
  for (int r = 0; r < raw.rows; ++r)
    for (int c = 0; c < raw.cols; ++c)
      for (int z = 0; z < raw.channel_count; ++z) {
        double v = std::round(img.channels[static_cast<std::size_t>(z)](r, c));
        v = std::min(std::max(v, 0.0), peak);
        raw.samples[s++] = static_cast<std::uint16_t>(v);
      }
  write_pnm_raw(raw, path);
}

}  // namespace sceif
