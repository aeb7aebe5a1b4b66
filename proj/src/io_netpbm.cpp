#include "xdeval/io_netpbm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include "xdeval/errors.hpp"

namespace xdeval {

namespace {

std::uint8_t quantize(double v) {
  const double scaled = std::clamp(v, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::lround(scaled));
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Reads the next whitespace-delimited header token, skipping '#' comment
// lines, and advances `pos`.
std::string next_token(const std::string& raw, std::size_t& pos,
                       const std::string& path) {
  while (pos < raw.size()) {
    const char c = raw[pos];
    if (c == '#') {
      while (pos < raw.size() && raw[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < raw.size() && !std::isspace(static_cast<unsigned char>(raw[pos]))) {
    ++pos;
  }
  if (start == pos) throw FormatError(path + ": truncated netpbm header");
  return raw.substr(start, pos - start);
}

std::size_t parse_dim(const std::string& token, const std::string& path) {
  if (token.empty() ||
      !std::all_of(token.begin(), token.end(), [](unsigned char c) {
        return std::isdigit(c);
      })) {
    throw FormatError(path + ": malformed netpbm header field '" + token + "'");
  }
  return static_cast<std::size_t>(std::stoull(token));
}

// Parses "Pn <w> <h> <maxval>" and returns the payload offset.
std::size_t parse_header(const std::string& raw, const std::string& magic,
                         const std::string& path, std::size_t& width,
                         std::size_t& height) {
  std::size_t pos = 0;
  if (next_token(raw, pos, path) != magic) {
    throw FormatError(path + ": expected " + magic + " netpbm file");
  }
  width = parse_dim(next_token(raw, pos, path), path);
  height = parse_dim(next_token(raw, pos, path), path);
  const std::size_t maxval = parse_dim(next_token(raw, pos, path), path);
  if (width == 0 || height == 0) {
    throw FormatError(path + ": zero image dimension");
  }
  if (maxval != 255) {
    throw FormatError(path + ": only maxval 255 is supported, got " +
                      std::to_string(maxval));
  }
  // Exactly one whitespace byte separates the header from the payload.
  if (pos >= raw.size() ||
      !std::isspace(static_cast<unsigned char>(raw[pos]))) {
    throw FormatError(path + ": missing separator before pixel data");
  }
  return pos + 1;
}

void check_payload(const std::string& raw, std::size_t offset,
                   std::size_t expected, const std::string& path) {
  if (raw.size() - offset != expected) {
    throw FormatError(path + ": payload size mismatch (expected " +
                      std::to_string(expected) + " bytes, found " +
                      std::to_string(raw.size() - offset) + ")");
  }
}

}  // namespace

void write_ppm(const Tensor& image, const std::string& path) {
  if (image.shape.size() != 3 || image.shape[0] != 3) {
    throw ShapeMismatch("write_ppm expects a {3, H, W} tensor");
  }
  const std::size_t h = image.shape[1];
  const std::size_t w = image.shape[2];
  std::vector<std::uint8_t> bytes(3 * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        bytes[(y * w + x) * 3 + c] = quantize(image.at3(c, y, x));
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "P6\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path);
}

Tensor read_ppm(const std::string& path) {
  const std::string raw = read_all(path);
  std::size_t w = 0, h = 0;
  const std::size_t offset = parse_header(raw, "P6", path, w, h);
  check_payload(raw, offset, 3 * h * w, path);

  Tensor image = Tensor::zeros({3, h, w});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const auto byte = static_cast<std::uint8_t>(
            raw[offset + (y * w + x) * 3 + c]);
        image.at3(c, y, x) = static_cast<double>(byte) / 255.0;
      }
    }
  }
  return image;
}

void write_heatmap_pgm(const Grid& grid, const std::string& path) {
  const auto [mn_it, mx_it] =
      std::minmax_element(grid.values().begin(), grid.values().end());
  const double mn = *mn_it;
  const double mx = *mx_it;

  std::vector<std::uint8_t> bytes(grid.values().size(), 0);
  if (mx > mn) {
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      bytes[i] = quantize((grid.values()[i] - mn) / (mx - mn));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "P5\n" << grid.width() << " " << grid.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path);
}

Grid read_pgm(const std::string& path) {
  const std::string raw = read_all(path);
  std::size_t w = 0, h = 0;
  const std::size_t offset = parse_header(raw, "P5", path, w, h);
  check_payload(raw, offset, h * w, path);

  std::vector<double> values(h * w);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] =
        static_cast<double>(static_cast<std::uint8_t>(raw[offset + i])) / 255.0;
  }
  return Grid(w, h, std::move(values));
}

}  // namespace xdeval
