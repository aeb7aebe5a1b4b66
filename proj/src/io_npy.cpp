#include "xdeval/io_npy.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "xdeval/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace xdeval {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Pulls the value following `key` out of the header dict. Values are
// either quoted strings, True/False, or a parenthesized tuple.
std::string header_value(const std::string& header, const std::string& key,
                         const std::string& path) {
  const std::string quoted = "'" + key + "'";
  const std::size_t kpos = header.find(quoted);
  if (kpos == std::string::npos) {
    throw FormatError(path + ": NPY header missing key " + key);
  }
  std::size_t pos = header.find(':', kpos + quoted.size());
  if (pos == std::string::npos) {
    throw FormatError(path + ": malformed NPY header");
  }
  ++pos;
  while (pos < header.size() && header[pos] == ' ') ++pos;
  if (pos >= header.size()) {
    throw FormatError(path + ": malformed NPY header");
  }
  if (header[pos] == '\'') {
    const std::size_t end = header.find('\'', pos + 1);
    if (end == std::string::npos) {
      throw FormatError(path + ": unterminated string in NPY header");
    }
    return header.substr(pos + 1, end - pos - 1);
  }
  if (header[pos] == '(') {
    const std::size_t end = header.find(')', pos + 1);
    if (end == std::string::npos) {
      throw FormatError(path + ": unterminated tuple in NPY header");
    }
    return header.substr(pos, end - pos + 1);
  }
  std::size_t end = pos;
  while (end < header.size() && header[end] != ',' && header[end] != '}') {
    ++end;
  }
  std::string value = header.substr(pos, end - pos);
  while (!value.empty() && value.back() == ' ') value.pop_back();
  return value;
}

std::vector<std::size_t> parse_shape(const std::string& tuple,
                                     const std::string& path) {
  std::vector<std::size_t> dims;
  std::size_t pos = 1;  // skip '('
  while (pos < tuple.size() && tuple[pos] != ')') {
    while (pos < tuple.size() && (tuple[pos] == ' ' || tuple[pos] == ',')) {
      ++pos;
    }
    if (pos >= tuple.size() || tuple[pos] == ')') break;
    if (!std::isdigit(static_cast<unsigned char>(tuple[pos]))) {
      throw FormatError(path + ": malformed shape tuple in NPY header");
    }
    std::size_t value = 0;
    while (pos < tuple.size() &&
           std::isdigit(static_cast<unsigned char>(tuple[pos]))) {
      value = value * 10 + static_cast<std::size_t>(tuple[pos] - '0');
      ++pos;
    }
    dims.push_back(value);
  }
  return dims;
}

}  // namespace

Grid read_grid(const std::string& path) {
  const std::string raw = read_all(path);
  if (raw.size() < 10 || std::memcmp(raw.data(), kMagic, 6) != 0) {
    throw FormatError(path + ": not an NPY file (bad magic)");
  }
  if (raw[6] != '\x01' || raw[7] != '\x00') {
    throw FormatError(path + ": unsupported NPY version");
  }
  std::uint16_t header_len = 0;
  std::memcpy(&header_len, raw.data() + 8, 2);
  if (raw.size() < 10u + header_len) {
    throw FormatError(path + ": truncated NPY header");
  }
  const std::string header = raw.substr(10, header_len);

  const std::string descr = header_value(header, "descr", path);
  if (descr != "<f8" && descr != "<f4") {
    throw FormatError(path + ": unsupported element type " + descr);
  }
  const std::string order = header_value(header, "fortran_order", path);
  if (order != "False") {
    throw FormatError(path + ": fortran-order arrays are not supported");
  }
  const std::vector<std::size_t> dims =
      parse_shape(header_value(header, "shape", path), path);
  if (dims.size() != 2) {
    throw FormatError(path + ": expected a 2-D array, got " +
                      std::to_string(dims.size()) + " dimensions");
  }
  const std::size_t h = dims[0];
  const std::size_t w = dims[1];
  if (h == 0 || w == 0) {
    throw FormatError(path + ": empty array dimensions");
  }

  const std::size_t elem = descr == "<f8" ? 8 : 4;
  const std::size_t payload_offset = 10 + header_len;
  const std::size_t expected = h * w * elem;
  if (raw.size() - payload_offset != expected) {
    throw FormatError(path + ": payload size mismatch (expected " +
                      std::to_string(expected) + " bytes, found " +
                      std::to_string(raw.size() - payload_offset) + ")");
  }

  std::vector<double> values(h * w);
  const char* src = raw.data() + payload_offset;
  if (elem == 8) {
    std::memcpy(values.data(), src, expected);
  } else {
    for (std::size_t i = 0; i < h * w; ++i) {
      float f = 0.0f;
      std::memcpy(&f, src + i * 4, 4);
      values[i] = static_cast<double>(f);
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw IntegrityError(path + ": non-finite value in grid payload");
    }
  }
  return Grid(w, h, std::move(values));
}

void write_grid(const Grid& grid, const std::string& path) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(grid.height()) + ", " +
                       std::to_string(grid.width()) + "), }";
  // Pad with spaces, terminated by a newline, so that the payload begins
  // at a multiple of 64 bytes.
  const std::size_t base = 10 + header.size() + 1;
  const std::size_t padded = (base + 63) / 64 * 64;
  header.append(padded - base, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(kMagic, 6);
  out.put('\x01');
  out.put('\x00');
  const std::uint16_t header_len = static_cast<std::uint16_t>(header.size());
  out.write(reinterpret_cast<const char*>(&header_len), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(grid.values().data()),
            static_cast<std::streamsize>(grid.values().size() * 8));
  if (!out) throw FormatError("failed writing " + path);
}

}  // namespace xdeval
