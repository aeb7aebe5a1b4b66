#pragma once

#include <string>

#include "xdeval/grid.hpp"

namespace xdeval {

// NPY v1.0, 2-D little-endian float arrays only. The writer emits 64-bit
// floats with the header padded so the payload starts at a 64-byte
// boundary; the reader additionally accepts 32-bit floats.
Grid read_grid(const std::string& path);
void write_grid(const Grid& grid, const std::string& path);

}  // namespace xdeval
