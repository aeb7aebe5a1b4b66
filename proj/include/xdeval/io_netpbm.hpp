#pragma once

#include <string>

#include "xdeval/grid.hpp"
#include "xdeval/tensor.hpp"

namespace xdeval {

// Binary netpbm, 8-bit, maxval 255. Images are {3, H, W} tensors with
// values in [0, 1]; bytes quantize as round(v * 255).
void write_ppm(const Tensor& image, const std::string& path);
Tensor read_ppm(const std::string& path);

// Grayscale heatmap export: the grid is min-max scaled to 0..255; a
// constant grid exports as all zeros.
void write_heatmap_pgm(const Grid& grid, const std::string& path);

// Reads a PGM back as a Grid with values byte/255.
Grid read_pgm(const std::string& path);

}  // namespace xdeval
