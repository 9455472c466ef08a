#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "occdepth/error.hpp"

namespace occdepth {

struct Pixel {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

// Dense row-major grid of doubles, rows stored top-down. Carrier for
// disparity and depth maps.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
  double at(Pixel p) const { return at(p.row, p.col); }

  bool in_bounds(Pixel p) const {
    return p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols;
  }
  bool same_shape(const Grid& o) const {
    return rows == o.rows && cols == o.cols;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

using DisparityMap = Grid;

// Binary pixel set of one instance, with the dimensions of the raster it was
// read from. Pixels are kept sorted and unique.
struct InstanceMask {
  int rows = 0;
  int cols = 0;
  std::vector<Pixel> pixels;

  void normalize() {
    std::sort(pixels.begin(), pixels.end());
    pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  }

  bool empty() const { return pixels.empty(); }
  std::size_t size() const { return pixels.size(); }

  bool disjoint_from(const InstanceMask& other) const {
    auto i = pixels.begin();
    auto j = other.pixels.begin();
    while (i != pixels.end() && j != other.pixels.end()) {
      if (*i < *j)
        ++i;
      else if (*j < *i)
        ++j;
      else
        return false;
    }
    return true;
  }

  friend bool operator==(const InstanceMask&, const InstanceMask&) = default;
};

// 8-bit grayscale raster as read from a PGM plane.
struct GrayImage {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

inline InstanceMask mask_from_gray(const GrayImage& img) {
  InstanceMask m;
  m.rows = img.rows;
  m.cols = img.cols;
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c)
      if (img.at(r, c) > 0) m.pixels.push_back({r, c});
  return m;
}

// Intensity plane in [0, 1] from an 8-bit raster.
inline Grid normalized_plane(const GrayImage& img) {
  Grid g(img.rows, img.cols);
  for (std::size_t i = 0; i < img.values.size(); ++i)
    g.values[i] = img.values[i] / 255.0;
  return g;
}

}  // namespace occdepth
