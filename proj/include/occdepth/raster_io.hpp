#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <utility>

#include "occdepth/error.hpp"
#include "occdepth/grid.hpp"

namespace occdepth {
namespace detail {

// Netpbm-style header scanner: whitespace-separated tokens, '#' comments run
// to end of line.
struct PnmScanner {
  std::string_view bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }

  std::string_view token(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
           bytes[pos] != '#')
      ++pos;
    if (pos == start)
      throw FormatError(std::string("missing ") + what + " in raster header",
                        start);
    return bytes.substr(start, pos - start);
  }

  long integer(const char* what) {
    const std::size_t at = pos;
    const auto tok = token(what);
    long value = 0;
    for (char c : tok) {
      if (c < '0' || c > '9')
        throw FormatError(std::string("bad ") + what + " in raster header", at);
      value = value * 10 + (c - '0');
      if (value > 1'000'000'000)
        throw FormatError(std::string(what) + " out of range", at);
    }
    return value;
  }

  double real(const char* what) {
    const std::size_t at = pos;
    const auto tok = token(what);
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(tok), &used);
      if (used != tok.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw FormatError(std::string("bad ") + what + " in raster header", at);
    }
  }

  // Exactly one whitespace byte separates the header from the raster payload.
  void raster_start() {
    if (pos >= bytes.size() ||
        !std::isspace(static_cast<unsigned char>(bytes[pos])))
      throw FormatError("missing whitespace before raster payload", pos);
    ++pos;
  }
};

}  // namespace detail

// Binary PGM (P5), maxval 255.
inline GrayImage load_pgm(std::string_view bytes) {
  detail::PnmScanner s{bytes};
  if (s.token("magic") != "P5")
    throw FormatError("not a binary PGM (expected magic P5)", 0);
  const long w = s.integer("width");
  const long h = s.integer("height");
  const long maxval = s.integer("maxval");
  if (w <= 0 || h <= 0)
    throw FormatError("PGM dimensions must be positive", 0);
  if (maxval != 255)
    throw FormatError("unsupported PGM maxval " + std::to_string(maxval) +
                      " (expected 255)");
  s.raster_start();
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() - s.pos < need)
    throw FormatError("truncated PGM payload", bytes.size());
  GrayImage img;
  img.rows = static_cast<int>(h);
  img.cols = static_cast<int>(w);
  img.values.assign(bytes.begin() + s.pos, bytes.begin() + s.pos + need);
  return img;
}

// Pixel set = { (r,c) : value > 0 }.
inline InstanceMask load_mask(std::string_view bytes) {
  return mask_from_gray(load_pgm(bytes));
}

// Grayscale PFM ("Pf"). The sign of the scale field selects endianness; rows
// are stored bottom-up in the file and flipped to top-down in memory.
inline DisparityMap load_disparity(std::string_view bytes) {
  detail::PnmScanner s{bytes};
  const auto magic = s.token("magic");
  if (magic == "PF")
    throw FormatError("color PFM is unsupported (expected grayscale Pf)", 0);
  if (magic != "Pf")
    throw FormatError("not a PFM (expected magic Pf)", 0);
  const long w = s.integer("width");
  const long h = s.integer("height");
  if (w <= 0 || h <= 0)
    throw FormatError("PFM dimensions must be positive", 0);
  const double scale = s.real("scale");
  if (scale == 0.0) throw FormatError("PFM scale must be nonzero");
  const bool file_little = scale < 0.0;
  s.raster_start();
  const std::size_t need = static_cast<std::size_t>(w) * h * 4;
  if (bytes.size() - s.pos < need)
    throw FormatError("truncated PFM payload", bytes.size());

  DisparityMap grid(static_cast<int>(h), static_cast<int>(w));
  const bool host_little = std::endian::native == std::endian::little;
  const char* p = bytes.data() + s.pos;
  for (long file_row = 0; file_row < h; ++file_row) {
    const long mem_row = h - 1 - file_row;  // bottom-up to top-down
    for (long c = 0; c < w; ++c) {
      unsigned char b[4];
      std::memcpy(b, p, 4);
      p += 4;
      if (file_little != host_little) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
      float v;
      std::memcpy(&v, b, 4);
      if (!std::isfinite(v))
        throw FormatError("non-finite PFM pixel at row " +
                          std::to_string(mem_row) + " col " + std::to_string(c));
      grid.at(static_cast<int>(mem_row), static_cast<int>(c)) = v;
    }
  }
  return grid;
}

inline std::string write_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.cols) + " " +
                    std::to_string(img.rows) + "\n255\n";
  out.append(img.values.begin(), img.values.end());
  return out;
}

inline std::string write_mask(const InstanceMask& mask) {
  GrayImage img;
  img.rows = mask.rows;
  img.cols = mask.cols;
  img.values.assign(static_cast<std::size_t>(mask.rows) * mask.cols, 0);
  for (const auto& p : mask.pixels)
    img.values[static_cast<std::size_t>(p.row) * mask.cols + p.col] = 255;
  return write_pgm(img);
}

// Always little-endian (scale -1), bottom-up rows per the PFM convention.
inline std::string write_disparity(const DisparityMap& grid) {
  std::string out = "Pf\n" + std::to_string(grid.cols) + " " +
                    std::to_string(grid.rows) + "\n-1.0\n";
  const bool host_little = std::endian::native == std::endian::little;
  for (int file_row = 0; file_row < grid.rows; ++file_row) {
    const int mem_row = grid.rows - 1 - file_row;
    for (int c = 0; c < grid.cols; ++c) {
      const float v = static_cast<float>(grid.at(mem_row, c));
      unsigned char b[4];
      std::memcpy(b, &v, 4);
      if (!host_little) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
      out.append(reinterpret_cast<const char*>(b), 4);
    }
  }
  return out;
}

}  // namespace occdepth
