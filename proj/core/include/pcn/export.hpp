#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pcn/types.hpp"

namespace pcn {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(std::size_t x, std::size_t y) const {
    return pixels[y * width + x];
  }
};

struct GridLayout {
  std::size_t tile_rows = 28;
  std::size_t tile_cols = 28;
  std::size_t columns = 8;  // tiles per grid row
  std::size_t separator = 2;
  std::uint8_t separator_value = 128;
};

// Linear map of one image onto 0..255 (min -> 0, max -> 255). A constant
// image maps to all zeros.
std::vector<std::uint8_t> rescale_to_bytes(
    const Eigen::Ref<const Eigen::RowVectorXd>& image);

// Tiles rows of `images` left to right, top to bottom, each rescaled on its
// own.
GrayImage tile_grid(const Matrix& images, const GridLayout& layout);

// Pixel value of tile `index` at (r, c) inside a grid built with `layout`.
std::uint8_t tile_pixel(const GrayImage& grid, const GridLayout& layout,
                        std::size_t index, std::size_t r, std::size_t c);

std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace pcn
