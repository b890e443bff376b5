#include "pcn/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pcn/checkpoint.hpp"

namespace pcn {

std::vector<std::uint8_t> rescale_to_bytes(
    const Eigen::Ref<const Eigen::RowVectorXd>& image) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(image.size()), 0);
  if (image.size() == 0) return out;
  const double lo = image.minCoeff();
  const double hi = image.maxCoeff();
  if (!(hi > lo)) return out;
  const double scale = 255.0 / (hi - lo);
  for (Eigen::Index j = 0; j < image.size(); ++j) {
    const double v = std::round((image(j) - lo) * scale);
    out[static_cast<std::size_t>(j)] =
        static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

namespace {

std::size_t grid_rows(std::size_t count, std::size_t columns) {
  return (count + columns - 1) / columns;
}

std::size_t tile_origin(std::size_t slot, std::size_t extent,
                        std::size_t separator) {
  return separator + slot * (extent + separator);
}

}  // namespace

GrayImage tile_grid(const Matrix& images, const GridLayout& layout) {
  const std::size_t pixels = layout.tile_rows * layout.tile_cols;
  if (static_cast<std::size_t>(images.cols()) != pixels) {
    throw ShapeError("tile_grid: image width does not match tile size");
  }
  if (layout.columns == 0) throw std::invalid_argument("grid needs columns");
  const auto count = static_cast<std::size_t>(images.rows());
  const std::size_t cols = std::min(layout.columns, std::max<std::size_t>(count, 1));
  const std::size_t rows = std::max<std::size_t>(grid_rows(count, cols), 1);

  GrayImage g;
  g.width = layout.separator + cols * (layout.tile_cols + layout.separator);
  g.height = layout.separator + rows * (layout.tile_rows + layout.separator);
  g.pixels.assign(g.width * g.height, layout.separator_value);

  for (std::size_t i = 0; i < count; ++i) {
    const auto bytes = rescale_to_bytes(images.row(static_cast<Eigen::Index>(i)));
    const std::size_t x0 = tile_origin(i % cols, layout.tile_cols, layout.separator);
    const std::size_t y0 = tile_origin(i / cols, layout.tile_rows, layout.separator);
    for (std::size_t r = 0; r < layout.tile_rows; ++r) {
      for (std::size_t c = 0; c < layout.tile_cols; ++c) {
        g.pixels[(y0 + r) * g.width + x0 + c] = bytes[r * layout.tile_cols + c];
      }
    }
  }
  return g;
}

std::uint8_t tile_pixel(const GrayImage& grid, const GridLayout& layout,
                        std::size_t index, std::size_t r, std::size_t c) {
  const std::size_t cols =
      (grid.width - layout.separator) / (layout.tile_cols + layout.separator);
  const std::size_t x0 = tile_origin(index % cols, layout.tile_cols, layout.separator);
  const std::size_t y0 = tile_origin(index / cols, layout.tile_rows, layout.separator);
  return grid.at(x0 + c, y0 + r);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    std::size_t v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      ++pos;
    }
    if (pos == start) throw std::runtime_error("pgm: malformed header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw std::runtime_error("pgm: not a binary P5 file");
  }
  pos = 2;
  GrayImage g;
  g.width = number();
  g.height = number();
  const std::size_t maxval = number();
  if (maxval != 255) throw std::runtime_error("pgm: only maxval 255 supported");
  ++pos;  // single whitespace before the raster
  if (pos > bytes.size() || bytes.size() - pos != g.width * g.height) {
    throw std::runtime_error("pgm: payload length does not match header");
  }
  g.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return g;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  write_file_atomic(path, encode_pgm(image));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header)
    : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::invalid_argument("csv row has " + std::to_string(cells.size()) +
                                " cells, header has " +
                                std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const {
  write_file_atomic(path, str());
}

}  // namespace pcn
