#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pcn {

// Rows are examples, columns are units.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
// One flag per input coordinate; true means the coordinate is clamped.
using PixelMask = Eigen::Array<bool, 1, Eigen::Dynamic>;

using Rng = std::mt19937_64;

enum class Activation { Identity, Tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Layer widths, bottom (input) to top.
struct Dims {
  std::size_t input = 784;
  std::size_t hidden = 35;
  std::size_t top = 2;

  friend bool operator==(const Dims&, const Dims&) = default;
};

// Shape disagreement between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A NaN or Inf appeared where finite values are required.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Derives a decorrelated seed for stream `index` from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

void require_finite(const Matrix& m, const char* what);
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const char* what);

}  // namespace pcn
