#pragma once

// PCN1 checkpoint layout (all integers little-endian):
//
//   "PCN1"                      4 bytes
//   format version              u32
//   layer count                 u32 (always 3)
//   dims                        u32 x 3, input to top
//   theta1, theta2              f64, row-major
//   adam flag                   u8 (0 or 1)
//   [m, v f64 row-major, t u64] per weight matrix, present iff flag == 1
//   manifest length             u32
//   manifest                    UTF-8 JSON text
//
// The activation and the Adam hyperparameters are read back from the
// manifest's "config" object.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcn/model.hpp"
#include "pcn/optim.hpp"

namespace pcn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamPair {
  AdamState theta1;
  AdamState theta2;

  friend bool operator==(const AdamPair&, const AdamPair&) = default;
};

struct Checkpoint {
  ModelParams params{Dims{}, Activation::Tanh};
  std::optional<AdamPair> adam;
  std::string manifest;  // JSON text

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& text);

}  // namespace pcn
