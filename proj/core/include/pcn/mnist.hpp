#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pcn/types.hpp"

namespace pcn {

// ---------------------------------------------------------------------------
// IDX container
// ---------------------------------------------------------------------------

class IdxError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, UnsupportedType, Truncated, TrailingData };

  IdxError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct IdxArray {
  std::uint8_t type_code = 0x08;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t count() const { return dims.empty() ? 0 : dims.front(); }
};

// Header: 0x00 0x00 <type> <ndims>, then ndims big-endian u32 sizes. Only
// unsigned-byte payloads (type 0x08) are accepted.
IdxArray parse_idx(std::span<const std::uint8_t> bytes);

// Reads a whole file, transparently inflating gzip content.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Raw and split datasets
// ---------------------------------------------------------------------------

struct RawImageSet {
  std::size_t rows = 28;
  std::size_t cols = 28;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
  std::vector<std::uint8_t> labels;  // count

  std::size_t count() const { return labels.size(); }
  std::size_t pixels_per_image() const { return rows * cols; }
};

RawImageSet make_raw_image_set(const IdxArray& images, const IdxArray& labels);

struct MnistFileNames {
  std::string train_images = "train-images-idx3-ubyte";
  std::string train_labels = "train-labels-idx1-ubyte";
  std::string test_images = "t10k-images-idx3-ubyte";
  std::string test_labels = "t10k-labels-idx1-ubyte";
};

// Finds `name` or `name.gz` under `dir`; throws naming the missing path.
std::filesystem::path resolve_data_file(const std::filesystem::path& dir,
                                        const std::string& name);

struct MnistRaw {
  RawImageSet train;
  RawImageSet test;
  // crc32 of each decompressed file, keyed by file name
  std::vector<std::pair<std::string, std::uint32_t>> digests;
};

MnistRaw load_mnist(const std::filesystem::path& dir,
                    const MnistFileNames& names = {});

struct LabeledSet {
  Matrix images;                    // count x pixels, values in [0, 1]
  std::vector<int> labels;          // 0 for the first digit, 1 for the second
  std::vector<std::size_t> source;  // index in the originating raw set

  std::size_t size() const { return labels.size(); }
};

// First `n` examples (all of them if n == 0 or n >= size).
LabeledSet take_prefix(const LabeledSet& set, std::size_t n);
LabeledSet gather(const LabeledSet& set, std::span<const std::size_t> rows);

struct SplitSizes {
  std::size_t train = 10097;
  std::size_t validation = 2010;
  std::size_t test = 2010;
};

struct DatasetSplits {
  LabeledSet train;
  LabeledSet validation;
  LabeledSet test;
  std::uint64_t split_seed = 0;
};

// Keeps the two digits, shuffles the filtered training side with
// `split_seed`, and cuts it into train/validation prefixes. Filtered counts
// must match `sizes` exactly.
DatasetSplits build_splits(const RawImageSet& train_raw,
                           const RawImageSet& test_raw,
                           std::array<int, 2> digits, std::uint64_t split_seed,
                           const SplitSizes& sizes = {});

// Index batches covering 0..count-1 exactly once. The final batch may be
// short.
std::vector<std::vector<std::size_t>> make_batches(std::size_t count,
                                                   std::size_t batch_size,
                                                   std::uint64_t shuffle_seed,
                                                   bool shuffle);

}  // namespace pcn
