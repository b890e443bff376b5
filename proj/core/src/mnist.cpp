#include "pcn/mnist.hpp"

#include <zlib.h>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace pcn {

namespace {

std::string hex_byte(std::uint8_t b) {
  static const char* digits = "0123456789abcdef";
  return {digits[b >> 4], digits[b & 0xf]};
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) {
    throw IdxError(IdxError::Kind::Truncated, "idx: file shorter than magic");
  }
  if (bytes[0] != 0 || bytes[1] != 0) {
    throw IdxError(IdxError::Kind::BadMagic,
                   "idx: bad magic " + hex_byte(bytes[0]) + hex_byte(bytes[1]) +
                       ", expected 0000");
  }
  if (bytes[2] != 0x08) {
    throw IdxError(IdxError::Kind::UnsupportedType,
                   "idx: unsupported type code 0x" + hex_byte(bytes[2]) +
                       " (only unsigned byte 0x08)");
  }
  const std::size_t ndims = bytes[3];
  if (ndims == 0) {
    throw IdxError(IdxError::Kind::BadMagic, "idx: zero dimensions");
  }
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) {
    throw IdxError(IdxError::Kind::Truncated, "idx: truncated header");
  }

  IdxArray out;
  out.type_code = bytes[2];
  std::size_t payload = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    const auto* p = bytes.data() + 4 + 4 * i;
    const std::uint32_t d = (std::uint32_t{p[0]} << 24) |
                            (std::uint32_t{p[1]} << 16) |
                            (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
    out.dims.push_back(d);
    payload *= d;
  }
  const std::size_t available = bytes.size() - header;
  if (available < payload) {
    std::ostringstream os;
    os << "idx: truncated payload, header declares " << payload
       << " bytes but only " << available << " present";
    throw IdxError(IdxError::Kind::Truncated, os.str());
  }
  if (available > payload) {
    std::ostringstream os;
    os << "idx: " << (available - payload) << " trailing bytes after payload";
    throw IdxError(IdxError::Kind::TrailingData, os.str());
  }
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header),
                  bytes.end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 16);
  for (;;) {
    const int n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      int code = 0;
      std::string msg = gzerror(f, &code);
      gzclose(f);
      throw std::runtime_error("read error in " + path.string() + ": " + msg);
    }
    if (n == 0) break;
    out.insert(out.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(f);
  return out;
}

RawImageSet make_raw_image_set(const IdxArray& images, const IdxArray& labels) {
  if (images.dims.size() != 3) {
    throw std::invalid_argument("image file must have 3 dimensions");
  }
  if (labels.dims.size() != 1) {
    throw std::invalid_argument("label file must have 1 dimension");
  }
  if (images.dims[0] != labels.dims[0]) {
    std::ostringstream os;
    os << "image count " << images.dims[0] << " != label count "
       << labels.dims[0];
    throw std::invalid_argument(os.str());
  }
  RawImageSet raw;
  raw.rows = images.dims[1];
  raw.cols = images.dims[2];
  raw.pixels = images.data;
  raw.labels = labels.data;
  return raw;
}

std::filesystem::path resolve_data_file(const std::filesystem::path& dir,
                                        const std::string& name) {
  const auto plain = dir / name;
  if (std::filesystem::exists(plain)) return plain;
  const auto gz = dir / (name + ".gz");
  if (std::filesystem::exists(gz)) return gz;
  throw std::runtime_error("missing MNIST file: " + plain.string() +
                           " (or .gz)");
}

namespace {

std::pair<IdxArray, std::uint32_t> load_idx(const std::filesystem::path& p) {
  const auto bytes = read_file_bytes(p);
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
  try {
    return {parse_idx(bytes), crc};
  } catch (const IdxError& e) {
    throw IdxError(e.kind(), p.string() + ": " + e.what());
  }
}

}  // namespace

MnistRaw load_mnist(const std::filesystem::path& dir,
                    const MnistFileNames& names) {
  MnistRaw out;
  auto load_pair = [&](const std::string& img, const std::string& lab) {
    auto [images, crc_i] = load_idx(resolve_data_file(dir, img));
    auto [labels, crc_l] = load_idx(resolve_data_file(dir, lab));
    out.digests.emplace_back(img, crc_i);
    out.digests.emplace_back(lab, crc_l);
    return make_raw_image_set(images, labels);
  };
  out.train = load_pair(names.train_images, names.train_labels);
  out.test = load_pair(names.test_images, names.test_labels);
  return out;
}

LabeledSet gather(const LabeledSet& set, std::span<const std::size_t> rows) {
  LabeledSet out;
  out.images.resize(static_cast<Eigen::Index>(rows.size()), set.images.cols());
  out.labels.reserve(rows.size());
  out.source.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t r = rows[k];
    if (r >= set.size()) throw std::out_of_range("gather: row out of range");
    out.images.row(static_cast<Eigen::Index>(k)) =
        set.images.row(static_cast<Eigen::Index>(r));
    out.labels.push_back(set.labels[r]);
    out.source.push_back(set.source[r]);
  }
  return out;
}

LabeledSet take_prefix(const LabeledSet& set, std::size_t n) {
  if (n == 0 || n >= set.size()) return set;
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return gather(set, rows);
}

namespace {

LabeledSet filter_digits(const RawImageSet& raw, std::array<int, 2> digits) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < raw.count(); ++i) {
    if (raw.labels[i] == digits[0] || raw.labels[i] == digits[1]) {
      keep.push_back(i);
    }
  }
  const std::size_t ppi = raw.pixels_per_image();
  LabeledSet out;
  out.images.resize(static_cast<Eigen::Index>(keep.size()),
                    static_cast<Eigen::Index>(ppi));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::uint8_t* src = raw.pixels.data() + keep[k] * ppi;
    for (std::size_t j = 0; j < ppi; ++j) {
      out.images(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          static_cast<double>(src[j]) / 255.0;
    }
    out.labels.push_back(raw.labels[keep[k]] == digits[0] ? 0 : 1);
    out.source.push_back(keep[k]);
  }
  return out;
}

}  // namespace

DatasetSplits build_splits(const RawImageSet& train_raw,
                           const RawImageSet& test_raw,
                           std::array<int, 2> digits, std::uint64_t split_seed,
                           const SplitSizes& sizes) {
  LabeledSet train_side = filter_digits(train_raw, digits);
  LabeledSet test_side = filter_digits(test_raw, digits);

  if (train_side.size() != sizes.train + sizes.validation ||
      test_side.size() != sizes.test) {
    std::ostringstream os;
    os << "filtered split counts do not match: train-side "
       << train_side.size() << " (expected "
       << sizes.train + sizes.validation << "), test-side "
       << test_side.size() << " (expected " << sizes.test << ")";
    throw std::runtime_error(os.str());
  }

  std::vector<std::size_t> order(train_side.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(split_seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto cut = order.begin() + static_cast<std::ptrdiff_t>(sizes.train);
  const std::vector<std::size_t> train_rows(order.begin(), cut);
  const std::vector<std::size_t> val_rows(cut, order.end());

  DatasetSplits out;
  out.train = gather(train_side, train_rows);
  out.validation = gather(train_side, val_rows);
  out.test = std::move(test_side);
  out.split_seed = split_seed;
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t count,
                                                   std::size_t batch_size,
                                                   std::uint64_t shuffle_seed,
                                                   bool shuffle) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be > 0");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace pcn
