#include "pcn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pcn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void matrix(const Matrix& m) {
    bytes(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void bytes(void* p, std::size_t n) {
    if (pos_ + n > in_.size()) {
      throw CheckpointError("checkpoint truncated at byte " +
                            std::to_string(pos_));
    }
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    bytes(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    return m;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes("PCN1", 4);
  w.u32(kCheckpointVersion);
  w.u32(3);
  const Dims& d = ckpt.params.dims();
  w.u32(static_cast<std::uint32_t>(d.input));
  w.u32(static_cast<std::uint32_t>(d.hidden));
  w.u32(static_cast<std::uint32_t>(d.top));
  w.matrix(ckpt.params.theta1());
  w.matrix(ckpt.params.theta2());
  w.u8(ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    for (const AdamState* s : {&ckpt.adam->theta1, &ckpt.adam->theta2}) {
      w.matrix(s->m);
      w.matrix(s->v);
      w.u64(s->t);
    }
  }
  w.u32(static_cast<std::uint32_t>(ckpt.manifest.size()));
  w.bytes(ckpt.manifest.data(), ckpt.manifest.size());
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "PCN1", 4) != 0) {
    throw CheckpointError("not a PCN1 checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  const std::uint32_t layers = r.u32();
  if (layers != 3) {
    throw CheckpointError("unsupported layer count " + std::to_string(layers));
  }
  const auto in = static_cast<Eigen::Index>(r.u32());
  const auto hid = static_cast<Eigen::Index>(r.u32());
  const auto top = static_cast<Eigen::Index>(r.u32());
  Matrix t1 = r.matrix(in, hid);
  Matrix t2 = r.matrix(hid, top);
  const std::uint8_t has_adam = r.u8();
  if (has_adam > 1) throw CheckpointError("bad adam flag");

  std::optional<AdamPair> adam;
  if (has_adam) {
    AdamPair p;
    p.theta1.m = r.matrix(in, hid);
    p.theta1.v = r.matrix(in, hid);
    p.theta1.t = r.u64();
    p.theta2.m = r.matrix(hid, top);
    p.theta2.v = r.matrix(hid, top);
    p.theta2.t = r.u64();
    adam = std::move(p);
  }
  const std::uint32_t len = r.u32();
  std::string manifest(len, '\0');
  r.bytes(manifest.data(), len);
  if (!r.done()) throw CheckpointError("trailing bytes after manifest");

  Activation act = Activation::Tanh;
  if (!manifest.empty()) {
    const auto j = nlohmann::json::parse(manifest, nullptr, false);
    if (j.is_discarded()) throw CheckpointError("manifest is not valid JSON");
    if (j.contains("config")) {
      const auto& c = j["config"];
      if (c.contains("activation")) {
        act = activation_from_string(c["activation"].get<std::string>());
      }
      if (adam && c.contains("adam")) {
        AdamConfig ac;
        ac.rate = c["adam"].value("rate", ac.rate);
        ac.decay1 = c["adam"].value("decay1", ac.decay1);
        ac.decay2 = c["adam"].value("decay2", ac.decay2);
        ac.epsilon = c["adam"].value("epsilon", ac.epsilon);
        adam->theta1.config = ac;
        adam->theta2.config = ac;
      }
    }
  }

  Checkpoint out;
  out.params = ModelParams(std::move(t1), std::move(t2), act);
  out.adam = std::move(adam);
  out.manifest = std::move(manifest);
  return out;
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& text) {
  write_file_atomic(
      path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                      text.size()));
}

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace pcn
