#pragma once

#include <Eigen/Core>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/core/error.hpp"

namespace swarm::featnet {

// Binary parameter container (all integers and doubles little-endian):
//   "SWRMCKPT"  u32 version  u64 meta length  meta bytes (UTF-8 JSON)
//   u32 tensor count, then per tensor:
//     u32 name length  name  u32 rank (= 2)  u64 rows  u64 cols  rows*cols f64, column-major
//   u64 FNV-1a of every preceding byte
inline constexpr std::array<char, 8> kCheckpointMagic = {'S', 'W', 'R', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

struct Checkpoint {
  std::uint32_t version{kCheckpointVersion};
  std::string meta;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& n) const {
    for (const auto& t : tensors)
      if (t.name == n) return &t;
    return nullptr;
  }
};

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

namespace detail {

template <class T>
void put(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double d) { put(out, std::bit_cast<std::uint64_t>(d)); }

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(b_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= b_.size(), ErrorCode::kFormat, "checkpoint truncated");
  }
  std::string_view b_;
  std::size_t pos_{0};
};

}  // namespace detail

inline std::string encode_checkpoint(const Checkpoint& c) {
  std::string out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put<std::uint32_t>(out, c.version);
  detail::put<std::uint64_t>(out, c.meta.size());
  out += c.meta;
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    detail::put<std::uint32_t>(out, 2);
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(t.value.rows()));
    detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(t.value.cols()));
    for (Eigen::Index i = 0; i < t.value.size(); ++i) detail::put_f64(out, t.value.data()[i]);
  }
  detail::put<std::uint64_t>(out, fnv1a(out));
  return out;
}

inline Checkpoint decode_checkpoint(std::string_view bytes) {
  detail::Reader r(bytes);
  const std::string magic = r.bytes(kCheckpointMagic.size());
  require(std::equal(magic.begin(), magic.end(), kCheckpointMagic.begin()), ErrorCode::kFormat,
          "not a checkpoint file");
  Checkpoint c;
  c.version = r.get<std::uint32_t>();
  require(c.version == kCheckpointVersion, ErrorCode::kFormat,
          "unsupported checkpoint version " + std::to_string(c.version));
  c.meta = r.bytes(r.get<std::uint64_t>());
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedTensor t;
    t.name = r.bytes(r.get<std::uint32_t>());
    require(r.get<std::uint32_t>() == 2, ErrorCode::kFormat, "tensor rank must be 2");
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    require(rows * cols * 8 <= r.remaining(), ErrorCode::kFormat, "checkpoint truncated");
    t.value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = r.get_f64();
    c.tensors.push_back(std::move(t));
  }
  const std::size_t body = r.pos();
  const auto stored = r.get<std::uint64_t>();
  require(stored == fnv1a(bytes.substr(0, body)), ErrorCode::kFormat, "checkpoint checksum mismatch");
  require(r.remaining() == 0, ErrorCode::kFormat, "trailing bytes after checkpoint");
  return c;
}

inline void write_checkpoint_file(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  const std::string b = encode_checkpoint(c);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for " + path);
}

inline std::string read_file_bytes(const std::string& path, ErrorCode missing = ErrorCode::kIo) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), missing, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline Checkpoint read_checkpoint_file(const std::string& path) {
  return decode_checkpoint(read_file_bytes(path, ErrorCode::kMissingCheckpoint));
}

// Copies every parameter of `model` into a checkpoint; names must be unique.
template <class Model>
void append_parameters(Checkpoint& c, const Model& model, const std::string& prefix = "") {
  model.for_each_parameter([&](const std::string& n, const auto& t) {
    require(c.find(prefix + n) == nullptr, ErrorCode::kFormat, "duplicate tensor name " + prefix + n);
    c.tensors.push_back({prefix + n, t.value});
  });
}

// Loads parameters by name, checking the shape manifest.
template <class Model>
void restore_parameters(const Checkpoint& c, Model& model, const std::string& prefix = "") {
  model.for_each_parameter([&](const std::string& n, auto& t) {
    const NamedTensor* src = c.find(prefix + n);
    require(src != nullptr, ErrorCode::kFormat, "checkpoint lacks tensor " + prefix + n);
    require(src->value.rows() == t.value.rows() && src->value.cols() == t.value.cols(), ErrorCode::kFormat,
            "shape mismatch for " + prefix + n);
    t.value = src->value;
  });
}

}  // namespace swarm::featnet
