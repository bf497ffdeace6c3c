#include "lpae/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include <zlib.h>

namespace lpae {

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t len) : data_(data), len_(len) {}

  void need(std::size_t n) const {
    if (len_ - pos_ < n) throw DataError("container: truncated");
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == len_; }

 private:
  const std::uint8_t* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

std::string magic_str(const Magic& m) { return std::string(m.begin(), m.end()); }

}  // namespace

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t len) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, data, static_cast<uInt>(len));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_container(const Magic& magic, const std::vector<NamedTensor>& tensors) {
  Writer w;
  w.bytes(magic.data(), magic.size());
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ShapeError("container: tensor name too long");
    }
    if (t.dims.size() > std::numeric_limits<std::uint8_t>::max()) {
      throw ShapeError("container: tensor rank too large");
    }
    std::size_t count = 1;
    for (auto d : t.dims) count *= d;
    if (count != t.values.size()) {
      throw ShapeError("container: tensor '" + t.name + "' dims do not match its value count");
    }
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.values) w.f32(v);
  }
  auto& buf = w.buffer();
  w.u32(crc32_of(buf.data(), buf.size()));
  return std::move(buf);
}

std::vector<NamedTensor> decode_container(const Magic& magic, const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) throw DataError("container: truncated (" + std::to_string(bytes.size()) + " bytes)");
  if (!std::equal(magic.begin(), magic.end(), bytes.begin())) {
    throw DataError("container: bad magic, expected '" + magic_str(magic) + "'");
  }
  const std::size_t body = bytes.size() - 4;
  Reader tail(bytes.data() + body, 4);
  const std::uint32_t stored = tail.u32();
  if (stored != crc32_of(bytes.data(), body)) throw DataError("container: CRC-32 mismatch");

  Reader r(bytes.data(), body);
  r.str(4);
  const std::uint32_t version = r.u32();
  if (version != kContainerVersion) {
    throw DataError("container: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str(r.u16());
    const std::uint8_t rank = r.u8();
    std::size_t numel = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      t.dims.push_back(r.u32());
      numel *= t.dims.back();
    }
    r.need(numel * 4);
    t.values.resize(numel);
    for (auto& v : t.values) v = r.f32();
    out.push_back(std::move(t));
  }
  if (!r.done()) throw DataError("container: trailing bytes before checksum");
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_container(const std::filesystem::path& path, const Magic& magic,
                     const std::vector<NamedTensor>& tensors) {
  write_file_atomic(path, encode_container(magic, tensors));
}

std::vector<NamedTensor> read_container(const std::filesystem::path& path, const Magic& magic) {
  try {
    return decode_container(magic, read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<NamedTensor> snapshot(const std::vector<ParamView>& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    out.push_back(NamedTensor{p.name, p.dims, std::vector<double>(p.values.begin(), p.values.end())});
  }
  return out;
}

void restore(const std::vector<NamedTensor>& tensors, const std::vector<ParamView>& params) {
  if (tensors.size() != params.size()) {
    throw DataError("checkpoint: expected " + std::to_string(params.size()) + " tensors, found " +
                    std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (tensors[i].name != params[i].name || tensors[i].dims != params[i].dims) {
      throw DataError("checkpoint: shape table mismatch at '" + tensors[i].name + "' (expected '" +
                      params[i].name + "')");
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::ranges::copy(tensors[i].values, params[i].values.begin());
  }
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  const Shape s = t.shape();
  write_container(path, kMagicTensor,
                  {NamedTensor{"tensor", {s.n, s.c, s.h, s.w},
                               std::vector<double>(t.data().begin(), t.data().end())}});
}

Tensor load_tensor(const std::filesystem::path& path) {
  auto tensors = read_container(path, kMagicTensor);
  if (tensors.size() != 1 || tensors[0].dims.size() != 4) {
    throw DataError(path.string() + ": expected one rank-4 tensor");
  }
  const auto& d = tensors[0].dims;
  return Tensor(Shape{d[0], d[1], d[2], d[3]}, std::move(tensors[0].values));
}

}  // namespace lpae
