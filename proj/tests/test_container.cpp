#include <gtest/gtest.h>

#include <cstring>

#include <lpae/container.hpp>

#include "support.hpp"

using namespace lpae;

namespace {

std::vector<NamedTensor> sample_tensors() {
  return {NamedTensor{"alpha", {2, 3}, {1, 2, 3, 4, 5, -6.5}},
          NamedTensor{"beta", {1}, {0.25}},
          NamedTensor{"empty", {0}, {}}};
}

std::uint32_t u32_at(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

}  // namespace

TEST(Crc32, StandardCheckValue) {
  const char* s = "123456789";
  EXPECT_EQ(crc32_of(reinterpret_cast<const std::uint8_t*>(s), std::strlen(s)), 0xCBF43926u);
}

TEST(Container, LayoutIsLittleEndian) {
  auto bytes = encode_container(kMagicTensor, {NamedTensor{"x", {1}, {1.0}}});
  // magic 4 + version 4 + count 4 + name_len 2 + "x" + rank 1 + dim 4 + f32 4 + crc 4
  ASSERT_EQ(bytes.size(), 28u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "LPTN");
  EXPECT_EQ(u32_at(bytes, 4), 1u);
  EXPECT_EQ(u32_at(bytes, 8), 1u);
  EXPECT_EQ(bytes[12], 1);
  EXPECT_EQ(bytes[13], 0);
  EXPECT_EQ(bytes[14], 'x');
  EXPECT_EQ(bytes[15], 1);
  EXPECT_EQ(u32_at(bytes, 16), 1u);
  EXPECT_EQ(u32_at(bytes, 20), 0x3F800000u);  // 1.0f
  EXPECT_EQ(u32_at(bytes, 24), crc32_of(bytes.data(), 24));
}

TEST(Container, RoundTrip) {
  auto bytes = encode_container(kMagicLpae, sample_tensors());
  auto back = decode_container(kMagicLpae, bytes);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].name, "alpha");
  EXPECT_EQ(back[0].dims, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(back[0].values, sample_tensors()[0].values);
  EXPECT_EQ(encode_container(kMagicLpae, back), bytes);
}

TEST(Container, ValuesRoundToSinglePrecision) {
  auto back = decode_container(kMagicLpae, encode_container(kMagicLpae, {NamedTensor{"p", {1}, {0.1}}}));
  EXPECT_EQ(back[0].values[0], static_cast<double>(0.1f));
}

TEST(Container, DetectsEveryCorruptedByte) {
  auto bytes = encode_container(kMagicLpae, sample_tensors());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto bad = bytes;
    bad[i] ^= 0x10;
    EXPECT_THROW(decode_container(kMagicLpae, bad), DataError) << "byte " << i;
  }
}

TEST(Container, RejectsWrongMagicTruncationAndVersion) {
  auto bytes = encode_container(kMagicLpae, sample_tensors());
  EXPECT_THROW(decode_container(kMagicLpsr, bytes), DataError);
  for (std::size_t len : {0u, 3u, 15u, 20u}) {
    EXPECT_THROW(decode_container(kMagicLpae, std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + len)),
                 DataError);
  }
  auto v2 = bytes;
  v2[4] = 2;
  const auto crc = crc32_of(v2.data(), v2.size() - 4);
  for (int k = 0; k < 4; ++k) v2[v2.size() - 4 + k] = static_cast<std::uint8_t>(crc >> (8 * k));
  try {
    decode_container(kMagicLpae, v2);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Container, RejectsInconsistentTensor) {
  EXPECT_THROW(encode_container(kMagicLpae, {NamedTensor{"x", {2, 2}, {1, 2, 3}}}), ShapeError);
}

TEST(Container, RestoreChecksShapeTable) {
  std::vector<double> a(6), b(1);
  std::vector<ParamView> views{{"alpha", a, {2, 3}, true}, {"beta", b, {1}, false}};
  auto tensors = sample_tensors();
  tensors.pop_back();
  restore(tensors, views);
  EXPECT_EQ(a, tensors[0].values);
  tensors[1].name = "gamma";
  EXPECT_THROW(restore(tensors, views), DataError);
  tensors.pop_back();
  EXPECT_THROW(restore(tensors, views), DataError);
}

TEST(Sidecar, RoundTripIsBitExact) {
  auto dir = test::scratch_dir("sidecar");
  Rng rng(1);
  Tensor t = test::random_tensor(rng, {1, 3, 5, 7});
  for (auto& v : t.data()) v = static_cast<float>(v);
  save_tensor(dir / "a.lptn", t);
  Tensor back = load_tensor(dir / "a.lptn");
  EXPECT_EQ(back, t);
  save_tensor(dir / "b.lptn", back);
  EXPECT_EQ(read_file(dir / "a.lptn"), read_file(dir / "b.lptn"));
  auto raw = read_file(dir / "a.lptn");
  EXPECT_EQ(std::string(raw.begin(), raw.begin() + 4), "LPTN");
}

TEST(Sidecar, RejectsOtherContainers) {
  auto dir = test::scratch_dir("sidecar_bad");
  write_container(dir / "x.lptn", kMagicTensor, sample_tensors());
  EXPECT_THROW(load_tensor(dir / "x.lptn"), DataError);
  EXPECT_THROW(load_tensor(dir / "missing.lptn"), DataError);
}

TEST(AtomicWrite, LeavesNoTemporary) {
  auto dir = test::scratch_dir("atomic");
  write_file_atomic(dir / "f.bin", {1, 2, 3});
  write_file_atomic(dir / "f.bin", {4});
  EXPECT_EQ(read_file(dir / "f.bin"), std::vector<std::uint8_t>{4});
  std::size_t files = 0;
  for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
}
