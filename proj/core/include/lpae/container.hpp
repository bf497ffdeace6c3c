#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lpae/nn.hpp"

namespace lpae {

/// Binary tensor container shared by checkpoints ("LPAE", "LPSR"),
/// tensor sidecars ("LPTN") and optimiser state ("LPOP").
///
/// Layout, all integers little-endian:
///   magic[4] | version u32 | count u32 |
///   count x ( name_len u16 | name utf-8 | rank u8 | dims u32 x rank | f32 x prod(dims) ) |
///   crc32 u32 over every preceding byte
using Magic = std::array<char, 4>;

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr Magic kMagicLpae{'L', 'P', 'A', 'E'};
inline constexpr Magic kMagicLpsr{'L', 'P', 'S', 'R'};
inline constexpr Magic kMagicTensor{'L', 'P', 'T', 'N'};
inline constexpr Magic kMagicOptim{'L', 'P', 'O', 'P'};

struct NamedTensor {
  std::string name;
  std::vector<std::size_t> dims;
  std::vector<double> values;  // f32-representable after a round trip
};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t len);

std::vector<std::uint8_t> encode_container(const Magic& magic, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_container(const Magic& magic, const std::vector<std::uint8_t>& bytes);

void write_container(const std::filesystem::path& path, const Magic& magic,
                     const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_container(const std::filesystem::path& path, const Magic& magic);

std::vector<NamedTensor> snapshot(const std::vector<ParamView>& params);
/// Copies `tensors` into `params`, requiring identical names and dims in order.
void restore(const std::vector<NamedTensor>& tensors, const std::vector<ParamView>& params);

/// Single-tensor sidecar files (magic "LPTN", one entry named "tensor").
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace lpae
