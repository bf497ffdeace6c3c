#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

namespace lpae::cli {

namespace fs = std::filesystem;

struct Common {
  std::optional<std::uint64_t> seed;
  fs::path config;
  fs::path out;
};

struct TrainLpaeArgs {
  fs::path corpus;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> epochs;
  bool save_optimizer = false;
};

struct TrainSrArgs {
  fs::path checkpoint;
  fs::path corpus;
  std::optional<std::size_t> scale;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> epochs;
};

struct CodecArgs {
  fs::path checkpoint;
  fs::path image;     // encode input; decode: optional original
  fs::path in_dir;    // decode only
  std::size_t levels = 1;
};

struct SrArgs {
  fs::path checkpoint;
  fs::path embed;
  fs::path image;
  fs::path reference;
};

struct PyramidArgs {
  fs::path image;
  fs::path in_dir;
  std::size_t levels = 3;
};

struct FlopsArgs {
  std::vector<fs::path> specs;
  bool branches = false;
};

struct SynthArgs {
  std::size_t count = 8;
  std::size_t size = 96;
};

int cmd_train_lpae(const Common& c, const TrainLpaeArgs& a, std::ostream& out, std::ostream& err);
int cmd_train_sr(const Common& c, const TrainSrArgs& a, std::ostream& out, std::ostream& err);
int cmd_encode(const Common& c, const CodecArgs& a, std::ostream& out, std::ostream& err);
int cmd_decode(const Common& c, const CodecArgs& a, std::ostream& out, std::ostream& err);
int cmd_sr(const Common& c, const SrArgs& a, std::ostream& out, std::ostream& err);
int cmd_metrics(const Common& c, const fs::path& a, const fs::path& b, bool channels, std::ostream& out,
                std::ostream& err);
int cmd_flops(const Common& c, const FlopsArgs& a, std::ostream& out, std::ostream& err);
int cmd_pyramid(const Common& c, const PyramidArgs& a, std::ostream& out, std::ostream& err);
int cmd_synth(const Common& c, const SynthArgs& a, std::ostream& out, std::ostream& err);

}  // namespace lpae::cli

namespace lpae::cli {

// Bad flag combination detected after parsing; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lpae::cli
