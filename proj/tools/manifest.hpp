#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include <lpae/optim.hpp>
#include <lpae/train.hpp>

namespace lpae::cli {

/// Hex SHA-1 of "blob <size>\0" + bytes, as `git hash-object` prints it.
std::string git_blob_sha1(const std::vector<std::uint8_t>& bytes);
std::string git_blob_sha1(const std::filesystem::path& file);

nlohmann::ordered_json config_json(const TrainConfig& cfg);
nlohmann::ordered_json epoch_json(const LpaeEpoch& e);
nlohmann::ordered_json epoch_json(const SrEpoch& e);

/// Pretty-printed, newline-terminated, written via rename.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

/// Shortest round-trip text for a double.
std::string num(double v);

class CsvLog {
 public:
  CsvLog(std::filesystem::path path, std::vector<std::string> columns);
  void row(const std::vector<double>& values);
  void commit() const;

 private:
  std::filesystem::path path_;
  std::string text_;
};

}  // namespace lpae::cli
