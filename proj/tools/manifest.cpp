#include "manifest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include <openssl/sha.h>

#include <lpae/container.hpp>

namespace lpae::cli {

std::string git_blob_sha1(const std::vector<std::uint8_t>& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  SHA_CTX ctx;
  SHA1_Init(&ctx);
  SHA1_Update(&ctx, header.data(), header.size());
  SHA1_Update(&ctx, bytes.data(), bytes.size());
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1_Final(digest, &ctx);
  std::string hex;
  char buf[3];
  for (unsigned char b : digest) {
    std::snprintf(buf, sizeof(buf), "%02x", b);
    hex += buf;
  }
  return hex;
}

std::string git_blob_sha1(const std::filesystem::path& file) { return git_blob_sha1(read_file(file)); }

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

nlohmann::ordered_json config_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  const std::string text = to_config_text(cfg);
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const std::string line = text.substr(start, end - start);
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = eq + 3 <= line.size() ? line.substr(eq + 3) : "";
    start = end == std::string::npos ? text.size() : end + 1;
  }
  return j;
}

namespace {

// JSON has no infinity; PSNR of a perfect batch is reported as null.
nlohmann::ordered_json finite(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json epoch_json(const LpaeEpoch& e) {
  return {{"epoch", e.epoch},         {"steps", e.steps},       {"lr", e.lr},
          {"l_r", e.loss.reconstruction}, {"l_e", e.loss.energy}, {"l_s", e.loss.sparsity},
          {"l_total", e.loss.total},  {"psnr", finite(e.psnr)}};
}

nlohmann::ordered_json epoch_json(const SrEpoch& e) {
  return {{"epoch", e.epoch},       {"steps", e.steps},     {"lr", e.lr},
          {"l_rec", e.reconstruction}, {"l_p", e.pyramid}, {"l_total", e.total},
          {"psnr", finite(e.psnr)}};
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  const std::string text = doc.dump(2) + "\n";
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

CsvLog::CsvLog(std::filesystem::path path, std::vector<std::string> columns) : path_(std::move(path)) {
  for (std::size_t i = 0; i < columns.size(); ++i) text_ += (i ? "," : "") + columns[i];
  text_ += "\n";
}

void CsvLog::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) text_ += (i ? "," : "") + num(values[i]);
  text_ += "\n";
}

void CsvLog::commit() const {
  write_file_atomic(path_, std::vector<std::uint8_t>(text_.begin(), text_.end()));
}

}  // namespace lpae::cli
