#include "commands.hpp"

#include <bit>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <sstream>

#include <lpae/analysis.hpp>
#include <lpae/container.hpp>
#include <lpae/image_io.hpp>
#include <lpae/model.hpp>
#include <lpae/pyramid.hpp>
#include <lpae/sr.hpp>
#include <lpae/train.hpp>

#include "cli.hpp"
#include "manifest.hpp"

namespace lpae::cli {

namespace {

std::string fmt(const char* f, ...) {
  va_list args;
  va_start(args, f);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

const fs::path& require_out(const Common& c, const char* what) {
  if (c.out.empty()) throw UsageError(std::string("--out is required: ") + what);
  return c.out;
}

TrainConfig load_config(const Common& c) {
  TrainConfig cfg = c.config.empty() ? TrainConfig{} : load_train_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void apply_length(TrainConfig& cfg, const std::optional<std::size_t>& steps,
                  const std::optional<std::size_t>& epochs) {
  if (epochs) {
    cfg.epochs = *epochs;
    cfg.steps = 0;
  }
  if (steps) cfg.steps = *steps;
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string billions(std::uint64_t v) { return fmt("%.2fB", static_cast<double>(v) / 1e9); }

Tensor load_rgb(const fs::path& path) {
  Tensor t = load_image(path);
  if (t.shape().c != LpaeParams::kChannels) {
    throw DataError(path.string() + ": expected an RGB (P6) image, got " + to_string(t.shape()));
  }
  return t;
}

std::string shape_text(const Tensor& t) {
  return fmt("%zux%zu", t.shape().h, t.shape().w);
}

void write_report(const Common& c, const std::string& text) {
  if (c.out.empty()) return;
  ensure_parent(c.out);
  write_file_atomic(c.out, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string quality_line(const Tensor& a, const Tensor& b) {
  const double p = psnr(a, b);
  const bool has_ssim = a.shape().h >= 11 && a.shape().w >= 11;
  return "PSNR: " + format_psnr(p) + ", SSIM: " + (has_ssim ? fmt("%.4f", ssim(a, b)) : std::string("n/a"));
}

}  // namespace

int cmd_train_lpae(const Common& c, const TrainLpaeArgs& a, std::ostream& out, std::ostream&) {
  const fs::path& ckpt = require_out(c, "checkpoint path");
  if (a.corpus.empty()) throw UsageError("--corpus is required");
  TrainConfig cfg = load_config(c);
  apply_length(cfg, a.steps, a.epochs);
  cfg.validate();
  const Corpus corpus = Corpus::from_directory(a.corpus);

  const std::size_t total = total_steps(cfg, corpus.size());
  out << "corpus: " << corpus.size() << " images, " << total << " steps, batch " << cfg.batch << ", crop "
      << cfg.crop << ", seed " << cfg.seed << "\n";
  out << fmt("%6s %7s %10s %12s %12s %12s %12s %8s\n", "epoch", "steps", "lr", "l_r", "l_e", "l_s", "l_total",
             "psnr");
  CsvLog csv(sibling(ckpt, ".csv"), {"epoch", "steps", "lr", "l_r", "l_e", "l_s", "l_total", "psnr"});
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  auto on_epoch = [&](const LpaeEpoch& e) {
    out << fmt("%6zu %7zu %10.3e %12.6e %12.6e %12.6e %12.6e %8s\n", e.epoch, e.steps, e.lr,
               e.loss.reconstruction, e.loss.energy, e.loss.sparsity, e.loss.total, format_psnr(e.psnr).c_str())
        << std::flush;
    csv.row({static_cast<double>(e.epoch), static_cast<double>(e.steps), e.lr, e.loss.reconstruction,
             e.loss.energy, e.loss.sparsity, e.loss.total, e.psnr});
    epochs.push_back(epoch_json(e));
  };
  const LpaeTrainResult result = train_lpae(corpus, cfg, on_epoch);

  ensure_parent(ckpt);
  save_checkpoint(result.params, ckpt);
  csv.commit();
  nlohmann::ordered_json manifest;
  manifest["command"] = "train-lpae";
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_json(cfg);
  manifest["corpus_images"] = corpus.size();
  manifest["checkpoint"] = {{"file", ckpt.filename().string()},
                            {"sha1", git_blob_sha1(ckpt)},
                            {"params", LpaeParams::kParamCount}};
  manifest["initial"] = {{"l_r", result.initial.reconstruction},
                         {"l_e", result.initial.energy},
                         {"l_s", result.initial.sparsity},
                         {"l_total", result.initial.total}};
  manifest["epochs"] = epochs;
  write_json(sibling(ckpt, ".manifest.json"), manifest);

  const double final_total = result.history.empty() ? result.initial.total : result.history.back().loss.total;
  out << fmt("l_total: initial %.6e, final epoch %.6e\n", result.initial.total, final_total);
  out << "wrote " << ckpt.string() << " (sha1 " << manifest["checkpoint"]["sha1"].get<std::string>() << ")\n";
  return kOk;
}

int cmd_train_sr(const Common& c, const TrainSrArgs& a, std::ostream& out, std::ostream&) {
  const fs::path& embed_path = require_out(c, "embed checkpoint path");
  if (a.checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (a.corpus.empty()) throw UsageError("--corpus is required");
  TrainConfig cfg = load_config(c);
  apply_length(cfg, a.steps, a.epochs);
  if (a.scale) {
    if (*a.scale < 2 || !std::has_single_bit(*a.scale)) throw UsageError("--scale must be a power of two >= 2");
    cfg.levels = static_cast<std::size_t>(std::countr_zero(*a.scale));
  }
  cfg.validate();
  const LpaeParams lpae = load_checkpoint(a.checkpoint);
  const Corpus corpus = Corpus::from_directory(a.corpus);

  out << "corpus: " << corpus.size() << " images, " << total_steps(cfg, corpus.size()) << " steps, scale x"
      << (std::size_t{1} << cfg.levels) << ", seed " << cfg.seed
      << (cfg.freeze_decoder ? ", decoder frozen" : ", decoder trained") << "\n";
  out << fmt("%6s %7s %10s %12s %12s %12s %8s\n", "epoch", "steps", "lr", "l_rec", "l_p", "l_total", "psnr");
  CsvLog csv(sibling(embed_path, ".csv"), {"epoch", "steps", "lr", "l_rec", "l_p", "l_total", "psnr"});
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  auto on_epoch = [&](const SrEpoch& e) {
    out << fmt("%6zu %7zu %10.3e %12.6e %12.6e %12.6e %8s\n", e.epoch, e.steps, e.lr, e.reconstruction,
               e.pyramid, e.total, format_psnr(e.psnr).c_str())
        << std::flush;
    csv.row({static_cast<double>(e.epoch), static_cast<double>(e.steps), e.lr, e.reconstruction, e.pyramid,
             e.total, e.psnr});
    epochs.push_back(epoch_json(e));
  };
  const SrTrainResult result = train_sr(corpus, lpae, cfg, on_epoch);

  ensure_parent(embed_path);
  save_embed(result.embed, embed_path);
  nlohmann::ordered_json manifest;
  manifest["command"] = "train-sr";
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_json(cfg);
  manifest["corpus_images"] = corpus.size();
  manifest["lpae_checkpoint"] = {{"file", a.checkpoint.filename().string()},
                                 {"sha1", git_blob_sha1(a.checkpoint)}};
  manifest["embed"] = {{"file", embed_path.filename().string()},
                       {"sha1", git_blob_sha1(embed_path)},
                       {"params", result.embed.param_count()}};
  if (!cfg.freeze_decoder) {
    const fs::path decoder_path = fs::path(embed_path).replace_extension(".decoder.lpae");
    save_checkpoint(result.lpae, decoder_path);
    manifest["decoder"] = {{"file", decoder_path.filename().string()}, {"sha1", git_blob_sha1(decoder_path)}};
    out << "wrote " << decoder_path.string() << "\n";
  }
  manifest["initial_loss"] = result.initial_loss;
  manifest["epochs"] = epochs;
  csv.commit();
  write_json(sibling(embed_path, ".manifest.json"), manifest);

  const double final_total = result.history.empty() ? result.initial_loss : result.history.back().total;
  out << fmt("l_total: initial %.6e, final epoch %.6e\n", result.initial_loss, final_total);
  out << "wrote " << embed_path.string() << "\n";
  return kOk;
}

int cmd_encode(const Common& c, const CodecArgs& a, std::ostream& out, std::ostream&) {
  const fs::path& dir = require_out(c, "output directory");
  if (a.checkpoint.empty() || a.image.empty()) throw UsageError("--checkpoint and --image are required");
  const LpaeParams params = load_checkpoint(a.checkpoint);
  const Tensor image = load_rgb(a.image);
  require_pyramid_divisible(image.shape(), a.levels);
  const PyramidDecomposition pyr = encode_pyramid(params, image, a.levels);

  fs::create_directories(dir);
  save_tensor(dir / "coarsest.lptn", pyr.coarsest);
  save_image(pyr.coarsest, dir / "coarsest.ppm");
  out << fmt("%-12s %9s %12s\n", "component", "size", "mean_sq");
  out << fmt("%-12s %9s %12.4e\n", "coarsest", shape_text(pyr.coarsest).c_str(),
             sum_sq(pyr.coarsest) / static_cast<double>(pyr.coarsest.numel()));
  for (std::size_t k = 0; k < pyr.levels(); ++k) {
    const std::string name = "detail_" + std::to_string(k + 1);
    const Tensor& d = pyr.details[k];
    save_tensor(dir / (name + ".lptn"), d);
    save_image(add_scalar(d, 0.5), dir / (name + ".ppm"));
    out << fmt("%-12s %9s %12.4e\n", name.c_str(), shape_text(d).c_str(),
               sum_sq(d) / static_cast<double>(d.numel()));
  }
  out << "wrote " << 2 * (pyr.levels() + 1) << " files to " << dir.string() << "\n";
  return kOk;
}

int cmd_decode(const Common& c, const CodecArgs& a, std::ostream& out, std::ostream&) {
  const fs::path& target = require_out(c, "reconstruction image path");
  if (a.checkpoint.empty() || a.in_dir.empty()) throw UsageError("--checkpoint and --in are required");
  const LpaeParams params = load_checkpoint(a.checkpoint);
  PyramidDecomposition pyr;
  pyr.coarsest = load_tensor(a.in_dir / "coarsest.lptn");
  for (std::size_t k = 1; fs::exists(a.in_dir / ("detail_" + std::to_string(k) + ".lptn")); ++k) {
    pyr.details.push_back(load_tensor(a.in_dir / ("detail_" + std::to_string(k) + ".lptn")));
  }
  if (pyr.details.empty()) throw DataError(a.in_dir.string() + ": no detail_1.lptn sidecar");
  const Tensor recon = decode_pyramid(params, pyr);
  if (!recon.all_finite()) throw NumericError("decode: non-finite reconstruction");
  ensure_parent(target);
  save_image(recon, target);
  out << "decoded " << pyr.levels() << " level(s) to " << target.string() << " (" << shape_text(recon) << ")\n";
  if (!a.image.empty()) {
    const Tensor original = load_image(a.image);
    const Tensor written = load_image(target);
    require_same_shape(original, written, "decode --original");
    out << "PSNR: " << format_psnr(psnr(original, written)) << " dB\n";
  }
  return kOk;
}

int cmd_sr(const Common& c, const SrArgs& a, std::ostream& out, std::ostream&) {
  const fs::path& target = require_out(c, "output image path");
  if (a.checkpoint.empty() || a.embed.empty() || a.image.empty()) {
    throw UsageError("--checkpoint, --embed and --image are required");
  }
  const LpaeParams lpae = load_checkpoint(a.checkpoint);
  const EmbedParams embed = load_embed(a.embed);
  ensure_parent(target);
  const SuperResolveReport r = super_resolve(embed, lpae, a.image, target);
  std::string report = fmt("x%zu: %zux%zu -> %zux%zu\n", std::size_t{1} << embed.levels, r.input.h, r.input.w,
                           r.output.h, r.output.w);
  report += "wrote " + r.output_path.string() + " and " + r.bicubic_path.string() + "\n";
  if (!a.reference.empty()) {
    const Tensor ref = load_image(a.reference);
    const std::string sr_line = quality_line(ref, load_image(r.output_path));
    report += "sr      " + sr_line + "\n";
    report += "bicubic " + quality_line(ref, load_image(r.bicubic_path)) + "\n";
  }
  out << report;
  return kOk;
}

int cmd_metrics(const Common& c, const fs::path& a, const fs::path& b, bool channels, std::ostream& out,
                std::ostream&) {
  const Tensor x = load_image(a);
  const Tensor y = load_image(b);
  require_same_shape(x, y, "metrics");
  std::string report = quality_line(x, y) + "\n";
  if (channels) {
    for (std::size_t ch = 0; ch < x.shape().c; ++ch) {
      report += "  channel " + std::to_string(ch) + ": " +
                quality_line(slice_channels(x, ch, 1), slice_channels(y, ch, 1)) + "\n";
    }
  }
  out << report;
  write_report(c, report);
  return kOk;
}

int cmd_flops(const Common& c, const FlopsArgs& a, std::ostream& out, std::ostream& err) {
  if (a.specs.empty() && !a.branches) throw UsageError("flops needs a netspec file or --branches");
  if (a.specs.size() > 2) throw UsageError("flops takes at most two netspec files");
  std::string report;
  std::vector<std::uint64_t> costs;
  for (const auto& path : a.specs) {
    const NetSpec spec = load_netspec(path);
    if (spec.layers.empty()) err << "warning: " << path.string() << " has no layers; complexity is 0\n";
    const auto breaks = channel_chain_breaks(spec);
    if (!breaks.empty()) {
      err << "warning: " << path.string() << ": channel chain breaks at layer";
      for (auto b : breaks) err << " " << b;
      err << "\n";
    }
    const std::uint64_t n = complexity(spec);
    costs.push_back(n);
    report += fmt("%s: %zu layers, complexity %llu (%s), FLOPs %llu (%s)\n", path.filename().string().c_str(),
                  spec.layers.size(), static_cast<unsigned long long>(n), billions(n).c_str(),
                  static_cast<unsigned long long>(2 * n), billions(2 * n).c_str());
  }
  if (costs.size() == 2) {
    report += fmt("acceleration rate: %.4f\n", acceleration_rate(static_cast<double>(costs[0]),
                                                                 static_cast<double>(costs[1])));
  }
  if (a.branches) {
    auto line = [](const char* name, const BranchFractions& f) {
      return fmt("%s branches: approx %.6f, detail %.6f, total %.6f, rate %.4f\n", name, f.approx, f.detail,
                 f.total(), acceleration_rate(1.0, f.total()));
    };
    report += line("lpae", branch_fractions());
    report += line("wavelet", branch_fractions(wavelet_branch_model()));
  }
  out << report;
  write_report(c, report);
  return kOk;
}

int cmd_pyramid(const Common& c, const PyramidArgs& a, std::ostream& out, std::ostream&) {
  const fs::path& target = require_out(c, "output directory (build) or image path (collapse)");
  if (a.image.empty() == a.in_dir.empty()) throw UsageError("pyramid needs exactly one of --image or --in");
  if (!a.image.empty()) {
    const Tensor image = load_image(a.image);
    require_pyramid_divisible(image.shape(), a.levels);
    const PyramidDecomposition pyr = lp_build(image, a.levels);
    fs::create_directories(target);
    const std::string ext = image.shape().c == 1 ? ".pgm" : ".ppm";
    save_tensor(target / "coarsest.lptn", pyr.coarsest);
    save_image(pyr.coarsest, target / ("coarsest" + ext));
    for (std::size_t k = 0; k < pyr.levels(); ++k) {
      const std::string name = "detail_" + std::to_string(k + 1);
      save_tensor(target / (name + ".lptn"), pyr.details[k]);
      save_image(add_scalar(pyr.details[k], 0.5), target / (name + ext));
      out << fmt("%-10s %9s max|d| %.4e\n", name.c_str(), shape_text(pyr.details[k]).c_str(),
                 max_abs(pyr.details[k]));
    }
    out << fmt("%-10s %9s\n", "coarsest", shape_text(pyr.coarsest).c_str());
    out << fmt("max reconstruction error: %.3e\n", max_abs_diff(lp_collapse(pyr), image));
    return kOk;
  }
  PyramidDecomposition pyr;
  pyr.coarsest = load_tensor(a.in_dir / "coarsest.lptn");
  for (std::size_t k = 1; fs::exists(a.in_dir / ("detail_" + std::to_string(k) + ".lptn")); ++k) {
    pyr.details.push_back(load_tensor(a.in_dir / ("detail_" + std::to_string(k) + ".lptn")));
  }
  const Tensor image = lp_collapse(pyr);
  ensure_parent(target);
  save_image(image, target);
  out << "collapsed " << pyr.levels() << " level(s) to " << target.string() << " (" << shape_text(image) << ")\n";
  return kOk;
}

int cmd_synth(const Common& c, const SynthArgs& a, std::ostream& out, std::ostream&) {
  const fs::path& dir = require_out(c, "corpus directory");
  const auto files = write_synthetic_corpus(dir, a.count, a.size, c.seed.value_or(1));
  out << "wrote " << files.size() << " images of " << a.size << "x" << a.size << " to " << dir.string() << "\n";
  return kOk;
}

}  // namespace lpae::cli
