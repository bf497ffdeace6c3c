#include "cli.hpp"

#include <algorithm>
#include <exception>

#include <CLI11.hpp>

#include <lpae/error.hpp>

#include "commands.hpp"

namespace lpae::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laplacian-pyramid-like autoencoder toolkit", "lpae"};
  app.fallthrough();
  app.require_subcommand(1);

  Common common;
  app.add_option("--seed", common.seed, "RNG seed (overrides the config)");
  app.add_option("--config", common.config, "key = value training config");
  app.add_option("--out", common.out, "output file or directory");

  TrainLpaeArgs train;
  auto* train_cmd = app.add_subcommand("train-lpae", "train the autoencoder on a corpus");
  train_cmd->add_option("--corpus", train.corpus, "directory of .ppm/.pgm images")->required();
  train_cmd->add_option("--steps", train.steps, "total optimiser steps");
  train_cmd->add_option("--epochs", train.epochs, "epochs when --steps is not given");

  TrainSrArgs train_sr;
  auto* train_sr_cmd = app.add_subcommand("train-sr", "train the super-resolution embedding");
  train_sr_cmd->add_option("--checkpoint", train_sr.checkpoint, "LPAE checkpoint")->required();
  train_sr_cmd->add_option("--corpus", train_sr.corpus, "directory of HR images")->required();
  train_sr_cmd->add_option("--scale", train_sr.scale, "2, 4, 8, ...");
  train_sr_cmd->add_option("--steps", train_sr.steps, "total optimiser steps");
  train_sr_cmd->add_option("--epochs", train_sr.epochs, "epochs when --steps is not given");

  CodecArgs codec;
  auto* encode_cmd = app.add_subcommand("encode", "decompose an image into LPAE pyramid components");
  encode_cmd->add_option("--checkpoint", codec.checkpoint)->required();
  encode_cmd->add_option("--image", codec.image)->required();
  encode_cmd->add_option("--levels,-K", codec.levels, "pyramid levels")->check(CLI::Range(1, 8));
  auto* decode_cmd = app.add_subcommand("decode", "rebuild an image from encode's sidecars");
  decode_cmd->add_option("--checkpoint", codec.checkpoint)->required();
  decode_cmd->add_option("--in", codec.in_dir, "directory written by encode")->required();
  decode_cmd->add_option("--original", codec.image, "print PSNR against this image");

  SrArgs sr;
  auto* sr_cmd = app.add_subcommand("sr", "super-resolve one image");
  sr_cmd->add_option("--checkpoint", sr.checkpoint, "LPAE checkpoint")->required();
  sr_cmd->add_option("--embed", sr.embed, "embedding checkpoint")->required();
  sr_cmd->add_option("--image", sr.image, "low-resolution input")->required();
  sr_cmd->add_option("--reference", sr.reference, "HR image to score against");

  std::string metric_a, metric_b;
  bool metric_channels = false;
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR and SSIM between two images");
  metrics_cmd->add_option("a", metric_a)->required();
  metrics_cmd->add_option("b", metric_b)->required();
  metrics_cmd->add_flag("--channels", metric_channels, "also report each channel");

  FlopsArgs flops;
  auto* flops_cmd = app.add_subcommand("flops", "complexity, FLOPs and acceleration rate of netspecs");
  flops_cmd->add_option("specs", flops.specs, "basic [connected]");
  flops_cmd->add_flag("--branches", flops.branches, "print decomposition branch fractions");

  PyramidArgs pyramid;
  auto* pyramid_cmd = app.add_subcommand("pyramid", "classical Laplacian pyramid build or collapse");
  pyramid_cmd->add_option("--image", pyramid.image, "build from this image");
  pyramid_cmd->add_option("--in", pyramid.in_dir, "collapse sidecars in this directory");
  pyramid_cmd->add_option("--levels,-K", pyramid.levels)->check(CLI::Range(1, 12));

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic training corpus");
  synth_cmd->add_option("--count", synth.count)->check(CLI::Range(1, 100000));
  synth_cmd->add_option("--size", synth.size)->check(CLI::Range(16, 8192));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train_lpae(common, train, out, err);
    if (*train_sr_cmd) return cmd_train_sr(common, train_sr, out, err);
    if (*encode_cmd) return cmd_encode(common, codec, out, err);
    if (*decode_cmd) return cmd_decode(common, codec, out, err);
    if (*sr_cmd) return cmd_sr(common, sr, out, err);
    if (*metrics_cmd) return cmd_metrics(common, metric_a, metric_b, metric_channels, out, err);
    if (*flops_cmd) return cmd_flops(common, flops, out, err);
    if (*pyramid_cmd) return cmd_pyramid(common, pyramid, out, err);
    if (*synth_cmd) return cmd_synth(common, synth, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ShapeError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace lpae::cli
