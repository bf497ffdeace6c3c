#include "lpae/optim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace lpae {

double lr_at(double lr0, const StepSchedule& schedule, std::size_t epoch) {
  if (schedule.every_n_epochs == 0) return lr0;
  const auto drops = static_cast<double>(epoch / schedule.every_n_epochs);
  return lr0 * std::pow(schedule.factor, drops);
}

LpsrLossWeights TrainConfig::lpsr_weights() const {
  return LpsrLossWeights{sr_gamma, sr_delta,
                         lambdas.empty() ? LpsrLossWeights::default_lambdas(levels) : lambdas};
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw DataError("config: " + msg); };
  if (!(lr > 0.0)) fail("lr must be > 0");
  if (!(schedule.factor > 0.0 && schedule.factor <= 1.0)) fail("lr_step_factor must be in (0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (weight_decay < 0.0) fail("weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (batch == 0) fail("batch must be >= 1");
  if (epochs == 0 && steps == 0) fail("epochs or steps must be >= 1");
  if (crop == 0) fail("crop must be >= 1");
  if (levels < 1 || levels > 3) fail("levels must be 1, 2 or 3");
  if (crop % (std::size_t{1} << levels) != 0) {
    fail("crop " + std::to_string(crop) + " must be divisible by " +
         std::to_string(std::size_t{1} << levels));
  }
  if (!lambdas.empty() && lambdas.size() != levels) fail("lambdas must have one entry per level");
  if (embed_channels == 0) fail("embed_channels must be >= 1");
  for (double v : {lpae_weights.alpha, lpae_weights.beta, lpae_weights.gamma, sr_gamma, sr_delta})
    if (v < 0.0) fail("loss weights must be non-negative");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw DataError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw DataError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw DataError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const TrainConfig&)>;

struct Field {
  std::string key;
  Setter set;
  Getter get;
};

#define LPAE_DOUBLE_FIELD(name, member)                                                        \
  Field {                                                                                      \
    name, [](TrainConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }, \
        [](const TrainConfig& c) { return fmt(c.member); }                                     \
  }
#define LPAE_UINT_FIELD(name, member)                                                          \
  Field {                                                                                      \
    name, [](TrainConfig& c, const std::string& k, const std::string& v) { c.member = parse_uint(k, v); }, \
        [](const TrainConfig& c) { return std::to_string(c.member); }                          \
  }
#define LPAE_BOOL_FIELD(name, member)                                                          \
  Field {                                                                                      \
    name, [](TrainConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }, \
        [](const TrainConfig& c) { return std::string(c.member ? "true" : "false"); }          \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"optimizer",
            [](TrainConfig& c, const std::string&, const std::string& v) {
              if (v == "adam") c.optimizer = OptimizerKind::adam;
              else if (v == "sgd_momentum" || v == "sgd") c.optimizer = OptimizerKind::sgd_momentum;
              else throw DataError("config: unknown optimizer '" + v + "'");
            },
            [](const TrainConfig& c) {
              return std::string(c.optimizer == OptimizerKind::adam ? "adam" : "sgd_momentum");
            }},
      LPAE_DOUBLE_FIELD("lr", lr),
      LPAE_DOUBLE_FIELD("momentum", momentum),
      LPAE_DOUBLE_FIELD("weight_decay", weight_decay),
      LPAE_DOUBLE_FIELD("beta1", beta1),
      LPAE_DOUBLE_FIELD("beta2", beta2),
      LPAE_DOUBLE_FIELD("epsilon", epsilon),
      LPAE_UINT_FIELD("lr_step_every", schedule.every_n_epochs),
      LPAE_DOUBLE_FIELD("lr_step_factor", schedule.factor),
      LPAE_BOOL_FIELD("f32_state", f32_state),
      LPAE_UINT_FIELD("batch", batch),
      LPAE_UINT_FIELD("epochs", epochs),
      LPAE_UINT_FIELD("steps", steps),
      LPAE_UINT_FIELD("seed", seed),
      LPAE_UINT_FIELD("crop", crop),
      LPAE_BOOL_FIELD("flip_h", flip_h),
      LPAE_BOOL_FIELD("flip_v", flip_v),
      LPAE_DOUBLE_FIELD("alpha", lpae_weights.alpha),
      LPAE_DOUBLE_FIELD("beta", lpae_weights.beta),
      LPAE_DOUBLE_FIELD("gamma", lpae_weights.gamma),
      LPAE_UINT_FIELD("levels", levels),
      LPAE_DOUBLE_FIELD("sr_gamma", sr_gamma),
      LPAE_DOUBLE_FIELD("sr_delta", sr_delta),
      Field{"lambdas",
            [](TrainConfig& c, const std::string& k, const std::string& v) {
              c.lambdas.clear();
              std::stringstream ss(v);
              std::string item;
              while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (!item.empty()) c.lambdas.push_back(parse_double(k, item));
              }
            },
            [](const TrainConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.lambdas.size(); ++i) out += (i ? "," : "") + fmt(c.lambdas[i]);
              return out;
            }},
      LPAE_BOOL_FIELD("freeze_decoder", freeze_decoder),
      LPAE_UINT_FIELD("embed_channels", embed_channels),
      LPAE_UINT_FIELD("embed_blocks", embed_blocks),
  };
  return table;
}

#undef LPAE_DOUBLE_FIELD
#undef LPAE_UINT_FIELD
#undef LPAE_BOOL_FIELD

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto& table = fields();
    auto it = std::ranges::find(table, key, &Field::key);
    if (it == table.end()) {
      throw DataError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    it->set(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_train_config(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string to_config_text(const TrainConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

namespace {

void check_grads(const std::vector<ParamView>& params, const std::vector<ParamView>& grads) {
  if (params.size() != grads.size()) throw ShapeError("optimizer: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].values.size() != grads[i].values.size()) {
      throw ShapeError("optimizer: gradient shape mismatch for '" + params[i].name + "'");
    }
    for (double g : grads[i].values) {
      if (!std::isfinite(g)) {
        throw NumericError("optimizer: non-finite gradient in '" + params[i].name + "'");
      }
    }
  }
}

void ensure_buffers(std::vector<std::vector<double>>& buf, const std::vector<ParamView>& params) {
  if (buf.size() == params.size()) return;
  buf.clear();
  for (const auto& p : params) buf.emplace_back(p.values.size(), 0.0);
}

double round_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

void sgd_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
              OptimizerState& state, const TrainConfig& cfg, double lr) {
  check_grads(params, grads);
  ensure_buffers(state.first, params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values;
    auto g = grads[i].values;
    auto& v = state.first[i];
    const double wd = params[i].decay ? cfg.weight_decay : 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      v[j] = cfg.momentum * v[j] + (g[j] + wd * p[j]);
      p[j] -= lr * v[j];
      if (cfg.f32_state) {
        v[j] = round_f32(v[j]);
        p[j] = round_f32(p[j]);
      }
    }
  }
  ++state.step;
}

void adam_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               OptimizerState& state, const TrainConfig& cfg, double lr) {
  check_grads(params, grads);
  ensure_buffers(state.first, params);
  ensure_buffers(state.second, params);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values;
    auto g = grads[i].values;
    auto& m = state.first[i];
    auto& v = state.second[i];
    const double wd = params[i].decay ? cfg.weight_decay : 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double grad = g[j] + wd * p[j];
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * grad;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * grad * grad;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
      if (cfg.f32_state) {
        m[j] = round_f32(m[j]);
        v[j] = round_f32(v[j]);
        p[j] = round_f32(p[j]);
      }
    }
  }
}

void Optimizer::step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads, double lr) {
  if (cfg_.optimizer == OptimizerKind::adam) adam_step(params, grads, state_, cfg_, lr);
  else sgd_step(params, grads, state_, cfg_, lr);
}

std::vector<NamedTensor> Optimizer::state_tensors(const std::vector<ParamView>& params) const {
  std::vector<NamedTensor> out;
  out.push_back(NamedTensor{"step", {1}, {static_cast<double>(state_.step)}});
  for (std::size_t i = 0; i < state_.first.size(); ++i) {
    out.push_back(NamedTensor{params[i].name + ".m1", params[i].dims, state_.first[i]});
  }
  for (std::size_t i = 0; i < state_.second.size(); ++i) {
    out.push_back(NamedTensor{params[i].name + ".m2", params[i].dims, state_.second[i]});
  }
  return out;
}

void Optimizer::load_state(const std::vector<NamedTensor>& tensors, const std::vector<ParamView>& params) {
  if (tensors.empty() || tensors[0].name != "step" || tensors[0].values.size() != 1) {
    throw DataError("optimizer state: missing step counter");
  }
  const std::size_t moments = tensors.size() - 1;
  if (moments != 0 && moments != params.size() && moments != 2 * params.size()) {
    throw DataError("optimizer state: buffer count does not match the parameter list");
  }
  OptimizerState st;
  st.step = static_cast<std::size_t>(tensors[0].values[0]);
  for (std::size_t k = 0; k < moments; ++k) {
    const auto& p = params[k % params.size()];
    const std::string suffix = k < params.size() ? ".m1" : ".m2";
    if (tensors[k + 1].name != p.name + suffix || tensors[k + 1].dims != p.dims) {
      throw DataError("optimizer state: shape table mismatch at '" + tensors[k + 1].name + "'");
    }
    (k < params.size() ? st.first : st.second).push_back(tensors[k + 1].values);
  }
  state_ = std::move(st);
}

void Optimizer::save(const std::filesystem::path& path, const std::vector<ParamView>& params) const {
  write_container(path, kMagicOptim, state_tensors(params));
}

void Optimizer::load(const std::filesystem::path& path, const std::vector<ParamView>& params) {
  load_state(read_container(path, kMagicOptim), params);
}

}  // namespace lpae
