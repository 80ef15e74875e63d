#include "contreg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "contreg/errors.hpp"

namespace contreg::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const double parsed = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' needs a number, got '" + value + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& value) {
  const double parsed = to_double(key, value);
  if (parsed < 0 || parsed != static_cast<std::size_t>(parsed))
    throw ConfigError("key '" + key + "' needs a nonnegative integer, got '" + value + "'");
  return static_cast<std::size_t>(parsed);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const std::uint64_t parsed = std::stoull(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' needs an unsigned integer, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "' needs true/false, got '" + value + "'");
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::istringstream stream(value);
  std::string field;
  while (std::getline(stream, field, ',')) out.push_back(to_size(key, trim(field)));
  if (out.empty()) throw ConfigError("key '" + key + "' needs a comma-separated list");
  return out;
}

nn::Activation to_activation(const std::string& key, const std::string& value) {
  if (value == "leaky_relu") return nn::Activation::LeakyRelu;
  if (value == "tanh") return nn::Activation::Tanh;
  if (value == "identity") return nn::Activation::Identity;
  throw ConfigError("key '" + key + "' needs leaky_relu/tanh/identity, got '" + value + "'");
}

Instance to_instance(const std::string& value) {
  if (value == "A" || value == "a") return Instance::A;
  if (value == "B" || value == "b") return Instance::B;
  if (value == "C" || value == "c") return Instance::C;
  if (value == "baseline" || value == "Baseline") return Instance::Baseline;
  throw ConfigError("instance must be A, B, C, or Baseline — got '" + value + "'");
}

std::string format_full(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string activation_name(nn::Activation a) {
  switch (a) {
    case nn::Activation::LeakyRelu: return "leaky_relu";
    case nn::Activation::Tanh: return "tanh";
    case nn::Activation::Identity: return "identity";
  }
  return "identity";
}

void apply_key(ExperimentConfig& config, const std::string& key, const std::string& value) {
  if (key == "instance") config.instance = to_instance(value);
  else if (key == "seed") config.seed = to_u64(key, value);
  else if (key == "data.source") {
    if (value != "generated" && value != "csv")
      throw ConfigError("data.source must be generated or csv");
    config.data_source = value;
  } else if (key == "data.path") config.data_path = value;
  else if (key == "data.rated_capacity") config.rated_capacity = to_double(key, value);
  else if (key == "data.dims") config.dims = to_size(key, value);
  else if (key == "phase.warm_up") config.phases.warm_up = to_size(key, value);
  else if (key == "phase.update") config.phases.update = to_size(key, value);
  else if (key == "phase.evaluation") config.phases.evaluation = to_size(key, value);
  else if (key == "gen.length") config.generator.length = to_size(key, value);
  else if (key == "gen.amplitude_mean") config.generator.amplitude_mean = to_double(key, value);
  else if (key == "gen.amplitude_var") config.generator.amplitude_var = to_double(key, value);
  else if (key == "gen.period_day") config.generator.period_day = to_size(key, value);
  else if (key == "gen.period_year") config.generator.period_year = to_size(key, value);
  else if (key == "gen.seed") config.generator.seed = to_u64(key, value);
  else if (key == "ae.hidden") config.ae_hidden = to_size_list(key, value);
  else if (key == "ae.activation") config.ae_activation = to_activation(key, value);
  else if (key == "ae.leaky_slope") config.leaky_slope = to_double(key, value);
  else if (key == "predictor.enabled") config.predictor_enabled = to_bool(key, value);
  else if (key == "predictor.hidden") config.pred_hidden = to_size_list(key, value);
  else if (key == "predictor.activation") config.pred_activation = to_activation(key, value);
  else if (key == "dropout.rate") config.dropout_rate = to_double(key, value);
  else if (key == "buffer.ae_capacity") config.ae_capacity = to_size(key, value);
  else if (key == "buffer.pred_capacity") config.pred_capacity = to_size(key, value);
  else if (key == "threshold.ae_alpha") config.ae_alpha = to_double(key, value);
  else if (key == "threshold.pred_alpha") config.pred_alpha = to_double(key, value);
  else if (key == "ewc.gamma") config.gamma = to_double(key, value);
  else if (key == "ewc.ae_lambda") config.ae_lambda = to_double(key, value);
  else if (key == "ewc.pred_lambda") config.pred_lambda = to_double(key, value);
  else if (key == "ewc.rule") {
    if (value == "decay") config.rule = continual::ConsolidationRule::Decay;
    else if (value == "mixing") config.rule = continual::ConsolidationRule::Mixing;
    else throw ConfigError("ewc.rule must be decay or mixing");
  } else if (key == "ewc.mixing_alpha") config.mixing_alpha = to_double(key, value);
  else if (key == "train.phase1.epochs_ae") config.phase1.epochs_ae = to_size(key, value);
  else if (key == "train.phase1.epochs_pred") config.phase1.epochs_pred = to_size(key, value);
  else if (key == "train.phase1.batch_ae") config.phase1.batch_ae = to_size(key, value);
  else if (key == "train.phase1.batch_pred") config.phase1.batch_pred = to_size(key, value);
  else if (key == "train.phase2.epochs_ae") config.phase2.epochs_ae = to_size(key, value);
  else if (key == "train.phase2.epochs_pred") config.phase2.epochs_pred = to_size(key, value);
  else if (key == "train.phase2.batch_ae") config.phase2.batch_ae = to_size(key, value);
  else if (key == "train.phase2.batch_pred") config.phase2.batch_pred = to_size(key, value);
  else if (key == "train.learning_rate") config.learning_rate = to_double(key, value);
  else if (key == "train.finetune_patience") config.finetune_patience = to_size(key, value);
  else if (key == "engine.update_warn_ratio") config.update_warn_ratio = to_double(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

std::string instance_name(Instance instance) {
  switch (instance) {
    case Instance::A: return "A";
    case Instance::B: return "B";
    case Instance::C: return "C";
    case Instance::Baseline: return "baseline";
  }
  return "?";
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues entries;
  std::istringstream stream(text);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_number) + " is not key=value: '" +
                        stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_number) + " has an empty key");
    for (const auto& [existing, _] : entries)
      if (existing == key) throw ConfigError("duplicate config key '" + key + "'");
    entries.emplace_back(key, value);
  }
  return entries;
}

ExperimentConfig build_config(const KeyValues& entries) {
  ExperimentConfig config;
  // Instance first: it sets the dropout default the remaining keys may
  // override.
  for (const auto& [key, value] : entries)
    if (key == "instance") config.instance = to_instance(value);
  if (config.instance == Instance::Baseline) config.dropout_rate = 0.2;

  for (const auto& [key, value] : entries)
    if (key != "instance") apply_key(config, key, value);

  config.generator.dims = config.dims;
  switch (config.instance) {
    case Instance::A: config.strategy = engine::UpdateStrategy::None; break;
    case Instance::B: config.strategy = engine::UpdateStrategy::FineTune; break;
    case Instance::C: config.strategy = engine::UpdateStrategy::OnlineEwc; break;
    case Instance::Baseline: config.strategy = engine::UpdateStrategy::None; break;
  }

  if (config.data_source == "csv" && config.data_path.empty())
    throw ConfigError("data.source=csv needs data.path");
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  return build_config(parse_key_values(text));
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string canonical_text(const ExperimentConfig& config) {
  std::map<std::string, std::string> keys;
  keys["instance"] = instance_name(config.instance);
  keys["data.source"] = config.data_source;
  keys["data.path"] = config.data_path;
  keys["data.rated_capacity"] =
      config.rated_capacity ? format_full(*config.rated_capacity) : "none";
  keys["data.dims"] = std::to_string(config.dims);
  keys["phase.warm_up"] = std::to_string(config.phases.warm_up);
  keys["phase.update"] = std::to_string(config.phases.update);
  keys["phase.evaluation"] = std::to_string(config.phases.evaluation);
  keys["gen.length"] = std::to_string(config.generator.length);
  keys["gen.amplitude_mean"] = format_full(config.generator.amplitude_mean);
  keys["gen.amplitude_var"] = format_full(config.generator.amplitude_var);
  keys["gen.period_day"] = std::to_string(config.generator.period_day);
  keys["gen.period_year"] = std::to_string(config.generator.period_year);
  keys["gen.seed"] = std::to_string(config.generator.seed);
  keys["ae.hidden"] = join(config.ae_hidden);
  keys["ae.activation"] = activation_name(config.ae_activation);
  keys["ae.leaky_slope"] = format_full(config.leaky_slope);
  keys["predictor.enabled"] = config.predictor_enabled ? "true" : "false";
  keys["predictor.hidden"] = join(config.pred_hidden);
  keys["predictor.activation"] = activation_name(config.pred_activation);
  keys["dropout.rate"] = format_full(config.dropout_rate);
  keys["buffer.ae_capacity"] = std::to_string(config.ae_capacity);
  keys["buffer.pred_capacity"] = std::to_string(config.pred_capacity);
  keys["threshold.ae_alpha"] = format_full(config.ae_alpha);
  keys["threshold.pred_alpha"] = format_full(config.pred_alpha);
  keys["ewc.gamma"] = format_full(config.gamma);
  keys["ewc.ae_lambda"] = format_full(config.ae_lambda);
  keys["ewc.pred_lambda"] = format_full(config.pred_lambda);
  keys["ewc.rule"] =
      config.rule == continual::ConsolidationRule::Decay ? "decay" : "mixing";
  keys["ewc.mixing_alpha"] = format_full(config.mixing_alpha);
  keys["train.phase1.epochs_ae"] = std::to_string(config.phase1.epochs_ae);
  keys["train.phase1.epochs_pred"] = std::to_string(config.phase1.epochs_pred);
  keys["train.phase1.batch_ae"] = std::to_string(config.phase1.batch_ae);
  keys["train.phase1.batch_pred"] = std::to_string(config.phase1.batch_pred);
  keys["train.phase2.epochs_ae"] = std::to_string(config.phase2.epochs_ae);
  keys["train.phase2.epochs_pred"] = std::to_string(config.phase2.epochs_pred);
  keys["train.phase2.batch_ae"] = std::to_string(config.phase2.batch_ae);
  keys["train.phase2.batch_pred"] = std::to_string(config.phase2.batch_pred);
  keys["train.learning_rate"] = format_full(config.learning_rate);
  keys["train.finetune_patience"] = std::to_string(config.finetune_patience);
  keys["engine.update_warn_ratio"] = format_full(config.update_warn_ratio);

  std::string out;
  for (const auto& [key, value] : keys) out += key + "=" + value + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = canonical_text(config);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

engine::EngineConfig to_engine_config(const ExperimentConfig& config) {
  engine::EngineConfig out;

  std::vector<std::size_t> widths;
  widths.push_back(config.dims);
  widths.insert(widths.end(), config.ae_hidden.begin(), config.ae_hidden.end());
  widths.push_back(config.dims);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    nn::LayerSpec spec;
    spec.input_dim = widths[l];
    spec.output_dim = widths[l + 1];
    spec.activation = config.ae_activation;
    spec.leaky_slope = config.leaky_slope;
    spec.dropout_rate = config.dropout_rate;
    out.autoencoder.push_back(spec);
  }

  if (config.predictor_enabled) {
    std::size_t latent = out.autoencoder.front().output_dim;
    for (const auto& spec : out.autoencoder) latent = std::min(latent, spec.output_dim);
    std::vector<std::size_t> pred_widths;
    pred_widths.push_back(latent);
    pred_widths.insert(pred_widths.end(), config.pred_hidden.begin(), config.pred_hidden.end());
    pred_widths.push_back(1);
    for (std::size_t l = 0; l + 1 < pred_widths.size(); ++l) {
      nn::LayerSpec spec;
      spec.input_dim = pred_widths[l];
      spec.output_dim = pred_widths[l + 1];
      const bool final_layer = l + 2 == pred_widths.size();
      spec.activation = final_layer ? nn::Activation::Identity : config.pred_activation;
      spec.leaky_slope = config.leaky_slope;
      spec.dropout_rate = config.dropout_rate;
      out.predictor.push_back(spec);
    }
  }

  out.strategy = config.strategy;
  out.rule = config.rule;
  out.mixing_alpha = config.mixing_alpha;
  out.ae_capacity = config.ae_capacity;
  out.pred_capacity = config.pred_capacity;
  out.ae_alpha = config.ae_alpha;
  out.pred_alpha = config.pred_alpha;
  out.gamma = config.gamma;
  out.ae_lambda = config.ae_lambda;
  out.pred_lambda = config.pred_lambda;
  out.phase1 = config.phase1;
  out.phase2 = config.phase2;
  out.learning_rate = config.learning_rate;
  out.finetune_patience = config.finetune_patience;
  out.dropout_enabled = config.dropout_rate > 0.0;
  out.update_warn_ratio = config.update_warn_ratio;
  out.seed = config.seed;
  return out;
}

}  // namespace contreg::config
