#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contreg/datagen.hpp"
#include "contreg/dataio.hpp"
#include "contreg/engine.hpp"

namespace contreg::config {

/// Which protocol a run follows. A freezes the model after warm-up, B
/// fine-tunes on buffer triggers, C applies the consolidation penalty,
/// Baseline trains once on warm-up + update together.
enum class Instance { A, B, C, Baseline };

std::string instance_name(Instance instance);

/// Typed view of one flat key=value experiment file (full key list in the
/// README). Unknown keys are rejected so typos fail loudly.
struct ExperimentConfig {
  Instance instance = Instance::C;
  std::uint64_t seed = 1;

  // data
  std::string data_source = "generated";  // "generated" | "csv"
  std::string data_path;
  std::optional<double> rated_capacity;
  datagen::GeneratorConfig generator;
  dataio::PhaseSizes phases;
  std::size_t dims = 7;

  // architecture
  std::vector<std::size_t> ae_hidden = {32, 16, 8, 4, 8, 16, 32};
  nn::Activation ae_activation = nn::Activation::LeakyRelu;
  double leaky_slope = 0.05;
  bool predictor_enabled = false;
  std::vector<std::size_t> pred_hidden = {96, 64, 32, 16, 8};
  nn::Activation pred_activation = nn::Activation::Tanh;
  double dropout_rate = 0.0;  // defaults to 0.2 for Baseline

  // engine
  engine::UpdateStrategy strategy = engine::UpdateStrategy::OnlineEwc;
  continual::ConsolidationRule rule = continual::ConsolidationRule::Decay;
  double mixing_alpha = 0.5;
  std::size_t ae_capacity = 1000;
  std::size_t pred_capacity = 1000;
  double ae_alpha = 0.95;
  double pred_alpha = 0.95;
  double gamma = 0.9;
  double ae_lambda = 200.0;
  double pred_lambda = 200.0;
  engine::TrainSettings phase1;
  engine::TrainSettings phase2;
  double learning_rate = 1e-3;
  std::size_t finetune_patience = 30;
  double update_warn_ratio = 2.0;
};

/// One key=value assignment, file order preserved.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses flat key=value text ('#' comments, blank lines ignored).
/// Throws ConfigError on malformed lines or duplicate keys.
KeyValues parse_key_values(const std::string& text);

/// Applies assignments over the defaults. Throws ConfigError on unknown
/// keys or unparseable values.
ExperimentConfig build_config(const KeyValues& entries);

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Canonical serialization of every effective field (sorted keys, full float
/// precision), seed excluded — the input to the config hash, so configs that
/// differ only in spelled-out defaults hash identically.
std::string canonical_text(const ExperimentConfig& config);

/// 64-bit FNV-1a of canonical_text, as 16 hex digits. Stable across runs;
/// identical for all repetitions of one grid cell.
std::string config_hash(const ExperimentConfig& config);

/// Expands the architecture and engine settings into the runtime form.
engine::EngineConfig to_engine_config(const ExperimentConfig& config);

}  // namespace contreg::config
