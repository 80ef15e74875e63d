#include "contreg/engine.hpp"

#include <iostream>
#include <stdexcept>
#include <string>

#include "contreg/errors.hpp"
#include "contreg/seeding.hpp"

namespace contreg::engine {

namespace {

// Seed-stream tags so init, warm-up shuffling, and per-update shuffling
// never collide.
constexpr std::uint64_t kAeInitTag = 0x01;
constexpr std::uint64_t kPredInitTag = 0x02;
constexpr std::uint64_t kWarmupAeTag = 0x03;
constexpr std::uint64_t kWarmupPredTag = 0x04;
constexpr std::uint64_t kUpdateTagBase = 0x100;

std::size_t bottleneck_layer_count(const std::vector<nn::LayerSpec>& specs) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < specs.size(); ++l)
    if (specs[l].output_dim < specs[best].output_dim) best = l;
  return best + 1;
}

void validate_config(EngineConfig& config) {
  if (config.autoencoder.empty()) throw ConfigError("autoencoder architecture is empty");
  if (config.autoencoder.front().input_dim != config.autoencoder.back().output_dim)
    throw ConfigError("autoencoder output dim must equal its input dim");
  if (config.encoder_layers == 0)
    config.encoder_layers = bottleneck_layer_count(config.autoencoder);
  if (config.encoder_layers > config.autoencoder.size())
    throw ConfigError("encoder layer count exceeds autoencoder depth");
  if (!config.predictor.empty()) {
    const std::size_t latent = config.autoencoder[config.encoder_layers - 1].output_dim;
    if (config.predictor.front().input_dim != latent)
      throw ConfigError("predictor input dim " + std::to_string(config.predictor.front().input_dim) +
                        " does not match the bottleneck dim " + std::to_string(latent));
    if (config.predictor.back().output_dim != 1)
      throw ConfigError("predictor must emit a single target value");
  }
  if (config.ae_capacity == 0 || (!config.predictor.empty() && config.pred_capacity == 0))
    throw ConfigError("novelty buffer capacities must be positive");
  if (config.ae_alpha <= 0.0 || config.pred_alpha <= 0.0)
    throw ConfigError("threshold factors must be positive");
  if (config.gamma <= 0.0 || config.gamma > 1.0)
    throw ConfigError("gamma must be in (0, 1]");
  if (config.ae_lambda <= 0.0 || config.pred_lambda <= 0.0)
    throw ConfigError("penalty strengths must be positive");
  if (config.learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
}

nn::TrainConfig phase_train_config(const EngineConfig& config, const TrainSettings& settings,
                                   SubModelKind which, std::uint64_t shuffle_tag) {
  nn::TrainConfig tc;
  tc.epochs = which == SubModelKind::Autoencoder ? settings.epochs_ae : settings.epochs_pred;
  tc.batch_size = which == SubModelKind::Autoencoder ? settings.batch_ae : settings.batch_pred;
  tc.dropout_enabled = config.dropout_enabled;
  tc.learning_rate = config.learning_rate;
  tc.shuffle_seed = mix_seed(config.seed, shuffle_tag);
  return tc;
}

}  // namespace

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
  validate_config(config_);

  autoencoder_.net = nn::Network::initialized(config_.autoencoder, mix_seed(config_.seed, kAeInitTag));
  autoencoder_.buffers.capacity = config_.ae_capacity;
  autoencoder_.threshold.alpha = config_.ae_alpha;
  autoencoder_.consolidation.gamma = config_.gamma;
  autoencoder_.consolidation.lambda = config_.ae_lambda;
  autoencoder_.consolidation.rule = config_.rule;
  autoencoder_.consolidation.mixing_alpha = config_.mixing_alpha;

  if (supervised()) {
    predictor_.net = nn::Network::initialized(config_.predictor, mix_seed(config_.seed, kPredInitTag));
    predictor_.buffers.capacity = config_.pred_capacity;
    predictor_.threshold.alpha = config_.pred_alpha;
    predictor_.consolidation.gamma = config_.gamma;
    predictor_.consolidation.lambda = config_.pred_lambda;
    predictor_.consolidation.rule = config_.rule;
    predictor_.consolidation.mixing_alpha = config_.mixing_alpha;
  }
}

SubModel& Engine::sub(SubModelKind which) {
  return which == SubModelKind::Autoencoder ? autoencoder_ : predictor_;
}

const SubModel& Engine::sub(SubModelKind which) const {
  return which == SubModelKind::Autoencoder ? autoencoder_ : predictor_;
}

nn::LossKind Engine::loss_kind(SubModelKind which) const {
  return which == SubModelKind::Autoencoder ? nn::LossKind::Reconstruction
                                            : nn::LossKind::Prediction;
}

nn::Vector Engine::encode(const nn::Vector& x) const {
  return nn::forward_prefix(autoencoder_.net, x, config_.encoder_layers, nn::Mode::Eval);
}

nn::TrainSet Engine::make_train_set(SubModelKind which,
                                    const std::vector<dataio::Sample>& samples) const {
  nn::TrainSet set;
  set.reserve(samples.size());
  if (which == SubModelKind::Autoencoder) {
    for (const auto& sample : samples) set.push_back({sample.features, {}});
  } else {
    // Inputs re-encode through the current encoder at call time, so the
    // predictor always trains against the latest representation.
    for (const auto& sample : samples)
      if (sample.target) set.push_back({encode(sample.features), {*sample.target}});
  }
  return set;
}

double Engine::sample_error(SubModelKind which, const dataio::Sample& sample) const {
  if (which == SubModelKind::Autoencoder) {
    const nn::Vector reconstruction = nn::forward(autoencoder_.net, sample.features, nn::Mode::Eval);
    double sq = 0.0;
    for (std::size_t j = 0; j < sample.features.size(); ++j) {
      const double d = sample.features[j] - reconstruction[j];
      sq += d * d;
    }
    return sq / static_cast<double>(sample.features.size());
  }
  if (!sample.target) throw std::invalid_argument("predictor error needs a target");
  const nn::Vector y_hat = nn::forward(predictor_.net, encode(sample.features), nn::Mode::Eval);
  const double d = *sample.target - y_hat[0];
  return d * d;
}

double Engine::mean_error(SubModelKind which, const std::vector<dataio::Sample>& samples) const {
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& sample : samples) {
    if (which == SubModelKind::Predictor && !sample.target) continue;
    total += sample_error(which, sample);
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("mean error over no scorable samples");
  return total / static_cast<double>(counted);
}

Engine::WarmupResult Engine::warm_up(const dataio::Dataset& samples) {
  if (samples.empty()) throw ConfigError("warm-up set is empty");

  WarmupResult result;
  const nn::TrainSet ae_set = make_train_set(SubModelKind::Autoencoder, samples.samples);
  result.history_ae =
      nn::train(autoencoder_.net, ae_set,
                phase_train_config(config_, config_.phase1, SubModelKind::Autoencoder, kWarmupAeTag),
                nn::LossKind::Reconstruction)
          .history;

  nn::TrainSet pred_set;
  if (supervised()) {
    pred_set = make_train_set(SubModelKind::Predictor, samples.samples);
    if (pred_set.empty()) throw ConfigError("supervised warm-up needs targets");
    result.history_pred =
        nn::train(predictor_.net, pred_set,
                  phase_train_config(config_, config_.phase1, SubModelKind::Predictor, kWarmupPredTag),
                  nn::LossKind::Prediction)
            .history;
  }

  reestimate_threshold(SubModelKind::Autoencoder, samples.samples);
  if (supervised()) reestimate_threshold(SubModelKind::Predictor, samples.samples);

  if (config_.strategy == UpdateStrategy::OnlineEwc) {
    // The warm-up set is the first task: its Fisher becomes the initial
    // accumulator and the post-training parameters the first anchor.
    continual::consolidate(
        autoencoder_.consolidation,
        continual::estimate_fisher_diagonal(autoencoder_.net, ae_set, nn::LossKind::Reconstruction),
        autoencoder_.net.flatten());
    if (supervised()) {
      continual::consolidate(
          predictor_.consolidation,
          continual::estimate_fisher_diagonal(predictor_.net, pred_set, nn::LossKind::Prediction),
          predictor_.net.flatten());
    }
  }
  return result;
}

ScoredSample Engine::score_sample(const dataio::Sample& sample) const {
  if (sample.features.size() != autoencoder_.net.input_dim())
    throw ShapeError("sample has " + std::to_string(sample.features.size()) +
                     " features, model expects " + std::to_string(autoencoder_.net.input_dim()));

  ScoredSample scores;
  const nn::Vector reconstruction = nn::forward(autoencoder_.net, sample.features, nn::Mode::Eval);
  double sq = 0.0;
  for (std::size_t j = 0; j < sample.features.size(); ++j) {
    const double d = sample.features[j] - reconstruction[j];
    sq += d * d;
  }
  scores.reconstruction_sq_norm = sq;
  scores.reconstruction_error = sq / static_cast<double>(sample.features.size());

  if (supervised() && sample.target) {
    const nn::Vector y_hat = nn::forward(predictor_.net, encode(sample.features), nn::Mode::Eval);
    const double d = *sample.target - y_hat[0];
    scores.prediction_error = d * d;
  }
  return scores;
}

namespace {

bool route_into(SubModel& sub, const dataio::Sample& sample, double error) {
  if (is_novelty(error, sub.threshold)) {
    if (sub.buffers.novelty.size() >= sub.buffers.capacity)
      throw std::logic_error("novelty buffer already full; an update must run first");
    sub.buffers.novelty.push_back(sample);
    return sub.buffers.novelty.size() == sub.buffers.capacity;
  }
  sub.buffers.familiarity.push_back(sample);
  return false;
}

}  // namespace

Engine::RouteResult Engine::route_sample(const dataio::Sample& sample, const ScoredSample& scores) {
  RouteResult result;
  result.autoencoder_full = route_into(autoencoder_, sample, scores.reconstruction_error);
  if (supervised() && sample.target && scores.prediction_error)
    result.predictor_full = route_into(predictor_, sample, *scores.prediction_error);
  return result;
}

UpdateReport Engine::perform_update(SubModelKind which) {
  if (config_.strategy == UpdateStrategy::None)
    throw std::logic_error("a frozen model never updates");
  SubModel& model = sub(which);
  if (model.buffers.novelty.size() != model.buffers.capacity)
    throw PrematureUpdateError("novelty buffer holds " + std::to_string(model.buffers.novelty.size()) +
                               " of " + std::to_string(model.buffers.capacity) + " samples");

  const std::vector<dataio::Sample> novelty = std::move(model.buffers.novelty);
  const std::vector<dataio::Sample> familiarity = std::move(model.buffers.familiarity);
  model.buffers.clear();

  const nn::TrainSet train_set = make_train_set(which, novelty);
  const nn::TrainSet familiar_set = make_train_set(which, familiarity);

  std::optional<double> pre_validation;
  if (!familiarity.empty()) pre_validation = mean_error(which, familiarity);

  if (observer_) observer_(which, train_set);

  // Retrain only on the newly collected novelties.
  nn::TrainConfig tc = phase_train_config(
      config_, config_.phase2, which,
      kUpdateTagBase + (which == SubModelKind::Predictor ? 0x1000 : 0) + model.update_count);
  nn::PenaltyHook hook;
  if (config_.strategy == UpdateStrategy::FineTune) {
    tc.early_stopping_patience = config_.finetune_patience;
  } else if (model.consolidation.update_count > 0) {
    hook = continual::make_penalty_hook(model.consolidation);
  }
  const nn::TrainResult trained = nn::train(model.net, train_set, tc, loss_kind(which), hook);

  UpdateReport report;
  report.which = which;
  report.stream_position = stream_position_;
  report.epochs_run = trained.history.size();
  report.training_mse = mean_error(which, novelty);
  if (pre_validation) {
    report.validation_mse = mean_error(which, familiarity);
    report.pre_update_validation_mse = pre_validation;
    report.flagged_poor = *report.validation_mse > config_.update_warn_ratio * *pre_validation;
  }

  if (config_.strategy == UpdateStrategy::OnlineEwc) {
    // Fisher over everything seen since the last update: both buffers.
    nn::TrainSet union_set = train_set;
    union_set.insert(union_set.end(), familiar_set.begin(), familiar_set.end());
    continual::consolidate(model.consolidation,
                           continual::estimate_fisher_diagonal(model.net, union_set, loss_kind(which)),
                           model.net.flatten());
  }

  std::vector<dataio::Sample> snapshot = novelty;
  snapshot.insert(snapshot.end(), familiarity.begin(), familiarity.end());
  report.new_threshold = reestimate_threshold(which, snapshot).threshold;

  model.update_count += 1;
  report.ordinal = model.update_count;
  return report;
}

ThresholdState Engine::reestimate_threshold(SubModelKind which,
                                            const std::vector<dataio::Sample>& snapshot) {
  SubModel& model = sub(which);
  std::size_t scorable = 0;
  for (const auto& sample : snapshot)
    if (which == SubModelKind::Autoencoder || sample.target) ++scorable;
  if (scorable == 0) {
    std::clog << "threshold re-estimation skipped: empty snapshot\n";
    return model.threshold;
  }
  model.threshold.mse_min = mean_error(which, snapshot);
  model.threshold.threshold = model.threshold.alpha * model.threshold.mse_min;
  return model.threshold;
}

Engine::StreamResult Engine::stream(const dataio::Dataset& samples) {
  StreamResult result;
  result.errors_ae.reserve(samples.size());
  stream_position_ = 0;
  for (const auto& sample : samples.samples) {
    const ScoredSample scores = score_sample(sample);
    result.errors_ae.push_back(scores.reconstruction_sq_norm);
    if (scores.prediction_error) result.errors_pred.push_back(*scores.prediction_error);

    if (config_.strategy != UpdateStrategy::None) {
      const RouteResult routed = route_sample(sample, scores);
      if (routed.autoencoder_full) result.updates.push_back(perform_update(SubModelKind::Autoencoder));
      if (routed.predictor_full) result.updates.push_back(perform_update(SubModelKind::Predictor));
    }
    ++stream_position_;
  }
  return result;
}

namespace {

void append_series(const Engine& engine, const dataio::Dataset& samples, ExperimentRecord& record) {
  for (const auto& sample : samples.samples) {
    const ScoredSample scores = engine.score_sample(sample);
    record.series_ae.push_back(scores.reconstruction_sq_norm);
    if (scores.prediction_error) record.series_pred.push_back(*scores.prediction_error);
  }
}

nn::TrainSet latent_set(const Engine& engine, const std::vector<dataio::Sample>& samples) {
  nn::TrainSet set;
  for (const auto& sample : samples)
    if (sample.target) set.push_back({engine.encode(sample.features), {*sample.target}});
  return set;
}

void fill_final_metrics(const Engine& engine, const dataio::PhaseSplit& split,
                        ExperimentRecord& record) {
  std::vector<dataio::Sample> seen = split.warm_up.samples;
  seen.insert(seen.end(), split.update.samples.begin(), split.update.samples.end());

  nn::TrainSet seen_ae;
  seen_ae.reserve(seen.size());
  for (const auto& sample : seen) seen_ae.push_back({sample.features, {}});
  nn::TrainSet eval_ae;
  for (const auto& sample : split.evaluation.samples) eval_ae.push_back({sample.features, {}});

  record.metrics.fitting_error_ae =
      metrics::dataset_mse(engine.autoencoder().net, seen_ae, nn::LossKind::Reconstruction);
  record.metrics.prediction_error_ae =
      metrics::dataset_mse(engine.autoencoder().net, eval_ae, nn::LossKind::Reconstruction);

  if (engine.supervised()) {
    const nn::TrainSet seen_pred = latent_set(engine, seen);
    const nn::TrainSet eval_pred = latent_set(engine, split.evaluation.samples);
    if (!seen_pred.empty())
      record.metrics.fitting_error_pred =
          metrics::dataset_mse(engine.predictor().net, seen_pred, nn::LossKind::Prediction);
    if (!eval_pred.empty())
      record.metrics.prediction_error_pred =
          metrics::dataset_mse(engine.predictor().net, eval_pred, nn::LossKind::Prediction);
  }

  record.metrics.update_count_ae = engine.autoencoder().update_count;
  record.metrics.update_count_pred = engine.predictor().update_count;
}

}  // namespace

ExperimentRecord run_phases(const EngineConfig& config, const dataio::PhaseSplit& split) {
  if (split.warm_up.empty() || split.update.empty() || split.evaluation.empty())
    throw ConfigError("run needs nonempty warm-up, update, and evaluation phases");

  Engine engine(config);
  ExperimentRecord record;

  Engine::WarmupResult warm = engine.warm_up(split.warm_up);
  record.warmup_history_ae = std::move(warm.history_ae);
  record.warmup_history_pred = std::move(warm.history_pred);

  // Warm-up losses captured once, at the end of phase 1 — the reference
  // point the forgetting ratio compares against.
  const bool track_forgetting = config.strategy != UpdateStrategy::None;
  nn::TrainSet warm_ae;
  for (const auto& sample : split.warm_up.samples) warm_ae.push_back({sample.features, {}});
  if (track_forgetting) {
    record.metrics.l1_warmup_ae =
        metrics::dataset_mse(engine.autoencoder().net, warm_ae, nn::LossKind::Reconstruction);
    if (engine.supervised()) {
      const nn::TrainSet warm_pred = latent_set(engine, split.warm_up.samples);
      if (!warm_pred.empty())
        record.metrics.l1_warmup_pred =
            metrics::dataset_mse(engine.predictor().net, warm_pred, nn::LossKind::Prediction);
    }
  }

  append_series(engine, split.warm_up, record);

  Engine::StreamResult streamed = engine.stream(split.update);
  record.updates = std::move(streamed.updates);
  record.series_ae.insert(record.series_ae.end(), streamed.errors_ae.begin(), streamed.errors_ae.end());
  record.series_pred.insert(record.series_pred.end(), streamed.errors_pred.begin(),
                            streamed.errors_pred.end());

  if (track_forgetting) {
    record.metrics.l2_warmup_ae =
        metrics::dataset_mse(engine.autoencoder().net, warm_ae, nn::LossKind::Reconstruction);
    record.metrics.forgetting_ratio_ae =
        metrics::forgetting_ratio(*record.metrics.l1_warmup_ae, *record.metrics.l2_warmup_ae);
    if (engine.supervised() && record.metrics.l1_warmup_pred) {
      const nn::TrainSet warm_pred = latent_set(engine, split.warm_up.samples);
      record.metrics.l2_warmup_pred =
          metrics::dataset_mse(engine.predictor().net, warm_pred, nn::LossKind::Prediction);
      record.metrics.forgetting_ratio_pred =
          metrics::forgetting_ratio(*record.metrics.l1_warmup_pred, *record.metrics.l2_warmup_pred);
    }
  }

  append_series(engine, split.evaluation, record);
  fill_final_metrics(engine, split, record);
  return record;
}

ExperimentRecord run_baseline(const EngineConfig& config, const dataio::PhaseSplit& split) {
  if (split.warm_up.empty() || split.update.empty() || split.evaluation.empty())
    throw ConfigError("run needs nonempty warm-up, update, and evaluation phases");

  EngineConfig frozen = config;
  frozen.strategy = UpdateStrategy::None;
  Engine engine(frozen);

  dataio::Dataset train = split.warm_up;
  train.samples.insert(train.samples.end(), split.update.samples.begin(),
                       split.update.samples.end());

  ExperimentRecord record;
  Engine::WarmupResult warm = engine.warm_up(train);
  record.warmup_history_ae = std::move(warm.history_ae);
  record.warmup_history_pred = std::move(warm.history_pred);

  append_series(engine, split.warm_up, record);
  append_series(engine, split.update, record);
  append_series(engine, split.evaluation, record);
  fill_final_metrics(engine, split, record);
  return record;
}

}  // namespace contreg::engine
