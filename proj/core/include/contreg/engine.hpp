#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "contreg/continual.hpp"
#include "contreg/dataio.hpp"
#include "contreg/metrics.hpp"
#include "contreg/nn.hpp"

namespace contreg::engine {

/// What happens when a novelty buffer fills. None freezes the model after
/// warm-up; FineTune retrains with early stopping and no penalty; OnlineEwc
/// retrains under the consolidation penalty without early stopping.
enum class UpdateStrategy { None, FineTune, OnlineEwc };

enum class SubModelKind { Autoencoder, Predictor };

/// Adaptive novelty threshold: threshold == alpha * mse_min at all times
/// after any (re-)estimation.
struct ThresholdState {
  double alpha = 1.0;
  double mse_min = 0.0;
  double threshold = 0.0;
};

/// Strictly-greater comparison; a sample exactly at the threshold counts as
/// familiar.
inline bool is_novelty(double error, const ThresholdState& state) {
  return error > state.threshold;
}

/// Finite novelty buffer plus unbounded familiarity buffer. Both empty
/// right after an update completes.
struct BufferPair {
  std::size_t capacity = 0;
  std::vector<dataio::Sample> novelty;
  std::vector<dataio::Sample> familiarity;

  void clear() {
    novelty.clear();
    familiarity.clear();
  }
};

/// Per-phase epoch/batch settings for the two sub-models.
struct TrainSettings {
  std::size_t epochs_ae = 512;
  std::size_t epochs_pred = 512;
  std::size_t batch_ae = 32;
  std::size_t batch_pred = 16;
};

struct EngineConfig {
  std::vector<nn::LayerSpec> autoencoder;
  std::vector<nn::LayerSpec> predictor;  // empty -> unsupervised run
  std::size_t encoder_layers = 0;        // autoencoder prefix feeding the predictor

  UpdateStrategy strategy = UpdateStrategy::OnlineEwc;
  continual::ConsolidationRule rule = continual::ConsolidationRule::Decay;
  double mixing_alpha = 0.5;

  std::size_t ae_capacity = 1000;
  std::size_t pred_capacity = 1000;
  double ae_alpha = 0.95;
  double pred_alpha = 0.95;

  double gamma = 0.9;
  double ae_lambda = 200.0;
  double pred_lambda = 200.0;

  TrainSettings phase1;
  TrainSettings phase2;
  double learning_rate = 1e-3;
  std::size_t finetune_patience = 30;
  bool dropout_enabled = false;

  // An update whose familiarity validation error exceeds this multiple of
  // the pre-update value is flagged (never rolled back).
  double update_warn_ratio = 2.0;

  std::uint64_t seed = 0;
};

/// Errors of one sample against the current model, Eval mode.
struct ScoredSample {
  double reconstruction_error = 0.0;    // ||x - x_hat||^2 / dim, vs Threshold_a
  double reconstruction_sq_norm = 0.0;  // ||x - x_hat||^2
  std::optional<double> prediction_error;  // (y - y_hat)^2, vs Threshold_p
};

/// What one buffer-triggered retraining did.
struct UpdateReport {
  SubModelKind which = SubModelKind::Autoencoder;
  std::size_t ordinal = 0;          // 1-based, per sub-model
  std::size_t stream_position = 0;  // triggering sample's index in the update phase
  std::size_t epochs_run = 0;
  double training_mse = 0.0;  // post-update mean error over the novelty set
  std::optional<double> validation_mse;  // over the familiarity snapshot
  std::optional<double> pre_update_validation_mse;
  bool flagged_poor = false;
  double new_threshold = 0.0;
};

/// One sub-model and everything the stream logic needs around it.
struct SubModel {
  nn::Network net;
  continual::ConsolidationState consolidation;
  BufferPair buffers;
  ThresholdState threshold;
  std::size_t update_count = 0;
};

/// The streaming novelty-detection engine: an autoencoder (and optionally a
/// predictor reading its bottleneck) each with a threshold and buffer pair.
/// Samples are scored, routed by error, and an update fires the moment a
/// novelty buffer is full.
class Engine {
 public:
  explicit Engine(EngineConfig config);

  struct WarmupResult {
    std::vector<double> history_ae;
    std::vector<double> history_pred;
  };

  /// Phase 1: trains the autoencoder, then the predictor on the encoded
  /// inputs, sets the initial thresholds from the post-training mean errors
  /// over `samples`, and (OnlineEwc) runs the first consolidation.
  WarmupResult warm_up(const dataio::Dataset& samples);

  ScoredSample score_sample(const dataio::Sample& sample) const;

  struct RouteResult {
    bool autoencoder_full = false;
    bool predictor_full = false;
  };

  /// Appends the sample to each sub-model's novelty or familiarity buffer
  /// by comparing its error to that model's threshold. A flag is true iff
  /// that novelty buffer reached capacity by this insertion.
  RouteResult route_sample(const dataio::Sample& sample, const ScoredSample& scores);

  /// Retrains one sub-model on its novelty buffer, validates on the
  /// familiarity snapshot, consolidates (OnlineEwc), re-estimates the
  /// threshold over the union snapshot, and empties both buffers.
  /// Throws PrematureUpdateError unless the novelty buffer is full.
  UpdateReport perform_update(SubModelKind which);

  /// mse_min <- mean per-sample error over the snapshot; threshold <-
  /// alpha * mse_min. An empty snapshot leaves the state unchanged.
  ThresholdState reestimate_threshold(SubModelKind which,
                                      const std::vector<dataio::Sample>& snapshot);

  struct StreamResult {
    std::vector<UpdateReport> updates;
    std::vector<double> errors_ae;    // ||x - x_hat||^2 per streamed sample
    std::vector<double> errors_pred;  // (y - y_hat)^2 per streamed sample
  };

  /// Phase 2: score -> route -> update-on-trigger over the whole set, in
  /// order. Autoencoder updates run before predictor updates when both
  /// trigger on the same sample. Strategy None only scores.
  StreamResult stream(const dataio::Dataset& samples);

  /// Bottleneck representation of x (Eval mode).
  nn::Vector encode(const nn::Vector& x) const;

  /// Mean per-sample error of one sub-model over samples (threshold units).
  double mean_error(SubModelKind which, const std::vector<dataio::Sample>& samples) const;

  bool supervised() const { return !config_.predictor.empty(); }
  const EngineConfig& config() const { return config_; }
  const SubModel& autoencoder() const { return autoencoder_; }
  const SubModel& predictor() const { return predictor_; }

  /// Test/diagnostic hook: sees exactly the training set each update uses.
  using UpdateObserver = std::function<void(SubModelKind, const nn::TrainSet&)>;
  void set_update_observer(UpdateObserver observer) { observer_ = std::move(observer); }

 private:
  SubModel& sub(SubModelKind which);
  const SubModel& sub(SubModelKind which) const;
  nn::LossKind loss_kind(SubModelKind which) const;
  nn::TrainSet make_train_set(SubModelKind which,
                              const std::vector<dataio::Sample>& samples) const;
  double sample_error(SubModelKind which, const dataio::Sample& sample) const;

  EngineConfig config_;
  SubModel autoencoder_;
  SubModel predictor_;
  UpdateObserver observer_;
  std::size_t stream_position_ = 0;
};

/// Everything one run produces: metrics, per-update reports, per-sample
/// error series (warm-up, update, evaluation concatenated in stream order),
/// and the phase-1 training histories.
struct ExperimentRecord {
  metrics::MetricsRecord metrics;
  std::vector<UpdateReport> updates;
  std::vector<double> series_ae;    // ||x - x_hat||^2 per sample
  std::vector<double> series_pred;  // (y - y_hat)^2 per sample, empty when unsupervised
  std::vector<double> warmup_history_ae;
  std::vector<double> warmup_history_pred;
};

/// Warm-up / update / evaluation protocol over a split dataset.
ExperimentRecord run_phases(const EngineConfig& config, const dataio::PhaseSplit& split);

/// Reference run: trains once on warm-up + update together (phase-1
/// settings), never updates, then evaluates like run_phases.
ExperimentRecord run_baseline(const EngineConfig& config, const dataio::PhaseSplit& split);

}  // namespace contreg::engine
