#pragma once

#include <cstddef>
#include <optional>

#include "contreg/nn.hpp"

namespace contreg::metrics {

/// Relative error increase on the warm-up set, clamped at zero:
/// max(0, l2 - l1) / l1. Throws std::invalid_argument when l1 <= 0.
double forgetting_ratio(double l1, double l2);

/// Eval-mode MSE of a network over samples; Reconstruction scores inputs
/// against their own reconstructions. Delegates to nn::mse so the value is
/// bit-identical to scoring the collected outputs directly.
double dataset_mse(const nn::Network& net, const nn::TrainSet& samples, nn::LossKind kind);

/// Per-run evaluation summary. The autoencoder fields are always present;
/// predictor fields only when the run was supervised. Forgetting fields are
/// absent (not zero) for instances that never update.
struct MetricsRecord {
  double fitting_error_ae = 0.0;     // MSE over warm-up + update samples
  double prediction_error_ae = 0.0;  // MSE over the evaluation phase
  std::optional<double> fitting_error_pred;
  std::optional<double> prediction_error_pred;

  std::size_t update_count_ae = 0;
  std::size_t update_count_pred = 0;

  std::optional<double> l1_warmup_ae;  // warm-up MSE at the end of phase 1
  std::optional<double> l2_warmup_ae;  // warm-up MSE after the update phase
  std::optional<double> l1_warmup_pred;
  std::optional<double> l2_warmup_pred;
  std::optional<double> forgetting_ratio_ae;
  std::optional<double> forgetting_ratio_pred;

  // Headline numbers: the predictor when present, else the autoencoder.
  double fitting_error() const {
    return fitting_error_pred ? *fitting_error_pred : fitting_error_ae;
  }
  double prediction_error() const {
    return prediction_error_pred ? *prediction_error_pred : prediction_error_ae;
  }
};

}  // namespace contreg::metrics
