#pragma once

#include <cstddef>
#include <vector>

#include "contreg/nn.hpp"

namespace contreg::continual {

/// Empirical diagonal Fisher information: per-parameter mean over samples of
/// the squared gradient of the per-sample negative Gaussian log-likelihood
/// (sigma = 1), i.e. of 0.5 * ||y - y_hat||^2. Entries are nonnegative and
/// aligned with the network's flattened parameters.
struct FisherDiagonal {
  nn::Vector values;
  std::size_t sample_count = 0;
};

/// Estimates the diagonal Fisher over `dataset` in Eval mode (no dropout).
/// Throws std::invalid_argument on an empty dataset.
FisherDiagonal estimate_fisher_diagonal(const nn::Network& net, const nn::TrainSet& dataset,
                                        nn::LossKind kind);

/// How successive Fisher estimates merge into the running accumulator.
///   Decay:  F~ <- gamma * F~ + F          (the default recursion)
///   Mixing: F~ <- alpha * F~ + (1-alpha) * F
enum class ConsolidationRule { Decay, Mixing };

/// Running consolidation state for the single-anchor penalty: accumulated
/// Fisher F~, anchor parameters theta*, and the strength lambda.
struct ConsolidationState {
  nn::Vector accumulated_fisher;
  nn::Vector anchor;
  double gamma = 0.9;
  double lambda = 200.0;
  ConsolidationRule rule = ConsolidationRule::Decay;
  double mixing_alpha = 0.5;  // only read under ConsolidationRule::Mixing
  std::size_t update_count = 0;
};

/// Folds a new Fisher estimate and anchor into the state. The first call
/// sets F~ = F exactly, independent of gamma; later calls apply the rule.
void consolidate(ConsolidationState& state, const FisherDiagonal& fisher,
                 const nn::Vector& new_anchor);

struct Penalty {
  double value = 0.0;
  nn::Vector gradient;
};

/// Single-anchor quadratic penalty:
///   value    = lambda/2 * sum_i F~_i (theta_i - theta*_i)^2
///   gradient = lambda * F~ (theta - theta*)  elementwise
/// Throws NotConsolidatedError when no consolidation has happened yet.
Penalty ewc_penalty(const nn::Vector& params, const ConsolidationState& state);

/// One completed task kept by the multi-anchor reference strategy.
struct EwcTask {
  FisherDiagonal fisher;
  nn::Vector anchor;
  double lambda = 1.0;
};

/// Every task's Fisher diagonal, anchor, and strength (memory grows with
/// the number of updates — kept as a reference point, not the default).
struct EwcHistory {
  std::vector<EwcTask> tasks;
};

/// Multi-anchor quadratic penalty, anchored at the most recent task's
/// parameters:
///   value = 1/2 * sum_i (sum_t lambda_t F_{t,i} + lambda_prior) (theta_i - theta*_i)^2
/// Throws NotConsolidatedError on an empty history.
Penalty ewc_penalty_multi(const nn::Vector& params, const EwcHistory& history,
                          double lambda_prior = 0.0);

/// Adapts the penalty to the trainer's hook interface. The returned hook
/// references `state`; the caller keeps it alive while training runs.
nn::PenaltyHook make_penalty_hook(const ConsolidationState& state);
nn::PenaltyHook make_penalty_hook(const EwcHistory& history, double lambda_prior = 0.0);

}  // namespace contreg::continual
