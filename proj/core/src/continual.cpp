#include "contreg/continual.hpp"

#include <stdexcept>

namespace contreg::continual {

FisherDiagonal estimate_fisher_diagonal(const nn::Network& net, const nn::TrainSet& dataset,
                                        nn::LossKind kind) {
  if (dataset.empty()) throw std::invalid_argument("Fisher estimation over an empty dataset");

  FisherDiagonal fisher;
  fisher.values.assign(net.parameter_count(), 0.0);
  fisher.sample_count = dataset.size();

  nn::TrainSet single(1);
  for (const auto& sample : dataset) {
    single[0] = sample;
    // backward over one sample differentiates ||r||^2; the per-sample
    // negative log-likelihood is half that.
    nn::BackwardResult back = nn::backward(net, single, kind);
    for (std::size_t i = 0; i < fisher.values.size(); ++i) {
      const double g = 0.5 * back.gradient[i];
      fisher.values[i] += g * g;
    }
  }
  for (auto& v : fisher.values) v /= static_cast<double>(dataset.size());
  return fisher;
}

void consolidate(ConsolidationState& state, const FisherDiagonal& fisher,
                 const nn::Vector& new_anchor) {
  if (fisher.values.size() != new_anchor.size())
    throw std::invalid_argument("Fisher and anchor lengths differ");
  if (state.update_count > 0 && state.accumulated_fisher.size() != fisher.values.size())
    throw std::invalid_argument("Fisher length does not match consolidation state");

  if (state.update_count == 0) {
    state.accumulated_fisher = fisher.values;
  } else if (state.rule == ConsolidationRule::Decay) {
    for (std::size_t i = 0; i < fisher.values.size(); ++i)
      state.accumulated_fisher[i] = state.gamma * state.accumulated_fisher[i] + fisher.values[i];
  } else {
    for (std::size_t i = 0; i < fisher.values.size(); ++i)
      state.accumulated_fisher[i] = state.mixing_alpha * state.accumulated_fisher[i] +
                                    (1.0 - state.mixing_alpha) * fisher.values[i];
  }
  state.anchor = new_anchor;
  state.update_count += 1;
}

Penalty ewc_penalty(const nn::Vector& params, const ConsolidationState& state) {
  if (state.update_count == 0)
    throw NotConsolidatedError("penalty requested before any consolidation");
  if (params.size() != state.accumulated_fisher.size() || params.size() != state.anchor.size())
    throw std::invalid_argument("parameter length does not match consolidation state");

  Penalty penalty;
  penalty.gradient.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double d = params[i] - state.anchor[i];
    const double f = state.accumulated_fisher[i];
    penalty.value += 0.5 * state.lambda * f * d * d;
    penalty.gradient[i] = state.lambda * f * d;
  }
  return penalty;
}

Penalty ewc_penalty_multi(const nn::Vector& params, const EwcHistory& history,
                          double lambda_prior) {
  if (history.tasks.empty())
    throw NotConsolidatedError("penalty requested over an empty task history");
  for (const auto& task : history.tasks)
    if (task.fisher.values.size() != params.size())
      throw std::invalid_argument("task Fisher length does not match parameters");
  const nn::Vector& anchor = history.tasks.back().anchor;
  if (anchor.size() != params.size())
    throw std::invalid_argument("anchor length does not match parameters");

  Penalty penalty;
  penalty.gradient.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    double weight = lambda_prior;
    for (const auto& task : history.tasks) weight += task.lambda * task.fisher.values[i];
    const double d = params[i] - anchor[i];
    penalty.value += 0.5 * weight * d * d;
    penalty.gradient[i] = weight * d;
  }
  return penalty;
}

nn::PenaltyHook make_penalty_hook(const ConsolidationState& state) {
  return [&state](const nn::Vector& params) {
    Penalty p = ewc_penalty(params, state);
    return nn::PenaltyResult{p.value, std::move(p.gradient)};
  };
}

nn::PenaltyHook make_penalty_hook(const EwcHistory& history, double lambda_prior) {
  return [&history, lambda_prior](const nn::Vector& params) {
    Penalty p = ewc_penalty_multi(params, history, lambda_prior);
    return nn::PenaltyResult{p.value, std::move(p.gradient)};
  };
}

}  // namespace contreg::continual
