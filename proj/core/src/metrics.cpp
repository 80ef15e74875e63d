#include "contreg/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace contreg::metrics {

double forgetting_ratio(double l1, double l2) {
  if (l1 <= 0.0) throw std::invalid_argument("forgetting ratio needs a positive reference loss");
  return std::max(0.0, l2 - l1) / l1;
}

double dataset_mse(const nn::Network& net, const nn::TrainSet& samples, nn::LossKind kind) {
  std::vector<nn::Vector> outputs;
  std::vector<nn::Vector> targets;
  outputs.reserve(samples.size());
  targets.reserve(samples.size());
  for (const auto& sample : samples) {
    outputs.push_back(nn::forward(net, sample.input, nn::Mode::Eval));
    targets.push_back(kind == nn::LossKind::Reconstruction ? sample.input : sample.target);
  }
  return nn::mse(outputs, targets);
}

}  // namespace contreg::metrics
