#include <doctest.h>

#include <random>
#include <stdexcept>

#include "contreg/metrics.hpp"
#include "contreg/nn.hpp"

using namespace contreg;

TEST_CASE("forgetting ratio: hand values, clamping, and rejection of l1 <= 0") {
  CHECK(metrics::forgetting_ratio(0.02, 0.02) == 0.0);
  CHECK(metrics::forgetting_ratio(0.01, 0.03) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(metrics::forgetting_ratio(0.05, 0.01) == 0.0);  // improvement clamps to zero
  CHECK_THROWS_AS(metrics::forgetting_ratio(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(metrics::forgetting_ratio(-0.5, 0.1), std::invalid_argument);
}

TEST_CASE("forgetting ratio: invariant under rescaling both losses") {
  // Power-of-two scale factors keep the arithmetic exact.
  const double l1 = 0.013, l2 = 0.057;
  const double base = metrics::forgetting_ratio(l1, l2);
  for (double c : {0.25, 2.0, 1024.0}) {
    CHECK(metrics::forgetting_ratio(c * l1, c * l2) == base);
  }
}

TEST_CASE("dataset_mse: bit-identical to collecting outputs and calling nn::mse") {
  auto net = nn::Network::initialized({{3, 5, nn::Activation::LeakyRelu},
                                       {5, 3, nn::Activation::Identity}},
                                      123);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::TrainSet data;
  for (int i = 0; i < 25; ++i) {
    nn::TrainSample s;
    for (int j = 0; j < 3; ++j) s.input.push_back(u(rng));
    for (int j = 0; j < 3; ++j) s.target.push_back(u(rng));
    data.push_back(std::move(s));
  }

  std::vector<nn::Vector> outs, recon_targets, pred_targets;
  for (const auto& s : data) {
    outs.push_back(nn::forward(net, s.input, nn::Mode::Eval));
    recon_targets.push_back(s.input);
    pred_targets.push_back(s.target);
  }
  CHECK(metrics::dataset_mse(net, data, nn::LossKind::Reconstruction) ==
        nn::mse(outs, recon_targets));
  CHECK(metrics::dataset_mse(net, data, nn::LossKind::Prediction) ==
        nn::mse(outs, pred_targets));
}

TEST_CASE("metrics record: headline accessors prefer the predictor when present") {
  metrics::MetricsRecord rec;
  rec.fitting_error_ae = 0.5;
  rec.prediction_error_ae = 0.6;
  CHECK(rec.fitting_error() == 0.5);
  CHECK(rec.prediction_error() == 0.6);

  rec.fitting_error_pred = 0.1;
  rec.prediction_error_pred = 0.2;
  CHECK(rec.fitting_error() == 0.1);
  CHECK(rec.prediction_error() == 0.2);
}
