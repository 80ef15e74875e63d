#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

#include "contreg/continual.hpp"
#include "contreg/dataio.hpp"
#include "contreg/engine.hpp"
#include "contreg/errors.hpp"
#include "contreg/nn.hpp"

using namespace contreg;

namespace {

engine::EngineConfig tiny_config(std::uint64_t seed = 1) {
  engine::EngineConfig cfg;
  cfg.autoencoder = {{3, 2, nn::Activation::LeakyRelu, 0.05, 0.0},
                     {2, 3, nn::Activation::Identity}};
  cfg.ae_capacity = 4;
  cfg.pred_capacity = 4;
  cfg.phase1 = {16, 16, 8, 8};
  cfg.phase2 = {8, 8, 8, 8};
  cfg.learning_rate = 1e-2;
  cfg.seed = seed;
  return cfg;
}

engine::EngineConfig supervised_config(std::uint64_t seed = 1) {
  auto cfg = tiny_config(seed);
  cfg.predictor = {{2, 4, nn::Activation::Tanh}, {4, 1, nn::Activation::Identity}};
  return cfg;
}

dataio::Dataset random_stream(std::size_t n, bool targets, std::uint64_t seed) {
  dataio::Dataset data;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    dataio::Sample s;
    s.features = {u(rng), u(rng), u(rng)};
    if (targets) s.target = 0.5 * s.features[0] - 0.25 * s.features[1];
    s.time_index = i;
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace

TEST_CASE("engine config validation") {
  auto bad_ae = tiny_config();
  bad_ae.autoencoder.back().output_dim = 2;  // output != input
  CHECK_THROWS_AS(engine::Engine{bad_ae}, ConfigError);

  auto bad_pred = supervised_config();
  bad_pred.predictor.front().input_dim = 3;  // bottleneck is 2
  CHECK_THROWS_AS(engine::Engine{bad_pred}, ConfigError);

  auto bad_cap = tiny_config();
  bad_cap.ae_capacity = 0;
  CHECK_THROWS_AS(engine::Engine{bad_cap}, ConfigError);

  auto bad_gamma = tiny_config();
  bad_gamma.gamma = 1.5;
  CHECK_THROWS_AS(engine::Engine{bad_gamma}, ConfigError);
}

TEST_CASE("is_novelty: strictly greater than the threshold, ties are familiar") {
  engine::ThresholdState st{0.75, 0.02, 0.015};
  CHECK(engine::is_novelty(0.0151, st));
  CHECK_FALSE(engine::is_novelty(0.015, st));  // exact tie
  CHECK_FALSE(engine::is_novelty(0.0149, st));
}

TEST_CASE("score_sample: both error units match an explicit forward pass") {
  engine::Engine eng(tiny_config(5));
  dataio::Sample s{{0.2, -0.4, 0.8}, std::nullopt, 0};
  auto scored = eng.score_sample(s);
  auto recon = nn::forward(eng.autoencoder().net, s.features, nn::Mode::Eval);
  double sq = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double d = s.features[i] - recon[i];
    sq += d * d;
  }
  CHECK(scored.reconstruction_sq_norm == sq);
  CHECK(scored.reconstruction_error == sq / 3.0);
  CHECK_FALSE(scored.prediction_error.has_value());
}

TEST_CASE("score_sample: supervised path matches an explicit encode-then-predict pass") {
  engine::Engine eng(supervised_config(7));
  dataio::Sample s{{0.3, 0.6, -0.9}, 0.4, 0};
  auto scored = eng.score_sample(s);
  REQUIRE(scored.prediction_error.has_value());

  auto latent = eng.encode(s.features);
  REQUIRE(latent.size() == 2);
  auto manual_latent = nn::forward_prefix(eng.autoencoder().net, s.features, 1);
  CHECK(latent == manual_latent);

  auto y = nn::forward(eng.predictor().net, latent, nn::Mode::Eval);
  double d = *s.target - y[0];
  CHECK(*scored.prediction_error == d * d);

  // No target -> no prediction error, reconstruction still scored.
  dataio::Sample bare{{0.3, 0.6, -0.9}, std::nullopt, 1};
  auto bare_scored = eng.score_sample(bare);
  CHECK_FALSE(bare_scored.prediction_error.has_value());
  CHECK(bare_scored.reconstruction_error == scored.reconstruction_error);

  dataio::Sample wrong{{1.0}, std::nullopt, 2};
  CHECK_THROWS_AS(eng.score_sample(wrong), ShapeError);
}

TEST_CASE("route_sample: ties land in familiarity, capacity reports the fill") {
  engine::Engine eng(tiny_config());
  // Fresh thresholds are zero: an error of exactly zero is a tie.
  dataio::Sample s{{0.1, 0.2, 0.3}, std::nullopt, 0};
  engine::ScoredSample tie{0.0, 0.0, std::nullopt};
  auto r = eng.route_sample(s, tie);
  CHECK_FALSE(r.autoencoder_full);
  CHECK(eng.autoencoder().buffers.familiarity.size() == 1);
  CHECK(eng.autoencoder().buffers.novelty.empty());

  engine::ScoredSample hot{0.5, 1.5, std::nullopt};
  for (std::size_t i = 1; i <= 3; ++i) {
    r = eng.route_sample(s, hot);
    CHECK_FALSE(r.autoencoder_full);
    CHECK(eng.autoencoder().buffers.novelty.size() == i);
  }
  r = eng.route_sample(s, hot);  // fourth novel sample hits capacity 4
  CHECK(r.autoencoder_full);

  // Routing more novelty past a full buffer is a protocol violation.
  CHECK_THROWS_AS(eng.route_sample(s, hot), std::logic_error);
  // Familiar samples still pass through.
  CHECK_NOTHROW(eng.route_sample(s, tie));
}

TEST_CASE("perform_update: requires a full buffer and a non-frozen strategy") {
  auto cfg = tiny_config();
  engine::Engine eng(cfg);
  CHECK_THROWS_AS(eng.perform_update(engine::SubModelKind::Autoencoder),
                  PrematureUpdateError);

  cfg.strategy = engine::UpdateStrategy::None;
  engine::Engine frozen(cfg);
  CHECK_THROWS_AS(frozen.perform_update(engine::SubModelKind::Autoencoder),
                  std::logic_error);
}

TEST_CASE("perform_update: trains on novelty only, empties buffers, resets the threshold") {
  auto cfg = tiny_config(3);
  cfg.ae_capacity = 6;
  engine::Engine eng(cfg);
  auto data = random_stream(10, false, 50);

  // Capture exactly what the update trains on.
  nn::TrainSet seen;
  eng.set_update_observer([&](engine::SubModelKind, const nn::TrainSet& set) { seen = set; });

  // Route 4 fabricated-familiar and 6 genuinely scored novel samples.
  engine::ScoredSample tie{0.0, 0.0, std::nullopt};
  for (int i = 0; i < 4; ++i) eng.route_sample(data.samples[i], tie);
  std::vector<dataio::Sample> expected_novel;
  bool full = false;
  for (int i = 4; i < 10; ++i) {
    auto scored = eng.score_sample(data.samples[i]);
    CHECK(scored.reconstruction_error > 0.0);  // fresh net reconstructs nothing
    full = eng.route_sample(data.samples[i], scored).autoencoder_full;
    expected_novel.push_back(data.samples[i]);
  }
  CHECK(full);
  CHECK(eng.autoencoder().buffers.familiarity.size() == 4);

  auto report = eng.perform_update(engine::SubModelKind::Autoencoder);

  // The training set is the novelty buffer, nothing else (no old data).
  REQUIRE(seen.size() == expected_novel.size());
  for (std::size_t i = 0; i < seen.size(); ++i)
    CHECK(seen[i].input == expected_novel[i].features);

  CHECK(eng.autoencoder().buffers.novelty.empty());
  CHECK(eng.autoencoder().buffers.familiarity.empty());
  CHECK(eng.autoencoder().update_count == 1);

  CHECK(report.ordinal == 1);
  CHECK(report.epochs_run > 0);
  REQUIRE(report.validation_mse.has_value());
  REQUIRE(report.pre_update_validation_mse.has_value());

  const auto& th = eng.autoencoder().threshold;
  CHECK(th.threshold == th.alpha * th.mse_min);
  CHECK(report.new_threshold == th.threshold);
  CHECK(th.mse_min > 0.0);
}

TEST_CASE("reestimate_threshold: mse_min is the plain mean of per-sample errors") {
  engine::Engine eng(tiny_config(9));
  auto data = random_stream(20, false, 60);

  auto st = eng.reestimate_threshold(engine::SubModelKind::Autoencoder, data.samples);
  double sum = 0.0;
  for (const auto& s : data.samples) sum += eng.score_sample(s).reconstruction_error;
  CHECK(std::abs(st.mse_min - sum / 20.0) < 1e-12);
  CHECK(st.threshold == st.alpha * st.mse_min);

  // Empty snapshot: state untouched.
  auto before = eng.autoencoder().threshold;
  auto after = eng.reestimate_threshold(engine::SubModelKind::Autoencoder, {});
  CHECK(after.threshold == before.threshold);
  CHECK(after.mse_min == before.mse_min);
}

TEST_CASE("direct updates replay the consolidation recursion") {
  // Two buffer-triggered updates without a warm-up: update_count becomes 2
  // and the accumulator is gamma * F1 + F2.
  auto cfg = tiny_config(11);
  cfg.ae_capacity = 5;
  cfg.gamma = 0.9;
  engine::Engine eng(cfg);
  auto data = random_stream(10, false, 70);

  auto drive = [&](std::size_t from) {
    for (std::size_t i = from; i < from + 5; ++i) {
      auto scored = eng.score_sample(data.samples[i]);
      // Force novelty regardless of the current threshold.
      scored.reconstruction_error = eng.autoencoder().threshold.threshold + 1.0;
      eng.route_sample(data.samples[i], scored);
    }
  };

  drive(0);
  eng.perform_update(engine::SubModelKind::Autoencoder);
  auto f1 = eng.autoencoder().consolidation.accumulated_fisher;  // first call: F~ = F1
  CHECK(eng.autoencoder().consolidation.update_count == 1);

  drive(5);
  eng.perform_update(engine::SubModelKind::Autoencoder);
  CHECK(eng.autoencoder().consolidation.update_count == 2);
  CHECK(eng.autoencoder().update_count == 2);

  // Replay F2 independently: Fisher of the post-update net over the second
  // update's novelty-plus-familiarity snapshot (familiarity was empty).
  nn::TrainSet union_set;
  for (std::size_t i = 5; i < 10; ++i) union_set.push_back({data.samples[i].features, {}});
  auto f2 = continual::estimate_fisher_diagonal(eng.autoencoder().net, union_set,
                                                nn::LossKind::Reconstruction);
  const auto& acc = eng.autoencoder().consolidation.accumulated_fisher;
  REQUIRE(acc.size() == f1.size());
  for (std::size_t i = 0; i < acc.size(); ++i)
    CHECK(acc[i] == 0.9 * f1[i] + f2.values[i]);
}

TEST_CASE("stream: conservation without triggers, counts with them") {
  auto cfg = tiny_config(13);
  cfg.ae_capacity = 1000;  // never fills over 30 samples
  engine::Engine eng(cfg);
  auto warm = random_stream(20, false, 80);
  eng.warm_up(warm);

  auto flow = random_stream(30, false, 81);
  auto result = eng.stream(flow);
  CHECK(result.updates.empty());
  CHECK(result.errors_ae.size() == 30);
  CHECK(eng.autoencoder().buffers.novelty.size() +
            eng.autoencoder().buffers.familiarity.size() ==
        30);
}

TEST_CASE("stream: a tiny threshold factor forces an update per capacity-full") {
  auto cfg = tiny_config(17);
  cfg.ae_alpha = 1e-300;  // threshold ~ 0: every sample is novel
  cfg.ae_capacity = 500;
  cfg.phase2 = {1, 1, 256, 256};
  engine::Engine eng(cfg);
  eng.warm_up(random_stream(100, false, 90));

  auto flow = random_stream(10000, false, 91);
  auto result = eng.stream(flow);
  CHECK(result.updates.size() == 20);
  CHECK(eng.autoencoder().update_count == 20);
  for (std::size_t i = 0; i < result.updates.size(); ++i) {
    CHECK(result.updates[i].ordinal == i + 1);
    CHECK(result.updates[i].stream_position == (i + 1) * 500 - 1);
  }
}

TEST_CASE("warm_up: sets thresholds and (OnlineEwc) consolidates once") {
  auto cfg = supervised_config(19);
  engine::Engine eng(cfg);
  auto result = eng.warm_up(random_stream(60, true, 100));
  CHECK_FALSE(result.history_ae.empty());
  CHECK_FALSE(result.history_pred.empty());
  CHECK(eng.autoencoder().threshold.threshold > 0.0);
  CHECK(eng.predictor().threshold.threshold > 0.0);
  CHECK(eng.autoencoder().consolidation.update_count == 1);
  CHECK(eng.predictor().consolidation.update_count == 1);

  auto ft = supervised_config(19);
  ft.strategy = engine::UpdateStrategy::FineTune;
  engine::Engine fine(ft);
  fine.warm_up(random_stream(60, true, 100));
  CHECK(fine.autoencoder().consolidation.update_count == 0);
}

TEST_CASE("supervised engine on target-free samples routes only the autoencoder") {
  engine::Engine eng(supervised_config(23));
  eng.warm_up(random_stream(40, true, 110));
  auto flow = random_stream(25, false, 111);
  auto result = eng.stream(flow);
  CHECK(result.errors_ae.size() == 25);
  CHECK(result.errors_pred.empty());
  CHECK(eng.predictor().buffers.novelty.empty());
  CHECK(eng.predictor().buffers.familiarity.empty());
}

TEST_CASE("run_phases: frozen instance never updates and reports no forgetting") {
  auto cfg = tiny_config(29);
  cfg.strategy = engine::UpdateStrategy::None;
  auto data = random_stream(120, false, 120);
  auto split = dataio::split_phases(data, {40, 60, 20});
  auto record = engine::run_phases(cfg, split);

  CHECK(record.metrics.update_count_ae == 0);
  CHECK_FALSE(record.metrics.forgetting_ratio_ae.has_value());
  CHECK_FALSE(record.metrics.l1_warmup_ae.has_value());
  CHECK(record.series_ae.size() == 120);
  CHECK(record.updates.empty());
  CHECK_FALSE(record.warmup_history_ae.empty());
}

TEST_CASE("run_phases: updating instance reports forgetting and updates") {
  auto cfg = supervised_config(31);
  cfg.ae_alpha = 1e-300;
  cfg.pred_alpha = 1e-300;
  cfg.ae_capacity = 30;
  cfg.pred_capacity = 30;
  cfg.phase1 = {16, 16, 8, 8};
  cfg.phase2 = {4, 4, 8, 8};
  auto data = random_stream(160, true, 130);
  auto split = dataio::split_phases(data, {40, 90, 30});
  auto record = engine::run_phases(cfg, split);

  CHECK(record.metrics.update_count_ae == 3);
  CHECK(record.metrics.update_count_pred == 3);
  REQUIRE(record.metrics.forgetting_ratio_ae.has_value());
  REQUIRE(record.metrics.l1_warmup_ae.has_value());
  REQUIRE(record.metrics.l2_warmup_ae.has_value());
  CHECK(*record.metrics.forgetting_ratio_ae ==
        doctest::Approx(std::max(0.0, *record.metrics.l2_warmup_ae -
                                          *record.metrics.l1_warmup_ae) /
                        *record.metrics.l1_warmup_ae)
            .epsilon(1e-12));
  REQUIRE(record.metrics.fitting_error_pred.has_value());
  CHECK(record.series_ae.size() == 160);
  CHECK(record.series_pred.size() == 160);
  CHECK(record.updates.size() == 6);
}

TEST_CASE("run_baseline: single training pass over both phases, no updates") {
  auto cfg = tiny_config(37);
  auto data = random_stream(120, false, 140);
  auto split = dataio::split_phases(data, {40, 60, 20});
  auto record = engine::run_baseline(cfg, split);

  CHECK(record.metrics.update_count_ae == 0);
  CHECK(record.updates.empty());
  CHECK_FALSE(record.metrics.forgetting_ratio_ae.has_value());
  CHECK(record.series_ae.size() == 120);
  CHECK(record.metrics.fitting_error_ae > 0.0);
}

TEST_CASE("run_phases: deterministic for a fixed seed") {
  auto cfg = supervised_config(41);
  cfg.ae_capacity = 25;
  cfg.pred_capacity = 25;
  cfg.phase2 = {2, 2, 8, 8};
  auto data = random_stream(130, true, 150);
  auto split = dataio::split_phases(data, {40, 70, 20});

  auto a = engine::run_phases(cfg, split);
  auto b = engine::run_phases(cfg, split);
  CHECK(a.metrics.fitting_error_ae == b.metrics.fitting_error_ae);
  CHECK(a.metrics.prediction_error() == b.metrics.prediction_error());
  CHECK(a.series_ae == b.series_ae);
  CHECK(a.updates.size() == b.updates.size());
}
