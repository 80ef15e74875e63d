#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include "contreg/dataio.hpp"
#include "contreg/errors.hpp"

using namespace contreg;

namespace {

std::filesystem::path temp_csv(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

dataio::Dataset make_supervised(std::size_t n) {
  dataio::Dataset data;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(10.0, 20.0);
  for (std::size_t i = 0; i < n; ++i) {
    dataio::Sample s;
    s.features = {u(rng), u(rng) * 3.0};
    s.target = u(rng);
    s.time_index = i;
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace

TEST_CASE("load_csv: full schema with comments") {
  auto path = temp_csv("full_schema.csv",
                       "# generated somewhere\n"
                       "time,f1,f2,power\n"
                       "0,1.5,2.5,0.7\n"
                       "1,3.5,4.5,0.8\n"
                       "2,5.5,6.5,0.9\n");
  auto data = dataio::load_csv(path.string());
  REQUIRE(data.size() == 3);
  CHECK(data.feature_dim() == 2);
  CHECK(data.has_targets());
  CHECK(data.samples[1].features[0] == 3.5);
  CHECK(*data.samples[2].target == 0.9);
  CHECK(data.samples[2].time_index == 2);
  REQUIRE(data.comments.size() == 1);
  CHECK(data.comments[0] == "generated somewhere");
}

TEST_CASE("load_csv: time and power columns are optional") {
  auto path = temp_csv("features_only.csv",
                       "f1,f2,f3\n"
                       "1,2,3\n"
                       "4,5,6\n");
  auto data = dataio::load_csv(path.string());
  REQUIRE(data.size() == 2);
  CHECK(data.feature_dim() == 3);
  CHECK_FALSE(data.has_targets());
  CHECK(data.samples[0].time_index == 0);  // synthesized
  CHECK(data.samples[1].time_index == 1);
}

TEST_CASE("load_csv: ragged rows and bad headers are schema errors") {
  auto ragged = temp_csv("ragged.csv",
                         "time,f1,f2,power\n"
                         "0,1,2,3\n"
                         "1,1,2\n");
  CHECK_THROWS_AS(dataio::load_csv(ragged.string()), SchemaError);

  auto header = temp_csv("bad_header.csv", "time,widget,power\n0,1,2\n");
  CHECK_THROWS_AS(dataio::load_csv(header.string()), SchemaError);
}

TEST_CASE("load_csv: malformed numbers report the 1-based line") {
  auto path = temp_csv("bad_number.csv",
                       "time,f1,power\n"
                       "0,1.0,0.5\n"
                       "1,oops,0.5\n");
  try {
    dataio::load_csv(path.string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("write_csv then load_csv reproduces values bit-exactly") {
  dataio::Dataset data;
  data.comments = {"alpha", "beta"};
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < 20; ++i) {
    dataio::Sample s;
    s.features = {u(rng) / 3.0, u(rng) * 1e-7, u(rng) * 1e6};
    s.target = u(rng) / 7.0;
    s.time_index = i;
    data.samples.push_back(std::move(s));
  }

  auto path = std::filesystem::temp_directory_path() / "roundtrip.csv";
  dataio::write_csv(data, path.string());
  auto back = dataio::load_csv(path.string());

  REQUIRE(back.size() == data.size());
  CHECK(back.comments == data.comments);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back.samples[i].features == data.samples[i].features);
    CHECK(back.samples[i].target == data.samples[i].target);
    CHECK(back.samples[i].time_index == i);
  }
}

TEST_CASE("preprocess: drops zero-power runs longer than a day, keeps shorter ones") {
  auto build = [](std::size_t run) {
    auto data = make_supervised(60);
    for (std::size_t i = 10; i < 10 + run; ++i) data.samples[i].target = 0.0;
    return data;
  };

  auto kept = dataio::preprocess(build(24));
  CHECK(kept.size() == 60);  // a 24-hour lull survives

  auto dropped = dataio::preprocess(build(25));
  CHECK(dropped.size() == 35);  // the whole 25-hour run goes
  // Neighbours of the removed run are still adjacent and in order.
  CHECK(dropped.samples[9].time_index == 9);
  CHECK(dropped.samples[10].time_index == 35);
}

TEST_CASE("preprocess: normalizes features to [0,1] and records bounds") {
  auto data = make_supervised(100);
  auto clean = dataio::preprocess(data);
  REQUIRE(clean.bounds.has_value());

  for (std::size_t c = 0; c < 2; ++c) {
    double lo = 1e300, hi = -1e300;
    for (const auto& s : clean.samples) {
      lo = std::min(lo, s.features[c]);
      hi = std::max(hi, s.features[c]);
    }
    CHECK(lo == 0.0);  // min-max scaling pins the extremes exactly
    CHECK(hi == 1.0);
  }

  // Already-normalized input returns unchanged (idempotent).
  auto again = dataio::preprocess(clean);
  CHECK(again.size() == clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i)
    CHECK(again.samples[i].features == clean.samples[i].features);
}

TEST_CASE("preprocess: rated capacity scales targets before the zero scan") {
  auto data = make_supervised(10);
  data.samples[3].target = 5.0;
  dataio::PreprocessOptions opts;
  opts.rated_capacity = 10.0;
  auto clean = dataio::preprocess(data, opts);
  CHECK(*clean.samples[3].target == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("preprocess: constant feature column is named in the error") {
  auto data = make_supervised(10);
  for (auto& s : data.samples) s.features[1] = 42.0;
  try {
    dataio::preprocess(data);
    FAIL("expected NormalizationError");
  } catch (const NormalizationError& e) {
    CHECK(e.column == "f2");
  }

  dataio::Dataset no_targets;
  no_targets.samples.push_back({{1.0}, std::nullopt, 0});
  no_targets.samples.push_back({{2.0}, std::nullopt, 1});
  CHECK_THROWS_AS(dataio::preprocess(no_targets), std::invalid_argument);
}

TEST_CASE("split_phases: exact fit, surplus, and shortage") {
  dataio::PhaseSizes sizes{5, 20, 5};

  auto data = make_supervised(30);
  auto split = dataio::split_phases(data, sizes);
  CHECK(split.warm_up.size() == 5);
  CHECK(split.update.size() == 20);
  CHECK(split.evaluation.size() == 5);
  CHECK(split.discarded == 0);

  // Concatenating the slices reproduces the original order.
  std::size_t pos = 0;
  for (const auto* phase : {&split.warm_up, &split.update, &split.evaluation})
    for (const auto& s : phase->samples) {
      CHECK(s.time_index == data.samples[pos].time_index);
      CHECK(s.features == data.samples[pos].features);
      ++pos;
    }

  auto longer = make_supervised(37);
  CHECK(dataio::split_phases(longer, sizes).discarded == 7);

  auto shorter = make_supervised(29);
  CHECK_THROWS_AS(dataio::split_phases(shorter, sizes), ConfigError);
}

TEST_CASE("split_phases: slices inherit comments and bounds") {
  auto data = dataio::preprocess(make_supervised(40));
  data.comments = {"origin"};
  auto split = dataio::split_phases(data, {10, 20, 10});
  CHECK(split.update.comments == data.comments);
  REQUIRE(split.evaluation.bounds.has_value());
  CHECK(split.evaluation.bounds->feature_min == data.bounds->feature_min);
}
