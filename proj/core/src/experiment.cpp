#include "contreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "contreg/errors.hpp"

namespace contreg::experiment {

dataio::Dataset load_or_generate(const config::ExperimentConfig& config) {
  if (config.data_source == "generated")
    return datagen::SeriesGenerator(config.generator).generate();

  dataio::Dataset raw = dataio::load_csv(config.data_path);
  if (raw.has_targets() && !raw.bounds) {
    dataio::PreprocessOptions options;
    options.rated_capacity = config.rated_capacity;
    return dataio::preprocess(raw, options);
  }
  return raw;
}

results::ResultRecord run_single(const config::ExperimentConfig& config,
                                 engine::ExperimentRecord* detail) {
  const auto start = std::chrono::steady_clock::now();

  const dataio::Dataset dataset = load_or_generate(config);
  const dataio::PhaseSplit split = dataio::split_phases(dataset, config.phases);
  const engine::EngineConfig engine_config = config::to_engine_config(config);

  engine::ExperimentRecord run = config.instance == config::Instance::Baseline
                                     ? engine::run_baseline(engine_config, split)
                                     : engine::run_phases(engine_config, split);

  results::ResultRecord record;
  record.config_hash = config::config_hash(config);
  record.seed = config.seed;
  record.instance = config::instance_name(config.instance);
  record.metrics = run.metrics;
  record.updates = run.updates;
  record.window_size = config.phases.evaluation;
  record.window_means_ae = results::window_means(run.series_ae, record.window_size);
  record.window_means_pred = results::window_means(run.series_pred, record.window_size);
  record.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (detail) *detail = std::move(run);
  return record;
}

GridSpec parse_grid_text(const std::string& text) {
  GridSpec spec;
  for (const auto& [key, value] : config::parse_key_values(text)) {
    if (key == "grid.repetitions") {
      spec.repetitions = static_cast<std::size_t>(std::stoull(value));
    } else if (key == "grid.base_seed") {
      spec.base_seed = std::stoull(value);
    } else if (key.rfind("grid.sweep.", 0) == 0) {
      GridAxis axis;
      axis.key = key.substr(11);
      if (axis.key == "ae.hidden" || axis.key == "predictor.hidden")
        throw ConfigError("cannot sweep list-valued key '" + axis.key + "'");
      std::istringstream stream(value);
      std::string field;
      while (std::getline(stream, field, ',')) {
        const auto b = field.find_first_not_of(" \t");
        const auto e = field.find_last_not_of(" \t");
        if (b != std::string::npos) axis.values.push_back(field.substr(b, e - b + 1));
      }
      if (axis.values.empty())
        throw ConfigError("grid axis '" + axis.key + "' has no values");
      spec.axes.push_back(std::move(axis));
    } else {
      spec.base.emplace_back(key, value);
    }
  }
  if (spec.repetitions == 0) throw ConfigError("grid.repetitions must be positive");
  return spec;
}

GridSpec parse_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_grid_text(buffer.str());
}

namespace {

void assign(config::KeyValues& entries, const std::string& key, const std::string& value) {
  for (auto& [existing, existing_value] : entries) {
    if (existing == key) {
      existing_value = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

}  // namespace

std::vector<config::KeyValues> enumerate_cells(const GridSpec& spec) {
  std::vector<config::KeyValues> cells;
  std::vector<std::size_t> odometer(spec.axes.size(), 0);
  while (true) {
    config::KeyValues cell = spec.base;
    for (std::size_t a = 0; a < spec.axes.size(); ++a)
      assign(cell, spec.axes[a].key, spec.axes[a].values[odometer[a]]);
    cells.push_back(std::move(cell));

    // odometer step, last axis fastest
    std::size_t a = spec.axes.size();
    while (a > 0) {
      --a;
      if (++odometer[a] < spec.axes[a].values.size()) break;
      odometer[a] = 0;
      if (a == 0) return cells;
    }
    if (spec.axes.empty()) return cells;
  }
}

void run_grid(const GridSpec& spec, std::size_t parallelism, const std::string& out_path) {
  if (parallelism == 0) throw ConfigError("parallelism must be positive");

  struct Job {
    config::KeyValues entries;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::uint64_t seed = 0;
  };

  std::vector<Job> jobs;
  for (const auto& cell : enumerate_cells(spec)) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& axis : spec.axes)
      for (const auto& [key, value] : cell)
        if (key == axis.key) overrides.emplace_back(key, value);
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
      Job job;
      job.entries = cell;
      job.overrides = overrides;
      job.seed = spec.base_seed + rep;
      jobs.push_back(std::move(job));
    }
  }

  std::vector<results::ResultRecord> records(jobs.size());
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot open results file '" + out_path + "' for writing");
  std::mutex out_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= jobs.size()) return;
      const Job& job = jobs[index];

      results::ResultRecord record;
      record.seed = job.seed;
      try {
        config::ExperimentConfig cfg = config::build_config(job.entries);
        cfg.seed = job.seed;
        // Fill provenance first so a failed run still carries it.
        record.config_hash = config::config_hash(cfg);
        record.instance = config::instance_name(cfg.instance);
        record = run_single(cfg);
      } catch (const std::exception& e) {
        record.failed = true;
        record.error = e.what();
      }
      record.overrides = job.overrides;

      std::lock_guard<std::mutex> lock(out_mutex);
      out << results::to_json_line(record, false) << '\n';
      out.flush();
      records[index] = std::move(record);
    }
  };

  std::vector<std::thread> workers;
  const std::size_t worker_count = std::min(parallelism, jobs.size());
  workers.reserve(worker_count);
  for (std::size_t w = 0; w < worker_count; ++w) workers.emplace_back(worker);
  for (auto& thread : workers) thread.join();
  out.close();

  // Rewrite in (config hash, seed) order so the file's bytes do not depend
  // on scheduling.
  std::stable_sort(records.begin(), records.end(),
                   [](const results::ResultRecord& a, const results::ResultRecord& b) {
                     if (a.config_hash != b.config_hash) return a.config_hash < b.config_hash;
                     return a.seed < b.seed;
                   });
  std::ofstream sorted(out_path, std::ios::trunc);
  if (!sorted) throw ConfigError("cannot rewrite results file '" + out_path + "'");
  for (const auto& record : records) sorted << results::to_json_line(record, false) << '\n';
}

}  // namespace contreg::experiment
