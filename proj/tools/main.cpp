// Experiment harness: generate datasets, run single experiments, sweep
// hyperparameter grids, and aggregate result files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "contreg/config.hpp"
#include "contreg/datagen.hpp"
#include "contreg/errors.hpp"
#include "contreg/experiment.hpp"
#include "contreg/report.hpp"
#include "contreg/results.hpp"

namespace {

int cmd_generate(const std::string& config_path, const std::string& out_path) {
  const contreg::config::ExperimentConfig config =
      contreg::config::parse_config_file(config_path);
  const contreg::datagen::SeriesGenerator generator(config.generator);
  contreg::dataio::write_csv(generator.generate(), out_path);
  std::cout << "wrote " << config.generator.length << " samples x " << config.generator.dims
            << " dims to " << out_path << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_path,
            std::optional<std::uint64_t> seed_override) {
  contreg::config::ExperimentConfig config = contreg::config::parse_config_file(config_path);
  if (seed_override) config.seed = *seed_override;

  const contreg::results::ResultRecord record = contreg::experiment::run_single(config);

  std::ofstream out(out_path, std::ios::app);
  if (!out) throw contreg::ConfigError("cannot open results file '" + out_path + "'");
  out << contreg::results::to_json_line(record, /*include_duration=*/true) << '\n';

  std::printf("instance %s seed %llu  fitting %.6g  prediction %.6g  updates ae %zu pred %zu\n",
              record.instance.c_str(), static_cast<unsigned long long>(record.seed),
              record.metrics.fitting_error(), record.metrics.prediction_error(),
              record.metrics.update_count_ae, record.metrics.update_count_pred);
  return 0;
}

int cmd_grid(const std::string& config_path, const std::string& out_path, std::size_t parallel) {
  const contreg::experiment::GridSpec spec = contreg::experiment::parse_grid_file(config_path);
  contreg::experiment::run_grid(spec, parallel, out_path);

  std::size_t cells = 1;
  for (const auto& axis : spec.axes) cells *= axis.values.size();
  std::cout << "ran " << cells << " cells x " << spec.repetitions << " repetitions -> "
            << out_path << "\n";
  return 0;
}

int cmd_report(const std::string& results_path, const std::string& out_dir) {
  const std::vector<contreg::results::ResultRecord> records =
      contreg::results::load_results(results_path);
  const auto summaries = contreg::report::summarize(records);

  std::filesystem::create_directories(out_dir);
  const auto write_file = [&](const std::string& name, const std::string& content) {
    const std::string path = out_dir + "/" + name;
    std::ofstream out(path);
    if (!out) throw contreg::ReportError("cannot write '" + path + "'");
    out << content;
  };
  write_file("summary.csv", contreg::report::summary_csv(summaries));
  write_file("series.csv", contreg::report::window_series_csv(records));
  write_file("parallel_coordinates.csv", contreg::report::parallel_coordinates_csv(records));

  std::cout << contreg::report::render_summary(summaries);
  std::cout << "wrote summary.csv, series.csv, parallel_coordinates.csv to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continual-learning regression experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::size_t parallel = 1;
  std::optional<std::uint64_t> seed_override;
  std::string results_path;

  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic dataset CSV");
  generate->add_option("--config", config_path, "experiment config (gen.* keys)")->required();
  generate->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "experiment config")->required();
  run->add_option("--out", out_path, "results file (JSON lines, appended)")
      ->default_val("results.jsonl");
  run->add_option("--seed", seed_override, "override the config seed");

  CLI::App* grid = app.add_subcommand("grid", "Sweep a hyperparameter grid");
  grid->add_option("--config", config_path, "grid config (grid.sweep.* axes)")->required();
  grid->add_option("--out", out_path, "results file (rewritten sorted)")
      ->default_val("results.jsonl");
  grid->add_option("--parallel", parallel, "worker count")->default_val(1);

  CLI::App* report = app.add_subcommand("report", "Aggregate a results file");
  report->add_option("results", results_path, "results file (JSON lines)")->required();
  report->add_option("--out", out_path, "output directory")->default_val("report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // bad invocation is a configuration error
  }

  try {
    if (generate->parsed()) return cmd_generate(config_path, out_path);
    if (run->parsed()) return cmd_run(config_path, out_path, seed_override);
    if (grid->parsed()) return cmd_grid(config_path, out_path, parallel);
    if (report->parsed()) return cmd_report(results_path, out_path);
  } catch (const contreg::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
