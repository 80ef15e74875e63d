#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contreg/config.hpp"
#include "contreg/results.hpp"

namespace contreg::experiment {

/// The dataset a config asks for: generated from gen.* settings or loaded
/// from CSV (and preprocessed when it carries targets and no bounds yet).
dataio::Dataset load_or_generate(const config::ExperimentConfig& config);

/// Runs one experiment end to end and packages the persisted record.
/// `detail`, when given, receives the full in-memory record (per-sample
/// error series included) for cross-checks.
results::ResultRecord run_single(const config::ExperimentConfig& config,
                                 engine::ExperimentRecord* detail = nullptr);

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

/// A sweep: base assignments plus axes (file order), run `repetitions`
/// times per cell with seeds base_seed, base_seed+1, ...
struct GridSpec {
  config::KeyValues base;
  std::vector<GridAxis> axes;
  std::size_t repetitions = 1;
  std::uint64_t base_seed = 1;
};

/// Parses a grid file: ordinary config keys plus `grid.sweep.<key> =
/// v1,v2,...` axes, `grid.repetitions`, and `grid.base_seed`.
/// Throws ConfigError on empty axes or sweeps over list-valued keys.
GridSpec parse_grid_text(const std::string& text);
GridSpec parse_grid_file(const std::string& path);

/// One cell = one choice per axis, in odometer order (last axis fastest).
std::vector<config::KeyValues> enumerate_cells(const GridSpec& spec);

/// Runs every cell x repetition on `parallelism` workers, appending result
/// lines as they finish, then rewrites the file sorted by (config hash,
/// seed) so the final bytes are independent of scheduling. Failed cells
/// become failed records; the sweep continues.
void run_grid(const GridSpec& spec, std::size_t parallelism, const std::string& out_path);

}  // namespace contreg::experiment
