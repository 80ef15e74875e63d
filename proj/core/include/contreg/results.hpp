#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "contreg/engine.hpp"
#include "contreg/metrics.hpp"

namespace contreg::results {

/// One run's outcome as persisted to the results file: provenance (config
/// hash, seed, grid overrides), metrics, per-update reports, and the
/// windowed error series for plotting.
struct ResultRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string instance;
  std::vector<std::pair<std::string, std::string>> overrides;  // grid cell coordinates

  bool failed = false;
  std::string error;

  metrics::MetricsRecord metrics;
  std::vector<engine::UpdateReport> updates;

  // Mean ||y - y_hat||^2 per contiguous window of `window_size` samples
  // across warm-up + update + evaluation.
  std::size_t window_size = 0;
  std::vector<double> window_means_ae;
  std::vector<double> window_means_pred;

  double duration_seconds = 0.0;
};

/// Serializes one record as a single JSON line. Grid sweeps exclude the
/// wall-clock duration so identical sweeps yield byte-identical files.
std::string to_json_line(const ResultRecord& record, bool include_duration);

/// Parses one line back. Throws ReportError on malformed JSON.
ResultRecord from_json_line(const std::string& line);

/// All records of a JSON-lines file. Throws ReportError when the file is
/// missing, unreadable, or holds no records.
std::vector<ResultRecord> load_results(const std::string& path);

/// Mean over each full contiguous window; a trailing partial window is
/// dropped. window_size of 0 yields an empty list.
std::vector<double> window_means(const std::vector<double>& per_sample_errors,
                                 std::size_t window_size);

}  // namespace contreg::results
