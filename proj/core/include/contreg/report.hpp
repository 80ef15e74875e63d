#pragma once

#include <string>
#include <vector>

#include "contreg/results.hpp"

namespace contreg::report {

struct Stat {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Per-instance aggregation over all non-failed records.
struct InstanceSummary {
  std::string instance;
  std::size_t runs = 0;
  std::size_t failed = 0;
  Stat fitting_error;
  Stat prediction_error;
  Stat forgetting_ae;    // only over records carrying the field
  Stat forgetting_pred;
  Stat updates_ae;
  Stat updates_pred;
};

std::vector<InstanceSummary> summarize(const std::vector<results::ResultRecord>& records);

/// Human-readable mean/min/max table.
std::string render_summary(const std::vector<InstanceSummary>& summaries);

/// Same numbers as CSV: one row per (instance, metric).
std::string summary_csv(const std::vector<InstanceSummary>& summaries);

/// Windowed error series, one row per (record, window):
/// config_hash,seed,instance,window,mean_ae,mean_pred.
std::string window_series_csv(const std::vector<results::ResultRecord>& records);

/// Raw hyperparameters-vs-metrics rows for parallel-coordinates plotting:
/// one row per record, one column per override key seen anywhere.
std::string parallel_coordinates_csv(const std::vector<results::ResultRecord>& records);

}  // namespace contreg::report
