#include "contreg/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "contreg/errors.hpp"

namespace contreg::report {

namespace {

std::string format_full(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string format_short(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

void accumulate(Stat& stat, double value) {
  if (stat.count == 0) {
    stat.min = stat.max = value;
    stat.mean = 0.0;
  }
  stat.min = std::min(stat.min, value);
  stat.max = std::max(stat.max, value);
  stat.mean += value;  // finalized into a mean afterwards
  stat.count += 1;
}

void finalize(Stat& stat) {
  if (stat.count > 0) stat.mean /= static_cast<double>(stat.count);
}

}  // namespace

std::vector<InstanceSummary> summarize(const std::vector<results::ResultRecord>& records) {
  if (records.empty()) throw ReportError("no records to summarize");

  std::map<std::string, InstanceSummary> by_instance;
  for (const auto& record : records) {
    InstanceSummary& summary = by_instance[record.instance];
    summary.instance = record.instance;
    if (record.failed) {
      summary.failed += 1;
      continue;
    }
    summary.runs += 1;
    accumulate(summary.fitting_error, record.metrics.fitting_error());
    accumulate(summary.prediction_error, record.metrics.prediction_error());
    if (record.metrics.forgetting_ratio_ae)
      accumulate(summary.forgetting_ae, *record.metrics.forgetting_ratio_ae);
    if (record.metrics.forgetting_ratio_pred)
      accumulate(summary.forgetting_pred, *record.metrics.forgetting_ratio_pred);
    accumulate(summary.updates_ae, static_cast<double>(record.metrics.update_count_ae));
    accumulate(summary.updates_pred, static_cast<double>(record.metrics.update_count_pred));
  }

  std::vector<InstanceSummary> summaries;
  for (auto& [_, summary] : by_instance) {
    finalize(summary.fitting_error);
    finalize(summary.prediction_error);
    finalize(summary.forgetting_ae);
    finalize(summary.forgetting_pred);
    finalize(summary.updates_ae);
    finalize(summary.updates_pred);
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

namespace {

void render_stat_row(std::ostringstream& out, const std::string& label, const Stat& stat) {
  if (stat.count == 0) return;
  out << "  " << label << ": mean " << format_short(stat.mean) << "  min "
      << format_short(stat.min) << "  max " << format_short(stat.max) << "  (n=" << stat.count
      << ")\n";
}

void csv_stat_rows(std::ostringstream& out, const std::string& instance, const std::string& metric,
                   const Stat& stat) {
  if (stat.count == 0) return;
  out << instance << ',' << metric << ',' << stat.count << ',' << format_full(stat.mean) << ','
      << format_full(stat.min) << ',' << format_full(stat.max) << '\n';
}

}  // namespace

std::string render_summary(const std::vector<InstanceSummary>& summaries) {
  std::ostringstream out;
  for (const auto& summary : summaries) {
    out << "instance " << summary.instance << " (" << summary.runs << " runs";
    if (summary.failed > 0) out << ", " << summary.failed << " failed";
    out << ")\n";
    render_stat_row(out, "fitting error   ", summary.fitting_error);
    render_stat_row(out, "prediction error", summary.prediction_error);
    render_stat_row(out, "forgetting (ae)  ", summary.forgetting_ae);
    render_stat_row(out, "forgetting (pred)", summary.forgetting_pred);
    render_stat_row(out, "updates (ae)     ", summary.updates_ae);
    render_stat_row(out, "updates (pred)   ", summary.updates_pred);
  }
  return out.str();
}

std::string summary_csv(const std::vector<InstanceSummary>& summaries) {
  std::ostringstream out;
  out << "instance,metric,count,mean,min,max\n";
  for (const auto& summary : summaries) {
    csv_stat_rows(out, summary.instance, "fitting_error", summary.fitting_error);
    csv_stat_rows(out, summary.instance, "prediction_error", summary.prediction_error);
    csv_stat_rows(out, summary.instance, "forgetting_ratio_ae", summary.forgetting_ae);
    csv_stat_rows(out, summary.instance, "forgetting_ratio_pred", summary.forgetting_pred);
    csv_stat_rows(out, summary.instance, "update_count_ae", summary.updates_ae);
    csv_stat_rows(out, summary.instance, "update_count_pred", summary.updates_pred);
  }
  return out.str();
}

std::string window_series_csv(const std::vector<results::ResultRecord>& records) {
  std::ostringstream out;
  out << "config_hash,seed,instance,window,mean_ae,mean_pred\n";
  for (const auto& record : records) {
    if (record.failed) continue;
    const std::size_t windows =
        std::max(record.window_means_ae.size(), record.window_means_pred.size());
    for (std::size_t w = 0; w < windows; ++w) {
      out << record.config_hash << ',' << record.seed << ',' << record.instance << ',' << w << ',';
      if (w < record.window_means_ae.size()) out << format_full(record.window_means_ae[w]);
      out << ',';
      if (w < record.window_means_pred.size()) out << format_full(record.window_means_pred[w]);
      out << '\n';
    }
  }
  return out.str();
}

std::string parallel_coordinates_csv(const std::vector<results::ResultRecord>& records) {
  std::set<std::string> override_keys;
  for (const auto& record : records)
    for (const auto& [key, _] : record.overrides) override_keys.insert(key);

  std::ostringstream out;
  out << "config_hash,seed,instance";
  for (const auto& key : override_keys) out << ',' << key;
  out << ",fitting_error,prediction_error,forgetting_ratio_ae,forgetting_ratio_pred,"
         "update_count_ae,update_count_pred,failed\n";

  for (const auto& record : records) {
    out << record.config_hash << ',' << record.seed << ',' << record.instance;
    for (const auto& key : override_keys) {
      out << ',';
      for (const auto& [k, v] : record.overrides)
        if (k == key) {
          out << v;
          break;
        }
    }
    out << ',';
    if (!record.failed) out << format_full(record.metrics.fitting_error());
    out << ',';
    if (!record.failed) out << format_full(record.metrics.prediction_error());
    out << ',';
    if (record.metrics.forgetting_ratio_ae)
      out << format_full(*record.metrics.forgetting_ratio_ae);
    out << ',';
    if (record.metrics.forgetting_ratio_pred)
      out << format_full(*record.metrics.forgetting_ratio_pred);
    out << ',' << record.metrics.update_count_ae << ',' << record.metrics.update_count_pred << ','
        << (record.failed ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace contreg::report
