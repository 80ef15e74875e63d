#include "contreg/results.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "contreg/errors.hpp"

namespace contreg::results {

namespace {

using json = nlohmann::ordered_json;

json metrics_to_json(const metrics::MetricsRecord& m) {
  json out;
  out["fitting_error_ae"] = m.fitting_error_ae;
  out["prediction_error_ae"] = m.prediction_error_ae;
  if (m.fitting_error_pred) out["fitting_error_pred"] = *m.fitting_error_pred;
  if (m.prediction_error_pred) out["prediction_error_pred"] = *m.prediction_error_pred;
  out["update_count_ae"] = m.update_count_ae;
  out["update_count_pred"] = m.update_count_pred;
  if (m.l1_warmup_ae) out["l1_warmup_ae"] = *m.l1_warmup_ae;
  if (m.l2_warmup_ae) out["l2_warmup_ae"] = *m.l2_warmup_ae;
  if (m.l1_warmup_pred) out["l1_warmup_pred"] = *m.l1_warmup_pred;
  if (m.l2_warmup_pred) out["l2_warmup_pred"] = *m.l2_warmup_pred;
  if (m.forgetting_ratio_ae) out["forgetting_ratio_ae"] = *m.forgetting_ratio_ae;
  if (m.forgetting_ratio_pred) out["forgetting_ratio_pred"] = *m.forgetting_ratio_pred;
  return out;
}

metrics::MetricsRecord metrics_from_json(const json& in) {
  metrics::MetricsRecord m;
  m.fitting_error_ae = in.value("fitting_error_ae", 0.0);
  m.prediction_error_ae = in.value("prediction_error_ae", 0.0);
  if (in.contains("fitting_error_pred")) m.fitting_error_pred = in["fitting_error_pred"].get<double>();
  if (in.contains("prediction_error_pred"))
    m.prediction_error_pred = in["prediction_error_pred"].get<double>();
  m.update_count_ae = in.value("update_count_ae", std::size_t{0});
  m.update_count_pred = in.value("update_count_pred", std::size_t{0});
  if (in.contains("l1_warmup_ae")) m.l1_warmup_ae = in["l1_warmup_ae"].get<double>();
  if (in.contains("l2_warmup_ae")) m.l2_warmup_ae = in["l2_warmup_ae"].get<double>();
  if (in.contains("l1_warmup_pred")) m.l1_warmup_pred = in["l1_warmup_pred"].get<double>();
  if (in.contains("l2_warmup_pred")) m.l2_warmup_pred = in["l2_warmup_pred"].get<double>();
  if (in.contains("forgetting_ratio_ae"))
    m.forgetting_ratio_ae = in["forgetting_ratio_ae"].get<double>();
  if (in.contains("forgetting_ratio_pred"))
    m.forgetting_ratio_pred = in["forgetting_ratio_pred"].get<double>();
  return m;
}

json update_to_json(const engine::UpdateReport& u) {
  json out;
  out["which"] = u.which == engine::SubModelKind::Autoencoder ? "autoencoder" : "predictor";
  out["ordinal"] = u.ordinal;
  out["stream_position"] = u.stream_position;
  out["epochs_run"] = u.epochs_run;
  out["training_mse"] = u.training_mse;
  if (u.validation_mse) out["validation_mse"] = *u.validation_mse;
  if (u.pre_update_validation_mse)
    out["pre_update_validation_mse"] = *u.pre_update_validation_mse;
  out["flagged_poor"] = u.flagged_poor;
  out["new_threshold"] = u.new_threshold;
  return out;
}

engine::UpdateReport update_from_json(const json& in) {
  engine::UpdateReport u;
  u.which = in.value("which", "autoencoder") == std::string("predictor")
                ? engine::SubModelKind::Predictor
                : engine::SubModelKind::Autoencoder;
  u.ordinal = in.value("ordinal", std::size_t{0});
  u.stream_position = in.value("stream_position", std::size_t{0});
  u.epochs_run = in.value("epochs_run", std::size_t{0});
  u.training_mse = in.value("training_mse", 0.0);
  if (in.contains("validation_mse")) u.validation_mse = in["validation_mse"].get<double>();
  if (in.contains("pre_update_validation_mse"))
    u.pre_update_validation_mse = in["pre_update_validation_mse"].get<double>();
  u.flagged_poor = in.value("flagged_poor", false);
  u.new_threshold = in.value("new_threshold", 0.0);
  return u;
}

}  // namespace

std::string to_json_line(const ResultRecord& record, bool include_duration) {
  json out;
  out["config_hash"] = record.config_hash;
  out["seed"] = record.seed;
  out["instance"] = record.instance;
  json overrides = json::object();
  for (const auto& [key, value] : record.overrides) overrides[key] = value;
  out["overrides"] = overrides;
  out["failed"] = record.failed;
  if (record.failed) out["error"] = record.error;
  out["metrics"] = metrics_to_json(record.metrics);
  json updates = json::array();
  for (const auto& update : record.updates) updates.push_back(update_to_json(update));
  out["updates"] = updates;
  out["window_size"] = record.window_size;
  out["window_means_ae"] = record.window_means_ae;
  out["window_means_pred"] = record.window_means_pred;
  if (include_duration) out["duration_seconds"] = record.duration_seconds;
  return out.dump();
}

ResultRecord from_json_line(const std::string& line) {
  json in;
  try {
    in = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ReportError(std::string("malformed result line: ") + e.what());
  }
  ResultRecord record;
  record.config_hash = in.value("config_hash", "");
  record.seed = in.value("seed", std::uint64_t{0});
  record.instance = in.value("instance", "");
  if (in.contains("overrides"))
    for (const auto& [key, value] : in["overrides"].items())
      record.overrides.emplace_back(key, value.get<std::string>());
  record.failed = in.value("failed", false);
  record.error = in.value("error", "");
  if (in.contains("metrics")) record.metrics = metrics_from_json(in["metrics"]);
  if (in.contains("updates"))
    for (const auto& update : in["updates"]) record.updates.push_back(update_from_json(update));
  record.window_size = in.value("window_size", std::size_t{0});
  if (in.contains("window_means_ae"))
    record.window_means_ae = in["window_means_ae"].get<std::vector<double>>();
  if (in.contains("window_means_pred"))
    record.window_means_pred = in["window_means_pred"].get<std::vector<double>>();
  record.duration_seconds = in.value("duration_seconds", 0.0);
  return record;
}

std::vector<ResultRecord> load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ReportError("cannot open results file '" + path + "'");
  std::vector<ResultRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(from_json_line(line));
  }
  if (records.empty()) throw ReportError("results file '" + path + "' holds no records");
  return records;
}

std::vector<double> window_means(const std::vector<double>& per_sample_errors,
                                 std::size_t window_size) {
  std::vector<double> means;
  if (window_size == 0) return means;
  for (std::size_t start = 0; start + window_size <= per_sample_errors.size();
       start += window_size) {
    double total = 0.0;
    for (std::size_t i = start; i < start + window_size; ++i) total += per_sample_errors[i];
    means.push_back(total / static_cast<double>(window_size));
  }
  return means;
}

}  // namespace contreg::results
