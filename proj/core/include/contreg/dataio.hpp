#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "contreg/nn.hpp"

namespace contreg::dataio {

/// One time step: a feature vector plus an optional scalar target
/// (normalized power). time_index counts hours from the file start.
struct Sample {
  nn::Vector features;
  std::optional<double> target;
  std::size_t time_index = 0;
};

/// Per-column min/max captured when a dataset is normalized. Carried along
/// so phase slices share the scaling of the full dataset.
struct NormalizationBounds {
  nn::Vector feature_min;
  nn::Vector feature_max;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> comments;  // '#'-prefixed header lines, prefix stripped
  std::optional<NormalizationBounds> bounds;  // set once preprocess has run

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t feature_dim() const { return samples.empty() ? 0 : samples.front().features.size(); }
  bool has_targets() const { return !samples.empty() && samples.front().target.has_value(); }
};

/// Reads the CSV schema `time,f1,...,fN,power` (comma-separated, `.`
/// decimal). `time` and `power` are optional columns; `#` lines are kept as
/// comments. When `time` is absent a 0-based hour index is synthesized.
/// Throws SchemaError on a bad header or column count, ParseError (with the
/// 1-based line number) on a malformed value.
Dataset load_csv(const std::string& path);

/// Writes the same schema at 17 significant digits, comments first, so a
/// load_csv round trip reproduces every value bit-exactly.
void write_csv(const Dataset& dataset, const std::string& path);

struct PreprocessOptions {
  // Maximal runs of zero power strictly longer than this are removed.
  std::size_t max_zero_run = 24;
  // When set, targets are divided by it before the zero-run scan.
  std::optional<double> rated_capacity;
};

/// Cleans a supervised dataset: drops over-long zero-power runs, then
/// min-max normalizes every feature column to [0,1], recording the bounds.
/// A dataset that already carries bounds is returned unchanged, which makes
/// the operation idempotent. Throws NormalizationError (naming the column)
/// when a feature column is constant, std::invalid_argument when targets
/// are missing.
Dataset preprocess(const Dataset& raw, const PreprocessOptions& options = {});

struct PhaseSizes {
  std::size_t warm_up = 1000;
  std::size_t update = 10000;
  std::size_t evaluation = 1000;

  std::size_t total() const { return warm_up + update + evaluation; }
};

/// Contiguous, order-preserving slices of one dataset.
struct PhaseSplit {
  Dataset warm_up;
  Dataset update;
  Dataset evaluation;
  std::size_t discarded = 0;  // trailing samples beyond the three phases
};

/// Slices the first warm_up/update/evaluation samples off the front, in
/// order; surplus rows are discarded (count reported in the result).
/// Throws ConfigError when the dataset is shorter than the phases need.
PhaseSplit split_phases(const Dataset& dataset, const PhaseSizes& sizes);

}  // namespace contreg::dataio
