#include "contreg/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "contreg/errors.hpp"

namespace contreg::dataio {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_comma(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, std::size_t line_number) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size())
      throw ParseError("trailing characters in number '" + text + "'", line_number);
    return value;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("cannot parse number '" + text + "'", line_number);
  }
}

struct HeaderLayout {
  bool has_time = false;
  bool has_power = false;
  std::size_t feature_count = 0;
};

HeaderLayout parse_header(const std::vector<std::string>& fields) {
  HeaderLayout layout;
  std::size_t i = 0;
  if (i < fields.size() && fields[i] == "time") {
    layout.has_time = true;
    ++i;
  }
  while (i < fields.size() && fields[i] == "f" + std::to_string(layout.feature_count + 1)) {
    ++layout.feature_count;
    ++i;
  }
  if (i < fields.size() && fields[i] == "power") {
    layout.has_power = true;
    ++i;
  }
  if (i != fields.size() || layout.feature_count == 0)
    throw SchemaError("header must be time?,f1..fN,power? — got unexpected column " +
                      (i < fields.size() ? "'" + fields[i] + "'" : "layout"));
  return layout;
}

std::string format_full(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");

  Dataset dataset;
  std::string line;
  std::size_t line_number = 0;
  std::optional<HeaderLayout> layout;
  std::size_t synthesized_time = 0;

  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '#') {
      dataset.comments.push_back(trim(stripped.substr(1)));
      continue;
    }

    const std::vector<std::string> fields = split_comma(stripped);
    if (!layout) {
      layout = parse_header(fields);
      continue;
    }

    const std::size_t expected =
        (layout->has_time ? 1 : 0) + layout->feature_count + (layout->has_power ? 1 : 0);
    if (fields.size() != expected)
      throw SchemaError("row " + std::to_string(line_number) + " has " +
                        std::to_string(fields.size()) + " columns, expected " +
                        std::to_string(expected));

    Sample sample;
    std::size_t i = 0;
    if (layout->has_time) {
      const double t = parse_double(fields[i++], line_number);
      if (t < 0 || t != std::floor(t))
        throw ParseError("time index must be a nonnegative integer", line_number);
      sample.time_index = static_cast<std::size_t>(t);
    } else {
      sample.time_index = synthesized_time;
    }
    sample.features.reserve(layout->feature_count);
    for (std::size_t f = 0; f < layout->feature_count; ++f) {
      const double value = parse_double(fields[i++], line_number);
      if (!std::isfinite(value))
        throw ParseError("non-finite feature value", line_number);
      sample.features.push_back(value);
    }
    if (layout->has_power) sample.target = parse_double(fields[i++], line_number);

    dataset.samples.push_back(std::move(sample));
    ++synthesized_time;
  }

  if (!layout) throw SchemaError("'" + path + "' has no header row");
  return dataset;
}

void write_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");

  for (const auto& comment : dataset.comments) out << "# " << comment << '\n';

  const std::size_t dims = dataset.feature_dim();
  const bool targets = dataset.has_targets();
  out << "time";
  for (std::size_t f = 1; f <= dims; ++f) out << ",f" << f;
  if (targets) out << ",power";
  out << '\n';

  for (const auto& sample : dataset.samples) {
    out << sample.time_index;
    for (const double v : sample.features) out << ',' << format_full(v);
    if (targets) out << ',' << format_full(sample.target.value());
    out << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Dataset preprocess(const Dataset& raw, const PreprocessOptions& options) {
  if (raw.bounds) return raw;  // bounds mark an already-preprocessed dataset
  if (!raw.has_targets())
    throw std::invalid_argument("preprocess requires a supervised dataset");

  Dataset out;
  out.comments = raw.comments;

  // Scale targets, then drop maximal zero-power runs strictly longer than
  // the cutoff.
  std::vector<Sample> scaled = raw.samples;
  if (options.rated_capacity) {
    for (auto& sample : scaled) sample.target = sample.target.value() / *options.rated_capacity;
  }
  std::size_t i = 0;
  while (i < scaled.size()) {
    if (scaled[i].target.value() == 0.0) {
      std::size_t j = i;
      while (j < scaled.size() && scaled[j].target.value() == 0.0) ++j;
      if (j - i <= options.max_zero_run)
        for (std::size_t k = i; k < j; ++k) out.samples.push_back(scaled[k]);
      i = j;
    } else {
      out.samples.push_back(scaled[i]);
      ++i;
    }
  }

  if (out.samples.empty())
    throw std::invalid_argument("preprocess removed every sample");

  const std::size_t dims = out.samples.front().features.size();
  NormalizationBounds bounds;
  bounds.feature_min.assign(dims, std::numeric_limits<double>::infinity());
  bounds.feature_max.assign(dims, -std::numeric_limits<double>::infinity());
  for (const auto& sample : out.samples) {
    for (std::size_t f = 0; f < dims; ++f) {
      bounds.feature_min[f] = std::min(bounds.feature_min[f], sample.features[f]);
      bounds.feature_max[f] = std::max(bounds.feature_max[f], sample.features[f]);
    }
  }
  for (std::size_t f = 0; f < dims; ++f) {
    if (bounds.feature_min[f] == bounds.feature_max[f])
      throw NormalizationError("feature column is constant and cannot be min-max scaled",
                               "f" + std::to_string(f + 1));
  }
  for (auto& sample : out.samples) {
    for (std::size_t f = 0; f < dims; ++f) {
      sample.features[f] = (sample.features[f] - bounds.feature_min[f]) /
                           (bounds.feature_max[f] - bounds.feature_min[f]);
    }
  }
  out.bounds = std::move(bounds);
  return out;
}

PhaseSplit split_phases(const Dataset& dataset, const PhaseSizes& sizes) {
  if (dataset.size() < sizes.total())
    throw ConfigError("dataset has " + std::to_string(dataset.size()) +
                      " samples but the phases need " + std::to_string(sizes.total()));

  PhaseSplit split;
  auto slice = [&](std::size_t begin, std::size_t count) {
    Dataset part;
    part.comments = dataset.comments;
    part.bounds = dataset.bounds;
    part.samples.assign(dataset.samples.begin() + begin, dataset.samples.begin() + begin + count);
    return part;
  };
  split.warm_up = slice(0, sizes.warm_up);
  split.update = slice(sizes.warm_up, sizes.update);
  split.evaluation = slice(sizes.warm_up + sizes.update, sizes.evaluation);
  split.discarded = dataset.size() - sizes.total();
  return split;
}

}  // namespace contreg::dataio
