#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contreg {

/// Input dimensions do not match what a network or model expects.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A loss became non-finite; carries the index of the offending batch entry.
struct NumericError : std::runtime_error {
  std::size_t batch_index;
  NumericError(const std::string& what, std::size_t index)
      : std::runtime_error(what), batch_index(index) {}
};

/// Bad or inconsistent configuration (maps to CLI exit code 1).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A data file row could not be parsed; carries the 1-based line number.
struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(const std::string& what, std::size_t line_number)
      : std::runtime_error(what), line(line_number) {}
};

/// A data file does not match the declared column schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A feature column cannot be min-max normalized; carries the column name.
struct NormalizationError : std::runtime_error {
  std::string column;
  NormalizationError(const std::string& what, std::string column_name)
      : std::runtime_error(what), column(std::move(column_name)) {}
};

/// perform_update was called while the novelty buffer is not yet full.
struct PrematureUpdateError : std::logic_error {
  using std::logic_error::logic_error;
};

/// The EWC penalty was requested before any consolidation happened.
struct NotConsolidatedError : std::logic_error {
  using std::logic_error::logic_error;
};

/// A report was requested over an empty or unreadable results file.
struct ReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace contreg
