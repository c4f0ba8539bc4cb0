#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pdbench::data {

/// A calendar quarter, e.g. 2002Q2.
class Period {
 public:
  Period() = default;
  Period(int year, int quarter);

  /// Parses `YYYYQn`; throws DataError on malformed labels.
  static Period parse(std::string_view label);

  int year() const { return ordinal_ / 4; }
  int quarter() const { return ordinal_ % 4 + 1; }
  int ordinal() const { return ordinal_; }
  std::string label() const;
  Period next() const;

  auto operator<=>(const Period&) const = default;

 private:
  int ordinal_ = 0;
};

enum class TransformKind { Logit, SeasonalAdjust, Difference };

struct TransformStep {
  TransformKind kind;
  int param = 0;  // seasonal period or differencing order

  bool operator==(const TransformStep&) const = default;
};

std::string to_string(TransformKind kind);

struct Column {
  std::string name;
  std::vector<double> values;
  std::vector<TransformStep> transform_log;
};

/// Aligned quarterly series. Invariants: every column has the index length,
/// the index is strictly increasing without gaps.
class TimeSeriesFrame {
 public:
  TimeSeriesFrame() = default;
  TimeSeriesFrame(std::vector<Period> index, std::vector<Column> columns);

  const std::vector<Period>& index() const { return index_; }
  const std::vector<Column>& columns() const { return columns_; }
  std::size_t rows() const { return index_.size(); }

  bool has_column(std::string_view name) const;
  const Column& column(std::string_view name) const;
  std::span<const double> values(std::string_view name) const { return column(name).values; }
  std::vector<std::string> column_names() const;

 private:
  std::vector<Period> index_;
  std::vector<Column> columns_;
};

/// Default variable set: the target followed by eight macro covariates.
const std::vector<std::string>& default_variables();

struct CsvOptions {
  std::vector<std::string> variables = default_variables();
  /// Column that must lie in the open interval (0, 100).
  std::string probability_column = "PD";
};

TimeSeriesFrame ingest_csv(const std::filesystem::path& path, const CsvOptions& options = {});
TimeSeriesFrame parse_csv(std::string_view text, const CsvOptions& options = {});

/// Writes `period,<columns...>` with round-trip precision.
std::string to_csv(const TimeSeriesFrame& frame);

}  // namespace pdbench::data
