#include "pdbench/data/frame.hpp"

#include "pdbench/core/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace pdbench::data {

Period::Period(int year, int quarter) {
  if (quarter < 1 || quarter > 4) throw DataError("quarter must be in 1..4");
  ordinal_ = year * 4 + (quarter - 1);
}

Period Period::parse(std::string_view label) {
  // YYYYQn
  if (label.size() != 6 || (label[4] != 'Q' && label[4] != 'q')) {
    throw DataError("malformed period label '" + std::string(label) + "' (expected YYYYQn)");
  }
  int year = 0;
  auto [ptr, ec] = std::from_chars(label.data(), label.data() + 4, year);
  if (ec != std::errc() || ptr != label.data() + 4) {
    throw DataError("malformed period year in '" + std::string(label) + "'");
  }
  const int quarter = label[5] - '0';
  if (quarter < 1 || quarter > 4) {
    throw DataError("malformed period quarter in '" + std::string(label) + "'");
  }
  return {year, quarter};
}

std::string Period::label() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04dQ%d", year(), quarter());
  return buf;
}

Period Period::next() const {
  Period p;
  p.ordinal_ = ordinal_ + 1;
  return p;
}

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Logit: return "logit";
    case TransformKind::SeasonalAdjust: return "seasonal_adjust";
    case TransformKind::Difference: return "difference";
  }
  return "unknown";
}

TimeSeriesFrame::TimeSeriesFrame(std::vector<Period> index, std::vector<Column> columns)
    : index_(std::move(index)), columns_(std::move(columns)) {
  for (std::size_t i = 1; i < index_.size(); ++i) {
    if (index_[i] != index_[i - 1].next()) {
      throw DataError("period index not contiguous at " + index_[i].label());
    }
  }
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.values.size() != index_.size()) {
      throw DataError("column '" + c.name + "' has " + std::to_string(c.values.size()) +
                      " values, index has " + std::to_string(index_.size()));
    }
    if (!seen.insert(c.name).second) throw DataError("duplicate column '" + c.name + "'");
  }
}

bool TimeSeriesFrame::has_column(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

const Column& TimeSeriesFrame::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  throw DataError("no column named '" + std::string(name) + "'");
}

std::vector<std::string> TimeSeriesFrame::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c.name);
  return names;
}

const std::vector<std::string>& default_variables() {
  static const std::vector<std::string> vars = {"PD",  "GDP", "UNE", "INF", "RRE",
                                                "EQP", "EXR", "STR", "LTR"};
  return vars;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

TimeSeriesFrame parse_csv(std::string_view text, const CsvOptions& options) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    auto line = trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (!line.empty() && line.front() != '#') lines.push_back(line);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (lines.empty()) throw DataError("CSV input is empty");

  const auto header = split(lines.front());
  if (header.empty() || header.front() != "period") {
    throw DataError("CSV header must start with 'period'");
  }
  std::vector<std::string> names(header.begin() + 1, header.end());
  for (const auto& v : options.variables) {
    if (std::find(names.begin(), names.end(), v) == names.end()) {
      throw DataError("missing column '" + v + "'");
    }
  }
  for (const auto& n : names) {
    if (std::find(options.variables.begin(), options.variables.end(), n) == options.variables.end()) {
      throw DataError("unexpected column '" + n + "'");
    }
  }

  struct Row {
    Period period;
    std::vector<double> values;
    std::size_t line;
  };
  std::vector<Row> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(lines[li]);
    const std::string where = "row " + std::to_string(li);
    if (cells.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    Row row{Period::parse(cells[0]), {}, li};
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      const auto cell = cells[c];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw DataError(where + ", column '" + names[c - 1] + "': non-numeric cell '" +
                        std::string(cell) + "'");
      }
      if (names[c - 1] == options.probability_column && !(v > 0.0 && v < 100.0)) {
        throw DataError(where + ", column '" + names[c - 1] + "': value " + std::string(cell) +
                        " outside (0, 100)");
      }
      row.values.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.period < b.period; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].period == rows[i - 1].period) {
      throw DataError("row " + std::to_string(rows[i].line) + ": duplicated period " +
                      rows[i].period.label());
    }
    if (rows[i].period != rows[i - 1].period.next()) {
      throw DataError("row " + std::to_string(rows[i].line) + ": gap before period " +
                      rows[i].period.label());
    }
  }

  std::vector<Period> index;
  std::vector<Column> columns(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) columns[c].name = names[c];
  for (const auto& r : rows) {
    index.push_back(r.period);
    for (std::size_t c = 0; c < names.size(); ++c) columns[c].values.push_back(r.values[c]);
  }
  return TimeSeriesFrame(std::move(index), std::move(columns));
}

TimeSeriesFrame ingest_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), options);
}

std::string to_csv(const TimeSeriesFrame& frame) {
  std::string out = "period";
  for (const auto& c : frame.columns()) out += "," + c.name;
  out += "\n";
  char buf[64];
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    out += frame.index()[r].label();
    for (const auto& c : frame.columns()) {
      std::snprintf(buf, sizeof buf, ",%.17g", c.values[r]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace pdbench::data
