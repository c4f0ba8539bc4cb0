#include "pdbench/data/design.hpp"

#include "pdbench/core/error.hpp"

#include <algorithm>

namespace pdbench::data {

DesignMatrix DesignMatrix::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw DataError("design slice out of range");
  DesignMatrix out;
  const auto b = static_cast<Eigen::Index>(begin);
  const auto n = static_cast<Eigen::Index>(end - begin);
  out.x = x.middleRows(b, n);
  out.y = y.segment(b, n);
  out.level = level.segment(b, n);
  out.column_names = column_names;
  out.base_names = base_names;
  out.origin.assign(origin.begin() + b, origin.begin() + b + n);
  out.lags = lags;
  out.diff_order = diff_order;
  return out;
}

DesignMatrix build_design(const TimeSeriesFrame& frame, const std::string& target, int lags,
                          const TimeSeriesFrame* levels) {
  if (lags < 0) throw DomainError("build_design: negative lag order");
  if (!frame.has_column(target)) throw DataError("build_design: no target column '" + target + "'");
  const std::size_t t_len = frame.rows();
  if (static_cast<std::size_t>(lags) >= t_len) {
    throw DomainError("build_design: lag order " + std::to_string(lags) +
                      " not below usable length " + std::to_string(t_len));
  }

  const auto& tcol = frame.column(target);
  int diff_order = 0;
  for (const auto& s : tcol.transform_log) {
    if (s.kind == TransformKind::Difference) diff_order += s.param;
  }
  if (diff_order > 1) throw DomainError("build_design: target differenced more than once");

  DesignMatrix d;
  d.lags = lags;
  d.diff_order = diff_order;
  for (const auto& c : frame.columns()) {
    if (c.name != target) d.base_names.push_back(c.name);
  }
  const std::size_t nb = d.base_names.size();
  const std::size_t rows = t_len - static_cast<std::size_t>(lags);
  d.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(nb * (lags + 1)));
  d.y.resize(static_cast<Eigen::Index>(rows));
  d.level.resize(static_cast<Eigen::Index>(rows));

  for (int p = 0; p <= lags; ++p) {
    for (std::size_t j = 0; j < nb; ++j) {
      d.column_names.push_back(d.base_names[j] + "_l" + std::to_string(p));
      const auto& v = frame.column(d.base_names[j]).values;
      const auto col = static_cast<Eigen::Index>(d.column_index(j, p));
      for (std::size_t r = 0; r < rows; ++r) {
        d.x(static_cast<Eigen::Index>(r), col) = v[r + static_cast<std::size_t>(lags - p)];
      }
    }
  }

  const TimeSeriesFrame* level_frame = nullptr;
  if (diff_order > 0) {
    if (levels == nullptr) throw DataError("build_design: differenced target needs its level series");
    level_frame = levels;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + static_cast<std::size_t>(lags);
    d.y(static_cast<Eigen::Index>(r)) = tcol.values[t];
    d.origin.push_back(frame.index()[t]);
  }
  if (level_frame != nullptr) {
    const auto& lv = level_frame->column(target).values;
    const auto& lidx = level_frame->index();
    for (std::size_t r = 0; r < rows; ++r) {
      auto it = std::lower_bound(lidx.begin(), lidx.end(), d.origin[r]);
      if (it == lidx.end() || *it != d.origin[r]) {
        throw DataError("build_design: level series misses period " + d.origin[r].label());
      }
      d.level(static_cast<Eigen::Index>(r)) = lv[static_cast<std::size_t>(it - lidx.begin())];
    }
  } else {
    d.level = d.y;
  }
  return d;
}

}  // namespace pdbench::data
