#include "pdbench/eval/metrics.hpp"

#include "pdbench/core/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pdbench::eval {

namespace {

void check(std::span<const double> a, std::span<const double> f) {
  if (a.size() != f.size()) {
    throw DomainError("metric: actual has " + std::to_string(a.size()) + " values, forecast " +
                      std::to_string(f.size()));
  }
  if (a.empty()) throw DomainError("metric: empty paths");
}

}  // namespace

double mae(std::span<const double> a, std::span<const double> f) {
  check(a, f);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - f[i]);
  return s / static_cast<double>(a.size());
}

double rmse(std::span<const double> a, std::span<const double> f) {
  check(a, f);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - f[i]) * (a[i] - f[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

double mape(std::span<const double> a, std::span<const double> f) {
  check(a, f);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) return std::numeric_limits<double>::quiet_NaN();
    s += std::abs((a[i] - f[i]) / a[i]);
  }
  return 100.0 * s / static_cast<double>(a.size());
}

double mase(std::span<const double> a, std::span<const double> f, double naive_scale) {
  if (!(naive_scale > 0.0)) {
    check(a, f);
    return std::numeric_limits<double>::quiet_NaN();
  }
  return mae(a, f) / naive_scale;
}

}  // namespace pdbench::eval
