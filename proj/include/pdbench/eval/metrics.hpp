#pragma once

#include <span>

namespace pdbench::eval {

/// Mean absolute error; DomainError on length mismatch or empty input.
double mae(std::span<const double> actual, std::span<const double> forecast);
double rmse(std::span<const double> actual, std::span<const double> forecast);

/// Mean absolute percentage error in percent; NaN when any actual is zero.
double mape(std::span<const double> actual, std::span<const double> forecast);

/// MAE scaled by `naive_scale`, the in-sample mean absolute one-step change;
/// NaN when the scale is not positive.
double mase(std::span<const double> actual, std::span<const double> forecast, double naive_scale);

}  // namespace pdbench::eval
