#pragma once

#include "pdbench/core/linalg.hpp"
#include "pdbench/core/rng.hpp"
#include "pdbench/data/design.hpp"
#include "pdbench/data/frame.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using pdbench::Matrix;
using pdbench::Vector;

inline Matrix gaussian_matrix(int rows, int cols, pdbench::Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Matrix::NullaryExpr(rows, cols, [&]() { return n(rng); });
}

inline Vector gaussian_vector(int n, pdbench::Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return Vector::NullaryExpr(n, [&]() { return d(rng); });
}

inline Matrix uniform_matrix(int rows, int cols, pdbench::Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return Matrix::NullaryExpr(rows, cols, [&]() { return u(rng); });
}

/// 10 * sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5.
inline double friedman(const Matrix& x, Eigen::Index i) {
  return 10.0 * std::sin(M_PI * x(i, 0) * x(i, 1)) + 20.0 * std::pow(x(i, 2) - 0.5, 2) + 10.0 * x(i, 3) +
         5.0 * x(i, 4);
}

/// Random quarterly frame with the default variable set and PD in (0, 100).
inline pdbench::data::TimeSeriesFrame random_frame(std::size_t rows, std::uint64_t seed) {
  pdbench::Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<pdbench::data::Period> index;
  pdbench::data::Period p(2002, 2);
  for (std::size_t i = 0; i < rows; ++i, p = p.next()) index.push_back(p);
  std::vector<pdbench::data::Column> cols;
  for (const auto& name : pdbench::data::default_variables()) {
    pdbench::data::Column c;
    c.name = name;
    double level = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      level = 0.7 * level + n(rng);
      c.values.push_back(name == "PD" ? 3.0 + std::tanh(level) : level);
    }
    cols.push_back(std::move(c));
  }
  return {std::move(index), std::move(cols)};
}

/// Lag-0 design with y = x0 - 0.5 x1 + noise and levels anchored at -3.
inline pdbench::data::DesignMatrix linear_design(int rows, int cols, std::uint64_t seed, double noise = 0.1) {
  pdbench::Rng rng(seed);
  pdbench::data::DesignMatrix d;
  d.x = gaussian_matrix(rows, cols, rng);
  const Vector e = gaussian_vector(rows, rng);
  d.y = d.x.col(0) - 0.5 * d.x.col(std::min(1, cols - 1)) + noise * e;
  d.level.resize(rows);
  double level = -3.0;
  for (int i = 0; i < rows; ++i) d.level(i) = level += d.y(i);
  for (int j = 0; j < cols; ++j) {
    d.base_names.push_back("x" + std::to_string(j));
    d.column_names.push_back("x" + std::to_string(j) + "_l0");
  }
  pdbench::data::Period p(2002, 2);
  for (int i = 0; i < rows; ++i, p = p.next()) d.origin.push_back(p);
  d.diff_order = 1;
  return d;
}

}  // namespace fixtures
