#pragma once

#include "fixtures.hpp"

#include "pdbench/combine/weights.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <vector>

namespace oracles {

using pdbench::Index;
using pdbench::Matrix;
using pdbench::Rng;
using pdbench::Vector;
using pdbench::combine::cls_objective;

inline Matrix random_psd(int m, Rng& rng, int rank = -1) {
  const Matrix a = fixtures::gaussian_matrix(m, rank < 0 ? m + 3 : rank, rng);
  return a * a.transpose() / static_cast<double>(a.cols());
}

/// Minimizer of w' S w subject to 1'w = 1 from the full KKT system.
inline Vector ng_oracle(const Matrix& s) {
  const Index m = s.rows();
  Matrix k = Matrix::Zero(m + 1, m + 1);
  k.topLeftCorner(m, m) = 2.0 * s;
  k.topRightCorner(m, 1).setOnes();
  k.bottomLeftCorner(1, m).setOnes();
  Vector rhs = Vector::Zero(m + 1);
  rhs(m) = 1.0;
  return k.fullPivLu().solve(rhs).head(m);
}

/// Exact simplex least squares by enumerating supports.
inline double cls_oracle(const Matrix& f, const Vector& a, Vector* best_w = nullptr) {
  const Index m = f.cols();
  const Matrix h = f.transpose() * f;
  const Vector b = f.transpose() * a;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<Index> s;
    for (Index i = 0; i < m; ++i) {
      if (mask & (1u << i)) s.push_back(i);
    }
    const auto k = static_cast<Index>(s.size());
    Matrix kkt = Matrix::Zero(k + 1, k + 1);
    Vector rhs = Vector::Zero(k + 1);
    for (Index r = 0; r < k; ++r) {
      for (Index c = 0; c < k; ++c) kkt(r, c) = 2.0 * h(s[r], s[c]);
      kkt(r, k) = kkt(k, r) = 1.0;
      rhs(r) = 2.0 * b(s[r]);
    }
    rhs(k) = 1.0;
    const Vector sol = kkt.fullPivLu().solve(rhs);
    Vector w = Vector::Zero(m);
    for (Index r = 0; r < k; ++r) w(s[r]) = sol(r);
    if (w.minCoeff() < -1e-12 || std::abs(w.sum() - 1.0) > 1e-9) continue;
    const double obj = cls_objective(f, a, w);
    if (obj < best) {
      best = obj;
      if (best_w) *best_w = w;
    }
  }
  return best;
}

/// Minimum objective over a regular simplex grid.
inline double cls_grid(const Matrix& f, const Vector& a, int steps) {
  const Index m = f.cols();
  double best = std::numeric_limits<double>::infinity();
  Vector w(m);
  if (m == 1) return cls_objective(f, a, Vector::Ones(1));
  for (int i = 0; i <= steps; ++i) {
    if (m == 2) {
      w << i / double(steps), 1 - i / double(steps);
      best = std::min(best, cls_objective(f, a, w));
      continue;
    }
    for (int j = 0; j <= steps - i; ++j) {
      w << i / double(steps), j / double(steps), (steps - i - j) / double(steps);
      best = std::min(best, cls_objective(f, a, w));
    }
  }
  return best;
}

/// Smallest eigenvector of a PSD matrix from the SVD, normalized to sum one.
/// False when the eigenvector is (nearly) orthogonal to the ones vector.
inline bool sea_oracle(const Matrix& s, Vector& w) {
  Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeFullU);
  w = svd.matrixU().col(s.rows() - 1);
  if (std::abs(w.sum()) < 1e-3) return false;
  w /= w.sum();
  return true;
}

}  // namespace oracles
