#include "pdbench/combine/weights.hpp"

#include "pdbench/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdbench::combine {

namespace {

/// Groups of indices whose vectors (columns of `v`) agree to rounding.
std::vector<std::vector<Index>> duplicate_groups(const Matrix& v) {
  const double tol = 1e-12 * std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<std::vector<Index>> groups;
  for (Index j = 0; j < v.cols(); ++j) {
    bool placed = false;
    for (auto& g : groups) {
      if ((v.col(j) - v.col(g.front())).cwiseAbs().maxCoeff() <= tol) {
        g.push_back(j);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({j});
  }
  return groups;
}

std::vector<Index> representatives(const std::vector<std::vector<Index>>& groups) {
  std::vector<Index> out;
  for (const auto& g : groups) out.push_back(g.front());
  return out;
}

Matrix select(const Matrix& s, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = s(idx[i], idx[j]);
  }
  return out;
}

/// Spreads each group's weight equally over its members.
Vector expand(const Vector& reduced, const std::vector<std::vector<Index>>& groups, Index m) {
  Vector w(m);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto i : groups[g]) w(i) = reduced(static_cast<Index>(g)) / static_cast<double>(groups[g].size());
  }
  return w;
}

}  // namespace

MspeMatrix estimate_mspe(const Matrix& e, std::vector<std::string> members) {
  if (e.rows() == 0) throw DomainError("estimate_mspe: no past errors");
  if (e.cols() == 0) throw DomainError("estimate_mspe: no members");
  MspeMatrix out;
  out.members = std::move(members);
  out.observations = static_cast<std::size_t>(e.rows());
  out.sigma = (e.transpose() * e) / static_cast<double>(e.rows());
  out.sigma = (0.5 * (out.sigma + out.sigma.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.sigma);
  if (es.eigenvalues().minCoeff() < 0.0) {
    const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    // rounding-level negatives are expected for rank-deficient products
    if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
      const Vector clipped = es.eigenvalues().cwiseMax(0.0);
      out.sigma = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
      out.sigma = (0.5 * (out.sigma + out.sigma.transpose())).eval();
      out.clipped = true;
    }
  }
  return out;
}

std::vector<double> combine_avg(const std::vector<std::vector<double>>& f) {
  if (f.empty()) throw DomainError("combine_avg: no members");
  return combine_weighted(f, Vector::Constant(static_cast<Index>(f.size()), 1.0 / static_cast<double>(f.size())));
}

std::vector<double> combine_weighted(const std::vector<std::vector<double>>& f, const Vector& w) {
  if (f.empty()) throw DomainError("combine: no members");
  if (static_cast<std::size_t>(w.size()) != f.size()) throw DomainError("combine: weight count mismatch");
  const std::size_t h = f.front().size();
  std::vector<double> out(h, 0.0);
  for (std::size_t m = 0; m < f.size(); ++m) {
    if (f[m].size() != h) throw DomainError("combine: member paths differ in length");
    for (std::size_t i = 0; i < h; ++i) out[i] += w(static_cast<Index>(m)) * f[m][i];
  }
  return out;
}

NgResult combine_ng(const Matrix& sigma) {
  const Index m = sigma.rows();
  if (m == 0 || sigma.cols() != m) throw DomainError("combine_ng: sigma must be square and nonempty");
  NgResult out;
  const auto groups = duplicate_groups(sigma);
  if (groups.size() < static_cast<std::size_t>(m)) {
    out = combine_ng(select(sigma, representatives(groups)));
    out.weights = expand(out.weights, groups, m);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  Matrix s = sigma;
  if (!(out.condition <= 1e12)) {
    const double lambda = 1e-8 * sigma.trace() / static_cast<double>(m);
    if (!(lambda > 0.0)) throw DomainError("combine_ng: singular MSPE matrix");
    s.diagonal().array() += lambda;
    out.regularized = true;
  }
  Eigen::LDLT<Matrix> ldlt(s);
  if (ldlt.info() != Eigen::Success) throw DomainError("combine_ng: MSPE matrix not invertible");
  const Vector z = ldlt.solve(Vector::Ones(m));
  const double denom = z.sum();
  if (!std::isfinite(denom) || std::abs(denom) < 1e-300) throw DomainError("combine_ng: degenerate normalization");
  out.weights = z / denom;
  if (!out.weights.allFinite()) throw DomainError("combine_ng: non-finite weights");
  return out;
}

double cls_objective(const Matrix& f, const Vector& a, const Vector& w) {
  return (a - f * w).squaredNorm() / static_cast<double>(f.rows());
}

ClsResult combine_cls(const Matrix& f, const Vector& a) {
  const Index n = f.rows(), m = f.cols();
  if (m == 0) throw DomainError("combine_cls: no members");
  if (a.size() != n) throw DomainError("combine_cls: actual length mismatch");
  if (n < m) throw DomainError("combine_cls: fewer observations than members");
  ClsResult out;
  const auto groups = duplicate_groups(f);
  if (groups.size() < static_cast<std::size_t>(m)) {
    const auto rep = representatives(groups);
    Matrix fr(n, static_cast<Index>(rep.size()));
    for (std::size_t j = 0; j < rep.size(); ++j) fr.col(static_cast<Index>(j)) = f.col(rep[j]);
    out = combine_cls(fr, a);
    out.weights = expand(out.weights, groups, m);
    out.objective = cls_objective(f, a, out.weights);
    return out;
  }
  if (m == 1) {
    out.weights = Vector::Ones(1);
    out.objective = cls_objective(f, a, out.weights);
    return out;
  }
  // 1/2 w'Qw - c'w with Q = 2(H + eps I), c = 2(F'a/n + eps/M 1)
  const Matrix h = f.transpose() * f / static_cast<double>(n);
  const Vector b = f.transpose() * a / static_cast<double>(n);
  const double eps = 1e-12 * std::max(h.trace() / static_cast<double>(m), 1e-300);
  const Matrix q = 2.0 * (h + eps * Matrix::Identity(m, m));
  const Vector c = 2.0 * (b.array() + eps / static_cast<double>(m)).matrix();

  Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  std::vector<bool> at_bound(static_cast<std::size_t>(m), false);
  const double tol = 1e-14 * std::max(1.0, q.cwiseAbs().maxCoeff());
  const int max_iter = 50 * static_cast<int>(m) + 100;
  double mu = 0.0;
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    const Vector g = q * w - c;
    std::vector<Index> free;
    for (Index i = 0; i < m; ++i) {
      if (!at_bound[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    const auto k = static_cast<Index>(free.size());
    Matrix kkt = Matrix::Zero(k + 1, k + 1);
    Vector rhs = Vector::Zero(k + 1);
    for (Index r = 0; r < k; ++r) {
      for (Index s = 0; s < k; ++s) kkt(r, s) = q(free[static_cast<std::size_t>(r)], free[static_cast<std::size_t>(s)]);
      kkt(r, k) = 1.0;
      kkt(k, r) = 1.0;
      rhs(r) = -g(free[static_cast<std::size_t>(r)]);
    }
    const Vector sol = kkt.fullPivLu().solve(rhs);
    Vector p = Vector::Zero(m);
    for (Index r = 0; r < k; ++r) p(free[static_cast<std::size_t>(r)]) = sol(r);
    if (p.cwiseAbs().maxCoeff() <= 1e-15) {
      // stationary on the working face: check bound multipliers g_i - mu
      mu = 0.0;
      for (auto i : free) mu += g(i);
      mu /= static_cast<double>(k);
      Index leave = -1;
      double most_negative = -tol;
      for (Index i = 0; i < m; ++i) {
        if (!at_bound[static_cast<std::size_t>(i)]) continue;
        const double lambda = g(i) - mu;
        if (lambda < most_negative) most_negative = lambda, leave = i;
      }
      if (leave < 0) break;
      at_bound[static_cast<std::size_t>(leave)] = false;
      continue;
    }
    double alpha = 1.0;
    Index blocking = -1;
    for (auto i : free) {
      if (p(i) < 0.0) {
        const double step = -w(i) / p(i);
        if (step < alpha) alpha = step, blocking = i;
      }
    }
    w += alpha * p;
    if (blocking >= 0) {
      w(blocking) = 0.0;
      at_bound[static_cast<std::size_t>(blocking)] = true;
    }
  }
  w = w.cwiseMax(0.0);
  w /= w.sum();
  out.weights = w;
  out.objective = cls_objective(f, a, w);

  // KKT residual of the (proximal) program at the returned point
  const Vector g = q * w - c;
  double mu_hat = 0.0;
  int n_pos = 0;
  for (Index i = 0; i < m; ++i) {
    if (w(i) > 0.0) mu_hat += g(i), ++n_pos;
  }
  mu_hat /= std::max(n_pos, 1);
  double res = std::abs(w.sum() - 1.0);
  for (Index i = 0; i < m; ++i) {
    const double lambda = g(i) - mu_hat;
    if (w(i) > 0.0) {
      res = std::max(res, std::abs(lambda) * std::min(1.0, w(i) / 1e-12));
    }
    res = std::max(res, std::max(0.0, -lambda));
    res = std::max(res, std::max(0.0, -w(i)));
  }
  out.kkt_residual = res;
  return out;
}

Vector combine_sea(const Matrix& sigma) {
  const Index m = sigma.rows();
  if (m == 0 || sigma.cols() != m) throw DomainError("combine_sea: sigma must be square and nonempty");
  if (m == 1) return Vector::Ones(1);
  const auto groups = duplicate_groups(sigma);
  if (groups.size() < static_cast<std::size_t>(m)) {
    return expand(combine_sea(select(sigma, representatives(groups))), groups, m);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()));
  const Vector& ev = es.eigenvalues();  // ascending
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Index dim = 1;
  while (dim < m && ev(dim) - ev(0) <= 1e-10 * scale) ++dim;
  const Matrix basis = es.eigenvectors().leftCols(dim);
  const Vector proj = basis * (basis.transpose() * Vector::Ones(m));
  // 1'u for the unit vector u along proj equals |proj|
  if (proj.norm() < 1e-8) throw DomainError("combine_sea: eigenvector components sum to zero");
  return proj / proj.sum();
}

}  // namespace pdbench::combine
