#include "fixtures.hpp"
#include "oracles.hpp"

#include "pdbench/combine/combination.hpp"
#include "pdbench/combine/weights.hpp"
#include "pdbench/core/error.hpp"
#include "pdbench/data/cv_plan.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace pdbench;
using namespace pdbench::combine;
using namespace oracles;

namespace {

Matrix permute(const Matrix& s, const std::vector<Index>& p) {
  Matrix out(s.rows(), s.cols());
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = 0; j < s.cols(); ++j) out(i, j) = s(p[i], p[j]);
  }
  return out;
}

}  // namespace

TEST(Mspe, Examples) {
  Matrix e(2, 1);
  e << 1, -1;
  const auto s = estimate_mspe(e, {"a"});
  EXPECT_DOUBLE_EQ(s.sigma(0, 0), 1.0);
  EXPECT_EQ(s.observations, 2u);
  Matrix twin(5, 2);
  twin.col(0) << 0.3, -1, 2, 0.5, -0.2;
  twin.col(1) = twin.col(0);
  const auto t = estimate_mspe(twin);
  EXPECT_DOUBLE_EQ(t.sigma(0, 1), t.sigma(0, 0));
  EXPECT_DOUBLE_EQ(t.sigma(1, 1), t.sigma(0, 0));
  EXPECT_THROW(estimate_mspe(Matrix(0, 3)), DomainError);
}

TEST(Mspe, BruteForceAndPsd) {
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + rep % 13, m = 1 + rep % 6;
    const Matrix e = fixtures::gaussian_matrix(n, m, rng);
    const auto s = estimate_mspe(e);
    Matrix brute = Matrix::Zero(m, m);
    for (int i = 0; i < n; ++i) brute += e.row(i).transpose() * e.row(i);
    brute /= n;
    EXPECT_LE((s.sigma - brute).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((s.sigma - s.sigma.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(s.sigma).eigenvalues().minCoeff(), -1e-12);
    EXPECT_GE(s.sigma.diagonal().minCoeff(), 0.0);
  }
}

TEST(Avg, Examples) {
  EXPECT_EQ(combine_avg({{1.0}, {2.0}, {3.0}}), std::vector<double>{2.0});
  const std::vector<double> p{0.5, -1.25, 3.0};
  EXPECT_EQ(combine_avg({p, p, p, p}), p);
  EXPECT_THROW(combine_avg({{1.0, 2.0}, {1.0}}), DomainError);
  EXPECT_THROW(combine_avg({}), DomainError);
}

TEST(Ng, Examples) {
  Matrix s = Matrix::Zero(2, 2);
  s.diagonal() << 1, 3;
  const auto r = combine_ng(s);
  EXPECT_NEAR(r.weights(0), 0.75, 1e-14);
  EXPECT_NEAR(r.weights(1), 0.25, 1e-14);
  EXPECT_FALSE(r.regularized);
  const auto id = combine_ng(Matrix::Identity(5, 5));
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(id.weights(i), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(combine_ng(Matrix::Constant(1, 1, 2.0)).weights(0), 1.0);
  EXPECT_THROW(combine_ng(Matrix::Zero(3, 3)), DomainError);
}

TEST(Ng, MatchesKktOracleOnRandomPsd) {
  Rng rng(2024);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 1 + rep % 6;
    const Matrix s = random_psd(m, rng);
    const auto r = combine_ng(s);
    EXPECT_LE((r.weights - ng_oracle(s)).cwiseAbs().maxCoeff(), 1e-8) << rep;
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-10);
  }
}

TEST(Ng, BeatsRandomAffineAndSimplexWeights) {
  Rng rng(77);
  std::normal_distribution<double> n(0, 1);
  std::gamma_distribution<double> g(1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 2 + rep % 5;
    const Matrix s = random_psd(m, rng);
    const Vector w = combine_ng(s).weights;
    const double best = w.dot(s * w);
    for (int k = 0; k < 1000; ++k) {
      Vector v(m);
      for (int i = 0; i < m; ++i) v(i) = k % 2 ? g(rng) : n(rng);
      if (std::abs(v.sum()) < 1e-3) continue;
      v /= v.sum();
      EXPECT_LE(best, v.dot(s * v) + 1e-12);
    }
  }
}

TEST(Ng, DuplicateMembersShareWeightEqually) {
  Matrix e(6, 4);
  e.col(0) << 1, -2, 0.5, 0.1, -0.3, 0.7;
  e.col(1) = e.col(0);
  e.col(2) = e.col(0);
  e.col(3) << 0.2, 0.3, -0.1, 0.4, -0.5, 0.1;
  const auto s = estimate_mspe(e).sigma;
  const auto r = combine_ng(s);
  EXPECT_FALSE(r.regularized);
  EXPECT_DOUBLE_EQ(r.weights(0), r.weights(1));
  EXPECT_DOUBLE_EQ(r.weights(0), r.weights(2));
  const Vector reduced = ng_oracle((Matrix(2, 2) << s(0, 0), s(0, 3), s(3, 0), s(3, 3)).finished());
  EXPECT_NEAR(3.0 * r.weights(0), reduced(0), 1e-10);
  EXPECT_NEAR(r.weights(3), reduced(1), 1e-10);
}

TEST(Ng, RankDeficientIsRegularized) {
  Rng rng(8);
  const Matrix e = fixtures::gaussian_matrix(2, 4, rng);  // rank 2, distinct members
  const auto r = combine_ng(estimate_mspe(e).sigma);
  EXPECT_TRUE(r.regularized);
  EXPECT_NEAR(r.weights.sum(), 1.0, 1e-10);
  EXPECT_TRUE(r.weights.allFinite());
}

TEST(Cls, Examples) {
  Rng rng(3);
  const Vector a = fixtures::gaussian_vector(20, rng);
  Matrix f = fixtures::gaussian_matrix(20, 3, rng);
  f.col(1) = a;
  const auto r = combine_cls(f, a);
  EXPECT_NEAR(r.weights(1), 1.0, 1e-10);
  EXPECT_NEAR(r.objective, 0.0, 1e-12);
  Matrix same(20, 4);
  for (int j = 0; j < 4; ++j) same.col(j) = f.col(0);
  const auto t = combine_cls(same, a);
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(t.weights(i), 0.25, 1e-8);
  EXPECT_DOUBLE_EQ(combine_cls(f.leftCols(1), a).weights(0), 1.0);
  EXPECT_THROW(combine_cls(f.topRows(2), a.head(2)), DomainError);
}

TEST(Cls, KktAndBruteForceForSmallM) {
  Rng rng(99);
  for (int rep = 0; rep < 60; ++rep) {
    const int m = 1 + rep % 3, n = m + 2 + rep % 9;
    const Vector a = fixtures::gaussian_vector(n, rng);
    Matrix f = fixtures::gaussian_matrix(n, m, rng);
    f.col(0) += a;  // some members are informative
    const auto r = combine_cls(f, a);
    EXPECT_LE(r.kkt_residual, 1e-8) << rep;
    EXPECT_GE(r.weights.minCoeff(), -1e-10);
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-10);
    EXPECT_NEAR(r.objective, cls_oracle(f, a), 1e-6) << rep;
    EXPECT_LE(r.objective, cls_grid(f, a, 200) + 1e-12) << rep;
  }
}

TEST(Cls, LargerMAgainstSupportEnumeration) {
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const int m = 4 + rep % 5, n = 2 * m + rep % 7;
    const Vector a = fixtures::gaussian_vector(n, rng);
    const Matrix f = fixtures::gaussian_matrix(n, m, rng).colwise() + 0.5 * a;
    const auto r = combine_cls(f, a);
    EXPECT_LE(r.kkt_residual, 1e-8);
    EXPECT_NEAR(r.objective, cls_oracle(f, a), 1e-9);
  }
}

TEST(Cls, NoWorseThanAverage) {
  Rng rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    const int m = 2 + rep % 6;
    const Vector a = fixtures::gaussian_vector(30, rng);
    const Matrix f = fixtures::gaussian_matrix(30, m, rng);
    const Vector avg = Vector::Constant(m, 1.0 / m);
    EXPECT_LE(combine_cls(f, a).objective, cls_objective(f, a, avg) + 1e-12);
  }
}

TEST(Sea, Examples) {
  Matrix s = Matrix::Zero(2, 2);
  s.diagonal() << 1, 100;
  const Vector w = combine_sea(s);
  EXPECT_NEAR(w(0), 1.0, 1e-12);
  EXPECT_NEAR(w(1), 0.0, 1e-12);
  const Vector id = combine_sea(Matrix::Identity(4, 4));
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(id(i), 0.25, 1e-12);
  EXPECT_DOUBLE_EQ(combine_sea(Matrix::Constant(1, 1, 3.0))(0), 1.0);
  Matrix zero_sum(2, 2);
  zero_sum << 2, 1, 1, 2;  // smallest eigenvector (1, -1)
  EXPECT_THROW(combine_sea(zero_sum), DomainError);
}

TEST(Sea, MatchesSvdOracleAndScaleInvariance) {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 2 + rep % 5;
    const Matrix s = random_psd(m, rng);
    Vector v;
    if (!sea_oracle(s, v)) continue;
    const Vector w = combine_sea(s);
    EXPECT_LE((w - v).cwiseAbs().maxCoeff(), 1e-8) << rep;
    EXPECT_NEAR(w.sum(), 1.0, 1e-10);
    EXPECT_LE((combine_sea(17.5 * s) - w).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(AllMethods, PermutationEquivariance) {
  Rng rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    const int m = 2 + rep % 5;
    const Matrix f = fixtures::gaussian_matrix(25, m, rng);
    const Vector a = fixtures::gaussian_vector(25, rng) + f.col(0);
    std::vector<Index> p(m);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    Matrix fp(25, m);
    for (int j = 0; j < m; ++j) fp.col(j) = f.col(p[j]);
    const Matrix e = (-f).colwise() + a;
    const Matrix s = estimate_mspe(e).sigma;
    const Matrix sp = permute(s, p);
    const Vector ng = combine_ng(s).weights, ngp = combine_ng(sp).weights;
    const Vector cls = combine_cls(f, a).weights, clsp = combine_cls(fp, a).weights;
    const Vector sea = combine_sea(s), seap = combine_sea(sp);
    for (int j = 0; j < m; ++j) {
      EXPECT_NEAR(ngp(j), ng(p[j]), 1e-9);
      EXPECT_NEAR(clsp(j), cls(p[j]), 1e-8);
      EXPECT_NEAR(seap(j), sea(p[j]), 1e-8);
    }
  }
}

namespace {

/// Comparison whose member m forecasts actual + err(m, w, h) in each window.
template <class F>
eval::Comparison fake_comparison(const data::DesignMatrix& d, const data::CvPlan& plan,
                                 const std::vector<std::string>& models, F err) {
  eval::Comparison c;
  c.models = models;
  c.plan = plan;
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (const auto& w : plan.windows) {
      eval::WindowForecast f;
      f.model = models[m];
      f.window = w.id;
      f.train_end = w.train_end;
      f.status = eval::Status::Ok;
      double prev = d.level(static_cast<Index>(w.train_end) - 1);
      for (std::size_t h = 0; h < w.holdout; ++h) {
        const double actual = d.level(static_cast<Index>(w.train_end + h));
        f.actual.push_back(actual);
        f.point.push_back(actual + err(m, w.id, h));
        f.diff_point.push_back(f.point.back() - prev);
        prev = f.point.back();
      }
      c.forecasts.push_back(std::move(f));
      c.metrics.rows.push_back(eval::score(c.forecasts.back(), d));
    }
  }
  return c;
}

}  // namespace

TEST(Scenarios, Selection) {
  const auto d = fixtures::linear_design(64, 2, 1);
  const auto plan = data::rolling_windows(64, 4, 12);
  const std::vector<std::string> models{"lm", "ridge", "lasso", "rf", "cart", "bart"};
  const auto c = fake_comparison(d, plan, models, [](std::size_t m, std::size_t w, std::size_t h) {
    const double scale = std::vector<double>{0.5, 0.4, 0.3, 0.2, 0.25, 0.1}[m];
    return scale * (((w * 7 + h * 3 + m) % 5) - 2.0);
  });
  const auto rm = eval::rank_models(c.metrics, models);
  const auto r = eval::rmcb(rm);
  const auto all = select_scenario(r, c.metrics, models, Scenario::All);
  EXPECT_EQ(all.members, models);
  const auto top = select_scenario(r, c.metrics, models, Scenario::Top8);
  EXPECT_EQ(top.members, r.best_group());
  const auto grp = select_scenario(r, c.metrics, models, Scenario::TopGroup);
  EXPECT_EQ(grp.members, (std::vector<std::string>{"lasso", "bart"}));
  const auto single = select_scenario(r, c.metrics, {"lm", "ridge"}, Scenario::TopGroup);
  EXPECT_EQ(single.members, (std::vector<std::string>{"ridge"}));
  EXPECT_FALSE(single.warnings.empty());
  EXPECT_EQ(parse_scenario("top_group"), Scenario::TopGroup);
  EXPECT_EQ(parse_method("CLS"), Method::Cls);
  EXPECT_THROW(parse_method("MEDIAN"), ConfigError);
}

TEST(Evaluate, CopiesReproduceTheMember) {
  const auto d = fixtures::linear_design(64, 2, 2);
  const auto plan = data::rolling_windows(64, 4, 12);
  const std::vector<std::string> models{"lm", "ridge", "lasso"};
  Rng rng(1);
  std::normal_distribution<double> n(0, 0.2);
  std::vector<double> shared(49 * 12);
  for (auto& v : shared) v = n(rng);
  const auto c = fake_comparison(d, plan, models, [&](std::size_t, std::size_t w, std::size_t h) { return shared[w * 12 + h]; });
  const auto r = eval::rmcb(eval::rank_models(c.metrics, models));
  CombinationOptions opt;
  opt.disable_inverse_on_all = false;
  opt.scenarios = {Scenario::All};
  const auto res = evaluate_combinations(c, d, r, models, opt);
  ASSERT_EQ(res.runs.size(), 4u);
  for (const auto& run : res.runs) {
    for (const auto& w : run.windows) {
      if (run.method == Method::Cls && w.observations < 3) {
        EXPECT_FALSE(w.available);
        continue;
      }
      ASSERT_TRUE(w.available) << run.id << " " << w.window << " " << w.reason;
      EXPECT_NEAR(w.mae, c.metrics.find("lm", w.window)->mae, 1e-12) << run.id;
    }
  }
}

TEST(Evaluate, StructureAndNoLookAhead) {
  const auto d = fixtures::linear_design(64, 2, 3);
  const auto plan = data::rolling_windows(64, 4, 12);
  const std::vector<std::string> models{"lm", "lasso", "rf", "bart", "bma"};
  auto err = [](std::size_t m, std::size_t w, std::size_t h) {
    return (0.1 + 0.05 * m) * std::sin(1.3 * w + 0.7 * h + m) + 0.02 * m;
  };
  const auto c = fake_comparison(d, plan, models, err);
  const auto rank = eval::rmcb(eval::rank_models(c.metrics, models));
  const auto res = evaluate_combinations(c, d, rank, models);
  EXPECT_EQ(res.runs.size(), 10u);
  for (const auto& run : res.runs) {
    EXPECT_EQ(run.windows.size(), 48u);
    EXPECT_EQ(run.windows.front().window, 1u);
    EXPECT_FALSE(run.scenario == Scenario::All && (run.method == Method::Ng || run.method == Method::Sea));
    for (const auto& w : run.windows) {
      if (!w.available) continue;
      EXPECT_NEAR(w.weights.sum(), 1.0, 1e-10);
      if (run.method == Method::Cls) EXPECT_GE(w.weights.minCoeff(), -1e-10);
      if (run.method == Method::Avg) {
        for (Index i = 0; i < w.weights.size(); ++i) EXPECT_DOUBLE_EQ(w.weights(i), 1.0 / w.weights.size());
      }
    }
  }
  EXPECT_EQ(res.metrics.rows.size(), 10u * 48u);
  EXPECT_NE(res.metrics.find("NG:top_group", 5), nullptr);
  EXPECT_EQ(res.metrics.find("AVG:all", 0), nullptr);
  ASSERT_FALSE(res.summary.empty());
  EXPECT_EQ(res.summary[0].id, "bart");
  EXPECT_EQ(res.summary[1].id, "bma");
  EXPECT_DOUBLE_EQ(res.summary[0].mae_ratio, 1.0);
  EXPECT_FALSE(res.summary_windows.empty());
  const auto text = format_summary(res);
  EXPECT_NE(text.find("CLS:top8"), std::string::npos);
  const auto j = to_json(res);
  EXPECT_EQ(j["runs"].size(), 10u);

  // corrupting everything that is not yet observed at window 20 leaves its weights unchanged
  auto dirty = c;
  const std::size_t origin = plan.windows[20].train_end;
  for (auto& f : dirty.forecasts) {
    for (std::size_t h = 0; h < f.actual.size(); ++h) {
      if (f.train_end + h >= origin) f.actual[h] += 100.0 * (1.0 + h);
    }
  }
  std::vector<std::size_t> idx{0, 1, 2, 3};
  for (auto m : {Method::Ng, Method::Cls, Method::Sea}) {
    const auto a = estimate_weights(m, c, idx, 20, ErrorSample::Observed);
    const auto b = estimate_weights(m, dirty, idx, 20, ErrorSample::Observed);
    EXPECT_EQ(a.weights, b.weights) << to_string(m);
    const auto full_a = estimate_weights(m, c, idx, 20, ErrorSample::AllPrior);
    const auto full_b = estimate_weights(m, dirty, idx, 20, ErrorSample::AllPrior);
    EXPECT_NE(full_a.weights, full_b.weights) << to_string(m);
  }
}

TEST(Evaluate, FixedWeightsOption) {
  const auto d = fixtures::linear_design(64, 2, 4);
  const auto plan = data::rolling_windows(64, 4, 12);
  const std::vector<std::string> models{"lm", "lasso", "bart"};
  const auto c = fake_comparison(d, plan, models, [](std::size_t m, std::size_t w, std::size_t h) {
    return (0.1 + 0.1 * m) * std::cos(0.9 * w + 0.4 * h * (m + 1));
  });
  const auto rank = eval::rmcb(eval::rank_models(c.metrics, models));
  CombinationOptions opt;
  opt.reestimate = false;
  opt.methods = {Method::Ng};
  opt.scenarios = {Scenario::TopGroup};
  const auto res = evaluate_combinations(c, d, rank, models, opt);
  ASSERT_EQ(res.runs.size(), 1u);
  const auto& first = res.runs[0].windows.front();
  ASSERT_TRUE(first.available);
  for (const auto& w : res.runs[0].windows) EXPECT_EQ(w.weights, first.weights);
}

TEST(Evaluate, FailedMemberMakesWindowUnavailable) {
  const auto d = fixtures::linear_design(64, 2, 5);
  const auto plan = data::rolling_windows(64, 4, 12);
  const std::vector<std::string> models{"lm", "bart"};
  auto c = fake_comparison(d, plan, models, [](std::size_t m, std::size_t w, std::size_t h) {
    return 0.1 * (m + 1) * std::sin(double(w + h));
  });
  auto& f = c.forecasts[49 + 10];  // bart, window 10
  f.status = eval::Status::Failed;
  f.point.clear();
  const auto rank = eval::rmcb(eval::rank_models(c.metrics, models));
  CombinationOptions opt;
  opt.scenarios = {Scenario::All};
  opt.methods = {Method::Avg};
  const auto res = evaluate_combinations(c, d, rank, models, opt);
  EXPECT_FALSE(res.runs[0].windows[9].available);
  EXPECT_EQ(res.runs[0].unavailable(), 1u);
  EXPECT_EQ(res.metrics.find("AVG:all", 10)->status, eval::Status::Failed);
  EXPECT_EQ(std::count(res.summary_windows.begin(), res.summary_windows.end(), 10u), 0);
}
