#include "fixtures.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/data/cv_plan.hpp"
#include "pdbench/data/design.hpp"
#include "pdbench/data/stationarity.hpp"
#include "pdbench/data/transforms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace pdbench;
using namespace pdbench::data;

namespace {

std::string csv_header() { return "period,PD,GDP,UNE,INF,RRE,EQP,EXR,STR,LTR\n"; }

std::string csv_row(const std::string& period, double pd) {
  return period + "," + std::to_string(pd) + ",1,2,3,4,5,6,7,8\n";
}

}  // namespace

TEST(Csv, ParsesSixtyNineQuarters) {
  std::string text = csv_header();
  Period p(2002, 2);
  for (int i = 0; i < 69; ++i, p = p.next()) text += csv_row(p.label(), 5.0);
  const auto frame = parse_csv(text);
  EXPECT_EQ(frame.rows(), 69u);
  EXPECT_EQ(frame.columns().size(), 9u);
  EXPECT_EQ(frame.index().front().label(), "2002Q2");
  EXPECT_EQ(frame.index().back().label(), "2019Q2");
  for (const auto& c : frame.columns()) EXPECT_TRUE(c.transform_log.empty());
}

TEST(Csv, SingleRowIsValid) {
  const auto frame = parse_csv(csv_header() + csv_row("2010Q1", 2.5));
  EXPECT_EQ(frame.rows(), 1u);
  EXPECT_DOUBLE_EQ(frame.values("PD")[0], 2.5);
}

TEST(Csv, RowsAreSortedByPeriod) {
  const auto frame = parse_csv(csv_header() + csv_row("2010Q2", 2.0) + csv_row("2010Q1", 1.0));
  EXPECT_EQ(frame.index()[0].label(), "2010Q1");
  EXPECT_DOUBLE_EQ(frame.values("PD")[0], 1.0);
}

TEST(Csv, RejectsBoundaryPd) {
  EXPECT_THROW(parse_csv(csv_header() + csv_row("2010Q1", 0.0)), DataError);
  EXPECT_THROW(parse_csv(csv_header() + csv_row("2010Q1", 100.0)), DataError);
}

TEST(Csv, ErrorsNameTheOffendingCell) {
  try {
    parse_csv(csv_header() + "2010Q1,1,2,x,4,5,6,7,8,9\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("UNE"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_csv("period,PD,GDP\n2010Q1,1,2\n"), DataError);
  EXPECT_THROW(parse_csv(csv_header() + csv_row("2010Q1", 1) + csv_row("2010Q1", 1)), DataError);
  EXPECT_THROW(parse_csv(csv_header() + csv_row("2010Q1", 1) + csv_row("2010Q3", 1)), DataError);
}

TEST(Csv, FileRoundTrip) {
  const auto frame = fixtures::random_frame(12, 3);
  const auto path = std::filesystem::temp_directory_path() / "pdbench_roundtrip.csv";
  std::ofstream(path) << to_csv(frame);
  const auto back = ingest_csv(path);
  ASSERT_EQ(back.rows(), frame.rows());
  for (const auto& c : frame.columns()) {
    for (std::size_t i = 0; i < frame.rows(); ++i) EXPECT_EQ(back.values(c.name)[i], c.values[i]);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(ingest_csv("/nonexistent/file.csv"), DataError);
}

TEST(Logit, ReferenceValues) {
  EXPECT_DOUBLE_EQ(logit_transform(50.0), 0.0);
  // independent evaluation through log1p
  EXPECT_NEAR(logit_transform(5.3), std::log(0.053) - std::log1p(-0.053), 1e-14);
  EXPECT_NEAR(logit_transform(5.3), -2.8831, 1e-4);
  EXPECT_NEAR(logit_transform(6.0), -2.7515, 1e-4);
  EXPECT_THROW(logit_transform(0.0), DomainError);
  EXPECT_THROW(logit_transform(100.0), DomainError);
  EXPECT_THROW(logit_transform(-1.0), DomainError);
}

TEST(Logit, InverseAndSaturation) {
  EXPECT_DOUBLE_EQ(inverse_logit(0.0), 50.0);
  EXPECT_NEAR(inverse_logit(logit_transform(5.3)), 5.3, 1e-12);
  const double v = inverse_logit(700.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, 100.0, 1e-12);
  EXPECT_TRUE(std::isfinite(inverse_logit(-700.0)));
  EXPECT_GE(inverse_logit(-700.0), 0.0);
}

TEST(Logit, RoundTripGridAndMonotone) {
  double prev = -INFINITY;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double pd = 0.01 + (99.99 - 0.01) * i / 9999.0;
    const double y = logit_transform(pd);
    EXPECT_GT(y, prev);
    prev = y;
    worst = std::max(worst, std::abs(inverse_logit(y) - pd));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(SeasonalAdjust, ConstantUnchanged) {
  const std::vector<double> s(20, 3.5);
  const auto out = seasonal_adjust(s);
  for (double v : out) EXPECT_NEAR(v, 3.5, 1e-12);
}

TEST(SeasonalAdjust, RemovesSquareWave) {
  std::vector<double> s;
  for (int i = 0; i < 24; ++i) s.push_back(2.0 + ((i % 4) < 2 ? 1.0 : -1.0));
  const auto out = seasonal_adjust(s);
  for (double v : out) EXPECT_NEAR(v, 2.0, 1e-6);
}

// Monte Carlo statement: the estimated seasonal component correlates with
// the noise it was estimated from, so removing it shrinks variance on average.
TEST(SeasonalAdjust, WhiteNoiseVarianceShrinks) {
  int ok = 0;
  double ratio_sum = 0.0;
  constexpr int kSeeds = 200;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    Rng rng(seed);
    const Vector noise = fixtures::gaussian_vector(64, rng);
    const auto in = to_std(noise);
    const auto out = seasonal_adjust(in);
    const double ratio = std::pow(stddev(out) / stddev(in), 2);
    ratio_sum += ratio;
    if (ratio <= 1.0) ++ok;
  }
  EXPECT_LT(ratio_sum / kSeeds, 1.0);
  EXPECT_GE(ok, kSeeds * 9 / 10);
}

TEST(SeasonalAdjust, TooShort) { EXPECT_THROW(seasonal_adjust(std::vector<double>(7, 1.0)), DomainError); }

TEST(Difference, Basics) {
  EXPECT_EQ(difference(std::vector<double>{1, 2, 3, 4}), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(difference(std::vector<double>(5, 2.0)), std::vector<double>(4, 0.0));
  EXPECT_EQ(difference(std::vector<double>(69, 1.0)).size(), 68u);
  EXPECT_THROW(difference(std::vector<double>{1.0}), DomainError);
}

TEST(Reintegrate, Examples) {
  EXPECT_EQ(reintegrate_forecast(-2.9, std::vector<double>(12, 0.0)), std::vector<double>(12, -2.9));
  EXPECT_EQ(reintegrate_forecast(0.0, std::vector<double>{1, 1, 1}), (std::vector<double>{1, 2, 3}));
}

TEST(Reintegrate, RoundTripProperty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto path = to_std(fixtures::gaussian_vector(40, rng));
    const auto d = difference(path);
    const auto back = reintegrate_forecast(path[0], d);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(back[i], path[i + 1], 1e-12);
  }
}

TEST(Transforms, LogReplaysBitForBit) {
  const auto raw = fixtures::random_frame(69, 11);
  const auto t = apply_transforms(raw, TransformPlan{});
  EXPECT_EQ(t.frame.rows(), 68u);
  EXPECT_EQ(t.levels.rows(), 69u);
  const auto replayed = replay_transforms(raw, transform_logs(t.frame));
  for (const auto& c : t.frame.columns()) {
    const auto v = replayed.values(c.name);
    ASSERT_EQ(v.size(), c.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], c.values[i]) << c.name << " " << i;
  }
  const auto& pd_log = t.frame.column("PD").transform_log;
  ASSERT_EQ(pd_log.size(), 3u);
  EXPECT_EQ(pd_log[0].kind, TransformKind::Logit);
  EXPECT_EQ(pd_log[1].kind, TransformKind::SeasonalAdjust);
  EXPECT_EQ(pd_log[2].kind, TransformKind::Difference);
  // GDP is not seasonally adjusted by default
  EXPECT_EQ(t.frame.column("GDP").transform_log.size(), 1u);
}

TEST(Stationarity, RandomWalkAndWhiteNoise) {
  int rw_keep = 0, wn_reject = 0, kpss_keep = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(derive_seed(seed, 1));
    const Vector e = fixtures::gaussian_vector(100, rng);
    std::vector<double> walk(100);
    double s = 0.0;
    for (int i = 0; i < 100; ++i) walk[static_cast<std::size_t>(i)] = s += e(i);
    if (!adf_test(walk).rejects_unit_root) ++rw_keep;
    const auto noise = to_std(e);
    if (adf_test(noise).rejects_unit_root) ++wn_reject;
    if (!kpss_test(noise).rejects_stationarity) ++kpss_keep;
  }
  EXPECT_GE(rw_keep, 180);
  EXPECT_GE(wn_reject, 180);
  EXPECT_GE(kpss_keep, 180);
}

TEST(Stationarity, DegenerateAndShort) {
  const std::vector<double> flat(30, 1.0);
  EXPECT_TRUE(kpss_test(flat).degenerate);
  EXPECT_TRUE(adf_test(flat).degenerate);
  EXPECT_THROW(adf_test(std::vector<double>(19, 0.0)), DomainError);
  EXPECT_THROW(kpss_test(std::vector<double>(19, 0.0)), DomainError);
}

TEST(Stationarity, DecisionsFollowStatistics) {
  Rng rng(5);
  const auto noise = to_std(fixtures::gaussian_vector(64, rng));
  const auto a = adf_test(noise);
  EXPECT_EQ(a.rejects_unit_root, a.statistic < a.critical_5);
  EXPECT_LT(a.critical_1, a.critical_5);
  EXPECT_LT(a.critical_5, a.critical_10);
  // asymptotic MacKinnon value for the constant-only case
  EXPECT_NEAR(adf_critical_value(0.05, 100000000), -2.8621, 1e-3);
  const auto k = kpss_test(noise);
  EXPECT_EQ(k.rejects_stationarity, k.statistic > k.critical_5);
  const auto raw = fixtures::random_frame(69, 2);
  const auto report = stationarity_report(apply_transforms(raw, {}).frame);
  EXPECT_EQ(report.entries.size(), 9u);
  EXPECT_EQ(to_json(report)["columns"].size(), 9u);
}

TEST(Design, PaperShape) {
  const auto raw = fixtures::random_frame(69, 4);
  const auto t = apply_transforms(raw, {});
  const auto d = build_design(t.frame, "PD", 4, &t.levels);
  EXPECT_EQ(d.cols(), 40u);
  EXPECT_EQ(d.rows(), 64u);
  EXPECT_EQ(d.column_names.front(), "GDP_l0");
  EXPECT_EQ(d.column_names.back(), "LTR_l4");
  EXPECT_EQ(d.origin.front(), t.frame.index()[4]);
  // every lag-p column equals the contemporaneous column shifted by p rows
  for (std::size_t j = 0; j < d.n_base(); ++j) {
    const auto& v = t.frame.values(d.base_names[j]);
    for (int p = 0; p <= 4; ++p) {
      for (std::size_t r = 0; r < d.rows(); ++r) {
        EXPECT_EQ(d.x(static_cast<Index>(r), static_cast<Index>(d.column_index(j, p))), v[r + 4 - p]);
      }
    }
  }
  // level path differenced reproduces y
  for (Index r = 1; r < d.y.size(); ++r) EXPECT_NEAR(d.level(r) - d.level(r - 1), d.y(r), 1e-12);
}

TEST(Design, OneCovariateNoLags) {
  std::vector<Period> idx{Period(2000, 1), Period(2000, 2), Period(2000, 3)};
  TimeSeriesFrame f(idx, {Column{"PD", {1, 2, 3}, {}}, Column{"GDP", {4, 5, 6}, {}}});
  const auto d = build_design(f, "PD", 0);
  EXPECT_EQ(d.cols(), 1u);
  EXPECT_EQ(d.rows(), 3u);
  EXPECT_THROW(build_design(f, "PD", 3), DomainError);
}

TEST(CvPlan, PaperCounts) {
  EXPECT_EQ(rolling_windows(64, 4, 12).windows.size(), 49u);
  EXPECT_EQ(rolling_windows(64, 41, 12).windows.size(), 12u);
  EXPECT_EQ(rolling_windows(64, 41, 12).windows.back().train_end, 52u);
  EXPECT_EQ(rolling_windows(13, 1, 12).windows.size(), 1u);
  EXPECT_THROW(rolling_windows(10, 4, 12), ConfigError);
}

TEST(CvPlan, CountPropertyOverRandomSizes) {
  Rng rng(9);
  std::uniform_int_distribution<std::size_t> d(1, 80);
  for (int i = 0; i < 500; ++i) {
    const std::size_t init = d(rng), hold = d(rng), t = init + hold + d(rng) - 1;
    const auto plan = rolling_windows(t, init, hold);
    ASSERT_EQ(plan.windows.size(), t - hold - init + 1);
    for (std::size_t w = 0; w < plan.windows.size(); ++w) {
      EXPECT_EQ(plan.windows[w].train_end, init + w);
      EXPECT_LE(plan.windows[w].train_end + hold, t);
    }
  }
}
