#include "pdbench/models/smoothing.hpp"

#include "pdbench/core/error.hpp"

#include <cmath>

namespace pdbench::models {

namespace {

double final_level(const Vector& y, double alpha) {
  double level = y(0);
  for (Index t = 1; t < y.size(); ++t) level += alpha * (y(t) - level);
  return level;
}

}  // namespace

double ses_sse(const Vector& y, double alpha) {
  double level = y(0);
  double sse = 0.0;
  for (Index t = 1; t < y.size(); ++t) {
    const double e = y(t) - level;
    sse += e * e;
    level += alpha * e;
  }
  return sse;
}

Vector SesPredictor::predict(const Matrix& x) const { return Vector::Constant(x.rows(), level_); }

SesPredictor fit_ses(const Vector& y, double alpha) {
  if (y.size() < 1) throw FitError("es: empty training series");
  if (alpha > 1.0) throw ConfigError("es: alpha must lie in (0, 1]");
  if (alpha < 0.0 && y.size() >= 3) {
    // coarse scan then golden section; the SSE surface can be multimodal
    constexpr double lo = 1e-4, hi = 1.0;
    constexpr int grid = 50;
    double best_a = hi, best = ses_sse(y, hi);
    for (int i = 0; i < grid; ++i) {
      const double a = lo + (hi - lo) * i / grid;
      const double s = ses_sse(y, a);
      if (s < best) best = s, best_a = a;
    }
    double a = std::max(lo, best_a - (hi - lo) / grid);
    double b = std::min(hi, best_a + (hi - lo) / grid);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = ses_sse(y, c), fd = ses_sse(y, d);
    for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
      if (fc < fd) {
        b = d, d = c, fd = fc;
        c = b - g * (b - a), fc = ses_sse(y, c);
      } else {
        a = c, c = d, fc = fd;
        d = a + g * (b - a), fd = ses_sse(y, d);
      }
    }
    const double mid = 0.5 * (a + b);
    alpha = ses_sse(y, mid) < best ? mid : best_a;
  } else if (alpha < 0.0) {
    alpha = 1.0;
  } else if (alpha == 0.0) {
    throw ConfigError("es: alpha must lie in (0, 1]");
  }
  return SesPredictor(alpha, final_level(y, alpha), ses_sse(y, alpha));
}

}  // namespace pdbench::models
