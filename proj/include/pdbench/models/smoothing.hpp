#pragma once

#include "pdbench/models/model.hpp"

namespace pdbench::models {

/// Simple exponential smoothing with additive errors. Exogenous columns are
/// ignored; the forecast is the final smoothed level at every horizon.
class SesPredictor : public Predictor {
 public:
  SesPredictor(double alpha, double level, double sse) : alpha_(alpha), level_(level), sse_(sse) {}
  Vector predict(const Matrix& x) const override;
  bool horizon_constant() const override { return true; }

  double alpha() const { return alpha_; }
  double level() const { return level_; }
  double sse() const { return sse_; }

 private:
  double alpha_;
  double level_;
  double sse_;
};

/// One-step-ahead in-sample SSE for a given alpha; level starts at y[0].
double ses_sse(const Vector& y, double alpha);

/// alpha in (0, 1]; a negative alpha selects it by minimizing in-sample SSE.
SesPredictor fit_ses(const Vector& y, double alpha = -1.0);

}  // namespace pdbench::models
