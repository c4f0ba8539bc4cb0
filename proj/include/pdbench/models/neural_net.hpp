#pragma once

#include "pdbench/core/linalg.hpp"
#include "pdbench/models/model.hpp"

#include <cstdint>
#include <vector>

namespace pdbench::models {

struct NeuralNetOptions {
  /// Hidden layer widths; a zero ends the stack.
  std::vector<int> hidden{5};
  int max_epochs = 5000;
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double step_init = 0.1;
  double step_min = 1e-6;
  double step_max = 50.0;
  /// Training stops once the largest absolute gradient falls below this.
  double gradient_tolerance = 1e-7;
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
};

class NeuralNetPredictor : public Predictor {
 public:
  Vector predict(const Matrix& x) const override;

  Standardizer input_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
  /// Sigmoid on every layer but the last, which is linear.
  std::vector<DenseLayer> layers;
  int epochs = 0;
  double train_loss = 0.0;
};

/// Feed-forward network trained by resilient backpropagation with weight
/// backtracking on half the mean squared error of the standardized target.
NeuralNetPredictor fit_neural_net(const Matrix& x, const Vector& y, const NeuralNetOptions& options,
                                  std::uint64_t seed);

}  // namespace pdbench::models
