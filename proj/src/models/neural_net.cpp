#include "pdbench/models/neural_net.hpp"

#include "pdbench/core/error.hpp"
#include "pdbench/core/rng.hpp"

#include <cmath>

namespace pdbench::models {

namespace {

Matrix sigmoid(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

struct Network {
  std::vector<DenseLayer>& layers;

  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& l : layers) s += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return s;
  }

  void read(Vector& flat) const {
    Index k = 0;
    for (const auto& l : layers) {
      flat.segment(k, l.weight.size()) = l.weight.reshaped();
      k += l.weight.size();
      flat.segment(k, l.bias.size()) = l.bias;
      k += l.bias.size();
    }
  }

  void write(const Vector& flat) {
    Index k = 0;
    for (auto& l : layers) {
      l.weight.reshaped() = flat.segment(k, l.weight.size());
      k += l.weight.size();
      l.bias = flat.segment(k, l.bias.size());
      k += l.bias.size();
    }
  }

  // (loss, gradient) for inputs `a0` (in x n) and targets y.
  double loss_and_gradient(const Matrix& a0, const Vector& y, Vector& grad) const {
    const auto n = static_cast<double>(a0.cols());
    std::vector<Matrix> acts{a0};
    for (std::size_t l = 0; l < layers.size(); ++l) {
      Matrix z = layers[l].weight * acts.back();
      z.colwise() += layers[l].bias;
      acts.push_back(l + 1 < layers.size() ? sigmoid(z) : z);
    }
    const Vector resid = acts.back().row(0).transpose() - y;
    const double loss = 0.5 * resid.squaredNorm() / n;
    Matrix delta = resid.transpose() / n;  // 1 x n
    std::vector<Matrix> gw(layers.size()), gb(layers.size());
    for (std::size_t l = layers.size(); l-- > 0;) {
      gw[l] = delta * acts[l].transpose();
      gb[l] = delta.rowwise().sum();
      if (l > 0) {
        const Matrix& a = acts[l];
        delta = ((layers[l].weight.transpose() * delta).array() * a.array() * (1.0 - a.array())).matrix();
      }
    }
    grad.resize(static_cast<Index>(size()));
    Index k = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      grad.segment(k, gw[l].size()) = gw[l].reshaped();
      k += gw[l].size();
      grad.segment(k, gb[l].size()) = gb[l];
      k += gb[l].size();
    }
    return loss;
  }
};

Matrix forward(const std::vector<DenseLayer>& layers, Matrix a) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = layers[l].weight * a;
    z.colwise() += layers[l].bias;
    a = l + 1 < layers.size() ? sigmoid(z) : z;
  }
  return a;
}

}  // namespace

Vector NeuralNetPredictor::predict(const Matrix& x) const {
  const Matrix a0 = input_scale.transform(x).transpose();
  const Vector out = forward(layers, a0).row(0).transpose();
  return (out.array() * y_scale + y_mean).matrix();
}

NeuralNetPredictor fit_neural_net(const Matrix& x, const Vector& y, const NeuralNetOptions& opt,
                                  std::uint64_t seed) {
  if (x.rows() < 1) throw FitError("nn: no training rows");
  NeuralNetPredictor net;
  net.input_scale = Standardizer::fit(x);
  net.y_mean = y.mean();
  const double var = (y.array() - net.y_mean).square().mean();
  net.y_scale = var > 0.0 ? std::sqrt(var) : 1.0;
  const Matrix a0 = net.input_scale.transform(x).transpose();
  const Vector target = (y.array() - net.y_mean) / net.y_scale;

  Rng rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Index fan_in = x.cols();
  std::vector<int> widths;
  for (int h : opt.hidden) {
    if (h < 0) throw ConfigError("nn: negative layer width");
    if (h == 0) break;
    widths.push_back(h);
  }
  widths.push_back(1);
  for (int w : widths) {
    DenseLayer layer;
    const double s = 1.0 / std::sqrt(static_cast<double>(std::max<Index>(fan_in, 1)));
    layer.weight = Matrix::NullaryExpr(w, fan_in, [&]() { return s * unif(rng); });
    layer.bias = Vector::NullaryExpr(w, [&]() { return s * unif(rng); });
    net.layers.push_back(std::move(layer));
    fan_in = w;
  }

  Network model{net.layers};
  const auto m = static_cast<Index>(model.size());
  Vector theta(m), grad(m), prev_grad = Vector::Zero(m), step = Vector::Constant(m, opt.step_init);
  Vector last_delta = Vector::Zero(m);
  model.read(theta);
  double loss = model.loss_and_gradient(a0, target, grad);
  int epoch = 0;
  for (; epoch < opt.max_epochs; ++epoch) {
    if (!std::isfinite(loss)) throw FitError("nn: training diverged");
    if (grad.cwiseAbs().maxCoeff() < opt.gradient_tolerance) break;
    for (Index i = 0; i < m; ++i) {
      const double g = grad(i);
      const double sign_change = g * prev_grad(i);
      if (sign_change > 0.0) {
        step(i) = std::min(step(i) * opt.eta_plus, opt.step_max);
        last_delta(i) = -(g > 0.0 ? 1.0 : -1.0) * step(i);
        theta(i) += last_delta(i);
        prev_grad(i) = g;
      } else if (sign_change < 0.0) {
        step(i) = std::max(step(i) * opt.eta_minus, opt.step_min);
        theta(i) -= last_delta(i);  // backtrack
        last_delta(i) = 0.0;
        prev_grad(i) = 0.0;
      } else {
        last_delta(i) = g > 0.0 ? -step(i) : (g < 0.0 ? step(i) : 0.0);
        theta(i) += last_delta(i);
        prev_grad(i) = g;
      }
    }
    model.write(theta);
    loss = model.loss_and_gradient(a0, target, grad);
  }
  net.epochs = epoch;
  net.train_loss = loss;
  return net;
}

}  // namespace pdbench::models
