#include "core/layers.hpp"

#include <cmath>

#include "core/error.hpp"

namespace lirec {

DenseLayer DenseLayer::create(std::size_t out_dim, std::size_t in_dim, Rng& rng) {
  DenseLayer layer;
  layer.weight = Tensor::zeros({out_dim, in_dim});
  layer.bias = Tensor::zeros({out_dim});
  layer.grad_weight = Tensor::zeros({out_dim, in_dim});
  layer.grad_bias = Tensor::zeros({out_dim});
  double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  for (double& w : layer.weight.data) w = rng.uniform(-bound, bound);
  return layer;
}

Tensor DenseLayer::forward(const Tensor& x) const {
  const std::size_t out = out_dim();
  const std::size_t in = in_dim();
  if (x.ndim() == 1) {
    if (x.size() != in)
      fail_invalid("dense forward: weight " + shape_str(weight.shape) +
                   " incompatible with input " + shape_str(x.shape));
    Tensor y = Tensor::zeros({out});
    for (std::size_t o = 0; o < out; ++o) {
      double acc = bias.at(o);
      for (std::size_t i = 0; i < in; ++i) acc += weight.at(o, i) * x.at(i);
      y.at(o) = acc;
    }
    return y;
  }
  if (x.ndim() == 2) {
    if (x.cols() != in)
      fail_invalid("dense forward: weight " + shape_str(weight.shape) +
                   " incompatible with input " + shape_str(x.shape));
    Tensor y = Tensor::zeros({x.rows(), out});
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t o = 0; o < out; ++o) {
        double acc = bias.at(o);
        for (std::size_t i = 0; i < in; ++i) acc += weight.at(o, i) * x.at(r, i);
        y.at(r, o) = acc;
      }
    }
    return y;
  }
  fail_invalid("dense forward: input must be 1-d or 2-d, got " + shape_str(x.shape));
}

Tensor DenseLayer::backward(const Tensor& x, const Tensor& dy) {
  const std::size_t out = out_dim();
  const std::size_t in = in_dim();
  if (x.ndim() == 1) {
    if (x.size() != in || dy.size() != out || dy.ndim() != 1)
      fail_invalid("dense backward: gradient " + shape_str(dy.shape) +
                   " incompatible with weight " + shape_str(weight.shape));
    Tensor dx = Tensor::zeros({in});
    for (std::size_t o = 0; o < out; ++o) {
      double g = dy.at(o);
      grad_bias.at(o) += g;
      for (std::size_t i = 0; i < in; ++i) {
        grad_weight.at(o, i) += g * x.at(i);
        dx.at(i) += g * weight.at(o, i);
      }
    }
    return dx;
  }
  if (x.ndim() == 2) {
    if (x.cols() != in || dy.ndim() != 2 || dy.rows() != x.rows() || dy.cols() != out)
      fail_invalid("dense backward: gradient " + shape_str(dy.shape) +
                   " incompatible with input " + shape_str(x.shape));
    Tensor dx = Tensor::zeros({x.rows(), in});
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t o = 0; o < out; ++o) {
        double g = dy.at(r, o);
        grad_bias.at(o) += g;
        for (std::size_t i = 0; i < in; ++i) {
          grad_weight.at(o, i) += g * x.at(r, i);
          dx.at(r, i) += g * weight.at(o, i);
        }
      }
    }
    return dx;
  }
  fail_invalid("dense backward: input must be 1-d or 2-d, got " + shape_str(x.shape));
}

void DenseLayer::zero_grad() {
  grad_weight.fill(0.0);
  grad_bias.fill(0.0);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor tanh_map(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = std::tanh(v);
  return y;
}

Tensor sigmoid_map(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = sigmoid(v);
  return y;
}

Tensor relu_backward(const Tensor& x_pre, const Tensor& dy) {
  if (!x_pre.same_shape(dy)) fail_invalid("relu backward: shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (x_pre.data[i] <= 0.0) dx.data[i] = 0.0;
  return dx;
}

Tensor tanh_backward(const Tensor& y, const Tensor& dy) {
  if (!y.same_shape(dy)) fail_invalid("tanh backward: shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    dx.data[i] *= 1.0 - y.data[i] * y.data[i];
  return dx;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& dy) {
  if (!y.same_shape(dy)) fail_invalid("sigmoid backward: shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    dx.data[i] *= y.data[i] * (1.0 - y.data[i]);
  return dx;
}

DropoutMask make_dropout_mask(std::size_t n, double p_keep, bool train_mode, Rng& rng) {
  if (p_keep <= 0.0 || p_keep > 1.0)
    fail_invalid("dropout: keep probability must be in (0, 1]");
  DropoutMask m;
  m.p_keep = p_keep;
  m.train_mode = train_mode;
  if (train_mode && p_keep < 1.0) {
    m.mask = Tensor::zeros({n});
    for (std::size_t i = 0; i < n; ++i) m.mask.at(i) = rng.bernoulli(p_keep) ? 1.0 : 0.0;
  }
  return m;
}

Tensor dropout_forward(const Tensor& x, const DropoutMask& m) {
  if (!m.train_mode || m.p_keep >= 1.0) return x;
  if (m.mask.size() != x.size()) fail_invalid("dropout: mask/input size mismatch");
  Tensor y = x;
  double scale = 1.0 / m.p_keep;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= m.mask.at(i) * scale;
  return y;
}

Tensor dropout_backward(const Tensor& dy, const DropoutMask& m) {
  if (!m.train_mode || m.p_keep >= 1.0) return dy;
  if (m.mask.size() != dy.size()) fail_invalid("dropout: mask/gradient size mismatch");
  Tensor dx = dy;
  double scale = 1.0 / m.p_keep;
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= m.mask.at(i) * scale;
  return dx;
}

}  // namespace lirec
