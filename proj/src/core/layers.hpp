#pragma once

#include <limits>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace lirec {

// Records the smallest distance to a non-differentiable point (hinge
// boundary, ReLU zero, max-pool tie) seen during a forward pass, so the
// finite-difference harness can reject toys whose loss surface kinks
// within the probe step.
struct KinkProbe {
  double min_margin = std::numeric_limits<double>::infinity();
  void note(double margin) {
    if (margin < min_margin) min_margin = margin;
  }
};

// y = Wx + b with hand-written backward. Weight is (out, in), bias (out).
// Gradients accumulate into grad_weight/grad_bias until zero_grad().
struct DenseLayer {
  Tensor weight;
  Tensor bias;
  Tensor grad_weight;
  Tensor grad_bias;

  // scaled-uniform init, bound sqrt(6 / (fan_in + fan_out)); bias starts at 0
  static DenseLayer create(std::size_t out_dim, std::size_t in_dim, Rng& rng);

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }

  // x may be a vector (in) or a matrix (n, in)
  Tensor forward(const Tensor& x) const;
  // accumulates parameter grads from the cached input, returns dx
  Tensor backward(const Tensor& x, const Tensor& dy);
  void zero_grad();
};

double sigmoid(double x);

Tensor relu(const Tensor& x);
Tensor tanh_map(const Tensor& x);
Tensor sigmoid_map(const Tensor& x);

// backward helpers; relu keys off the pre-activation, tanh/sigmoid off the output
Tensor relu_backward(const Tensor& x_pre, const Tensor& dy);
Tensor tanh_backward(const Tensor& y, const Tensor& dy);
Tensor sigmoid_backward(const Tensor& y, const Tensor& dy);

// Inverted dropout: train mode scales surviving units by 1/p_keep so eval
// mode is the identity.
struct DropoutMask {
  double p_keep = 1.0;
  bool train_mode = false;
  Tensor mask;  // 0/1 per unit; empty when inactive
};

DropoutMask make_dropout_mask(std::size_t n, double p_keep, bool train_mode, Rng& rng);
Tensor dropout_forward(const Tensor& x, const DropoutMask& m);
Tensor dropout_backward(const Tensor& dy, const DropoutMask& m);

}  // namespace lirec
