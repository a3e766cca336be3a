#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace lirec {

// Named handle into a model's parameter list. The ordering of ParamRef
// vectors is part of the determinism contract: update order is fixed.
struct ParamRef {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
};

struct AdamConfig {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction. Moments are lazily shaped from the
// first step's parameter list and keyed by position thereafter.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<ParamRef>& params);

  std::uint64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  // checkpoint plumbing: moments exported/imported as named tensors
  std::vector<std::pair<std::string, const Tensor*>> named_state(
      const std::vector<ParamRef>& params) const;
  void restore(const std::vector<ParamRef>& params,
               const std::vector<std::pair<std::string, Tensor>>& state,
               std::uint64_t step_count);

 private:
  void ensure_shaped(const std::vector<ParamRef>& params);

  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace lirec
