#include "core/adam.hpp"

#include <cmath>

#include "core/error.hpp"

namespace lirec {

void Adam::ensure_shaped(const std::vector<ParamRef>& params) {
  if (!m_.empty()) {
    if (m_.size() != params.size())
      fail_runtime("adam: parameter list size changed mid-run");
    return;
  }
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const ParamRef& p : params) {
    m_.push_back(Tensor::zeros(p.value->shape));
    v_.push_back(Tensor::zeros(p.value->shape));
  }
}

void Adam::step(const std::vector<ParamRef>& params) {
  ensure_shaped(params);
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamRef& p = params[i];
    if (!p.grad->same_shape(*p.value))
      fail_runtime("adam: gradient shape mismatch for " + p.name);
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t k = 0; k < p.value->size(); ++k) {
      double g = p.grad->data[k];
      if (!std::isfinite(g)) fail_runtime("adam: non-finite gradient in " + p.name);
      m.data[k] = cfg_.beta1 * m.data[k] + (1.0 - cfg_.beta1) * g;
      v.data[k] = cfg_.beta2 * v.data[k] + (1.0 - cfg_.beta2) * g * g;
      double m_hat = m.data[k] / bc1;
      double v_hat = v.data[k] / bc2;
      p.value->data[k] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

std::vector<std::pair<std::string, const Tensor*>> Adam::named_state(
    const std::vector<ParamRef>& params) const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  if (m_.empty()) return out;
  if (m_.size() != params.size()) fail_runtime("adam: state/parameter list mismatch");
  out.reserve(params.size() * 2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.emplace_back("adam.m." + params[i].name, &m_[i]);
    out.emplace_back("adam.v." + params[i].name, &v_[i]);
  }
  return out;
}

void Adam::restore(const std::vector<ParamRef>& params,
                   const std::vector<std::pair<std::string, Tensor>>& state,
                   std::uint64_t step_count) {
  m_.clear();
  v_.clear();
  t_ = step_count;
  if (state.empty()) return;  // fresh optimizer (e.g. checkpoint from epoch 0)
  if (state.size() != params.size() * 2)
    fail_io("adam restore: optimizer state entry count does not match parameter list");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& m_entry = state[2 * i];
    const auto& v_entry = state[2 * i + 1];
    if (m_entry.first != "adam.m." + params[i].name ||
        v_entry.first != "adam.v." + params[i].name)
      fail_io("adam restore: optimizer state names do not match parameter " +
              params[i].name);
    if (m_entry.second.shape != params[i].value->shape ||
        v_entry.second.shape != params[i].value->shape)
      fail_io("adam restore: moment shape mismatch for " + params[i].name);
    m_.push_back(m_entry.second);
    v_.push_back(v_entry.second);
  }
}

}  // namespace lirec
