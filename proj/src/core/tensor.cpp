#include "core/tensor.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace lirec {

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  data.assign(shape_numel(shape), 0.0);
}

Tensor Tensor::full(std::vector<std::size_t> s, double value) {
  Tensor t(std::move(s));
  t.fill(value);
  return t;
}

Tensor Tensor::vector(std::vector<double> values) {
  Tensor t;
  t.shape = {values.size()};
  t.data = std::move(values);
  return t;
}

std::size_t Tensor::rows() const {
  if (ndim() != 2) fail_invalid("rows(): tensor is not 2-d, shape " + shape_str(shape));
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (ndim() != 2) fail_invalid("cols(): tensor is not 2-d, shape " + shape_str(shape));
  return shape[1];
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

bool Tensor::all_finite() const {
  for (double x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

void check_shape(const Tensor& t, const std::vector<std::size_t>& want,
                 const std::string& where) {
  if (t.shape != want) {
    fail_invalid(where + ": shape mismatch, expected " + shape_str(want) +
                 " but got " + shape_str(t.shape));
  }
}

}  // namespace lirec
