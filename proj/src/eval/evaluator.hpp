#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "data/dataset.hpp"
#include "model/model.hpp"
#include "util/jsonsafe.hpp"

namespace lirec {

struct EvalConfig {
  std::size_t bundle_cap = 18;
  // re-scores relationships at several caps (relationship / joint regimes)
  bool sweep = false;
  std::vector<std::size_t> sweep_caps = {1, 2, 4, 8, 18};

  void validate() const;
  static EvalConfig from_json(const Json& j);
  Json to_json() const;
};

// A fraction with its support; absent metrics stay present=false so report
// consumers can tell "not applicable" from zero.
struct Metric {
  double value = 0.0;
  std::size_t count = 0;
  bool present = false;

  void add(bool hit) {
    value = (value * static_cast<double>(count) + (hit ? 1.0 : 0.0)) /
            static_cast<double>(count + 1);
    ++count;
    present = true;
  }
};

struct MetricReport {
  // clip interactions, scored under the annotated pair
  Metric top1, top5, soft;
  // bundle relationships
  Metric rel_top1;
  // candidate-pair matrix, one clip at a time
  Metric char_given_int;  // argmax over pairs at the true interaction column
  Metric int_given_char;  // argmax over interactions at the true pair row
  Metric joint_pair;      // argmax over the whole matrix, both must match
  // pair/interaction/relationship tensor, one clip inside its bundle
  Metric char_given_int_rel;
  Metric int_given_char_rel;
  Metric rel_given_char_int;
  Metric joint_tensor;  // all three must match
  std::vector<std::pair<std::size_t, double>> rel_sweep;

  Json to_json() const;
};

// Lowest index wins ties everywhere.
std::size_t argmax_index(const double* v, std::size_t n);
inline std::size_t argmax_index(const std::vector<double>& v) {
  return argmax_index(v.data(), v.size());
}
// label among the k best scores (score descending, index ascending)
bool topk_contains(const Tensor& scores, int label, std::size_t k);
// top-1 equals the label or lies in its overlap set
bool soft_hit(const Tensor& scores, int label, const std::vector<int>& overlap);

MetricReport evaluate(const Model& m, const MovieDataset& ds,
                      const EvalConfig& cfg);

}  // namespace lirec
