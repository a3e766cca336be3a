#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "util/jsonsafe.hpp"

namespace lirec {

// One toy instance: the analytic gradient of a single sample's loss checked
// against central finite differences over every parameter scalar.
struct GradCheckEntry {
  std::string form;
  std::uint64_t instance_seed = 0;  // seed of the accepted toy, after redraws
  int redraws = 0;
  double loss = 0.0;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;
  double wall_ms = 0.0;

  bool passed(double tol) const { return max_rel_err < tol; }
  Json to_json() const;
};

// Every objective form covered by the harness.
std::vector<std::string> gradcheck_forms();

// instances_per_form toys of each form. Toys landing too close to a hinge,
// ReLU or max-pool switch point are redrawn so finite differences stay on
// one smooth piece.
GradCheckReport run_gradcheck(std::uint64_t seed, int instances_per_form = 20);

// Single form by name.
GradCheckReport run_gradcheck_form(const std::string& form, std::uint64_t seed,
                                   int instances);

}  // namespace lirec
