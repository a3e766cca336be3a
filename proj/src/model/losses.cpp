#include "model/losses.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace lirec {

NegReduction reduction_from_string(const std::string& s) {
  if (s == "sum") return NegReduction::sum;
  if (s == "sum-max" || s == "sum_max") return NegReduction::sum_max;
  fail_invalid("unknown negative reduction: " + s + " (expected sum or sum-max)");
}

std::string reduction_str(NegReduction r) {
  return r == NegReduction::sum ? "sum" : "sum-max";
}

void LossConfig::validate() const {
  auto check_margin = [](double m, const char* name) {
    if (m <= 0.0 || m >= 1.0)
      fail_invalid(std::string("loss config: ") + name +
                   " must be in (0, 1), scores are sigmoid-bounded");
  };
  check_margin(margin_interaction, "margin_interaction");
  check_margin(margin_relationship, "margin_relationship");
  check_margin(margin_pair, "margin_pair");
  check_margin(margin_rel_pair, "margin_rel_pair");
  if (lambda < 0.0) fail_invalid("loss config: lambda must be >= 0");
  if (burn_in_epochs < 0) fail_invalid("loss config: burn_in_epochs must be >= 0");
}

LossConfig LossConfig::from_json(const Json& j) {
  JsonReader r(j, "loss config");
  LossConfig c;
  c.margin_interaction = r.get<double>("margin_interaction", c.margin_interaction);
  c.margin_relationship = r.get<double>("margin_relationship", c.margin_relationship);
  c.margin_pair = r.get<double>("margin_pair", c.margin_pair);
  c.margin_rel_pair = r.get<double>("margin_rel_pair", c.margin_rel_pair);
  c.lambda = r.get<double>("lambda", c.lambda);
  if (r.has("reduction"))
    c.reduction = reduction_from_string(r.require<std::string>("reduction"));
  c.burn_in_epochs = r.get<int>("burn_in_epochs", c.burn_in_epochs);
  c.weak = r.get<bool>("weak", c.weak);
  c.multinomial_sampling = r.get<bool>("multinomial_sampling", c.multinomial_sampling);
  r.finish();
  c.validate();
  return c;
}

Json LossConfig::to_json() const {
  Json j;
  j["margin_interaction"] = margin_interaction;
  j["margin_relationship"] = margin_relationship;
  j["margin_pair"] = margin_pair;
  j["margin_rel_pair"] = margin_rel_pair;
  j["lambda"] = lambda;
  j["reduction"] = reduction_str(reduction);
  j["burn_in_epochs"] = burn_in_epochs;
  j["weak"] = weak;
  j["multinomial_sampling"] = multinomial_sampling;
  return j;
}

namespace {

bool in_overlap(const std::vector<int>& overlap, int label) {
  return std::binary_search(overlap.begin(), overlap.end(), label);
}

void check_label(const Tensor& scores, int label, const char* what) {
  if (label < 0 || static_cast<std::size_t>(label) >= scores.size())
    fail_invalid(std::string(what) + " label " + std::to_string(label) +
                 " out of range for " + std::to_string(scores.size()) + " scores");
}

// ranking loss shared by the vector forms: positive score against every
// admissible negative index
double ranked_hinge_vector(const Tensor& scores, int positive,
                           const std::vector<int>& masked_out, double margin,
                           Tensor* dscores, KinkProbe* probe) {
  double s_pos = scores.at(static_cast<std::size_t>(positive));
  if (dscores) *dscores = Tensor::zeros(scores.shape);
  double total = 0.0;
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (static_cast<int>(a) == positive) continue;
    if (in_overlap(masked_out, static_cast<int>(a))) continue;
    double term = margin - s_pos + scores.at(a);
    if (probe) probe->note(std::abs(term));
    if (term > 0.0) {
      total += term;
      if (dscores) {
        dscores->at(a) += 1.0;
        dscores->at(static_cast<std::size_t>(positive)) -= 1.0;
      }
    }
  }
  return total;
}

}  // namespace

double loss_interaction(const Tensor& scores, int a_star,
                        const std::vector<int>& overlap, double margin,
                        Tensor* dscores, KinkProbe* probe) {
  check_label(scores, a_star, "interaction");
  return ranked_hinge_vector(scores, a_star, overlap, margin, dscores, probe);
}

double loss_relationship(const Tensor& scores, int r_star, double margin,
                         Tensor* dscores, KinkProbe* probe) {
  check_label(scores, r_star, "relationship");
  return ranked_hinge_vector(scores, r_star, {}, margin, dscores, probe);
}

double loss_joint(double rel_loss, const std::vector<double>& clip_losses,
                  double lambda) {
  if (clip_losses.empty()) fail_invalid("joint loss: empty bundle");
  double sum = 0.0;
  for (double l : clip_losses) sum += l;
  return rel_loss + lambda / static_cast<double>(clip_losses.size()) * sum;
}

namespace {

// shared core of the pair-matrix losses: positive cell (positive_pair,
// positive_label), negatives = all (p, a) cells with admissible(a), the
// single positive cell always excluded
template <class Admissible>
double ranked_hinge_matrix(const Tensor& scores, int positive_label,
                           std::size_t positive_pair, Admissible admissible,
                           double margin, NegReduction reduction,
                           Tensor* dscores, KinkProbe* probe) {
  std::size_t P = scores.rows(), A = scores.cols();
  double s_pos = scores.at(positive_pair, static_cast<std::size_t>(positive_label));
  if (dscores) *dscores = Tensor::zeros(scores.shape);
  auto dpos = [&]() -> double& {
    return dscores->at(positive_pair, static_cast<std::size_t>(positive_label));
  };

  double total = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    double best = 0.0, second = 0.0;  // track top-two active terms per pair
    std::size_t best_a = A;
    for (std::size_t a = 0; a < A; ++a) {
      if (!admissible(p, a)) continue;
      double term = margin - s_pos + scores.at(p, a);
      if (probe) probe->note(std::abs(term));
      if (term <= 0.0) continue;
      if (reduction == NegReduction::sum) {
        total += term;
        if (dscores) {
          dscores->at(p, a) += 1.0;
          dpos() -= 1.0;
        }
      } else if (term > best) {
        second = best;
        best = term;
        best_a = a;
      } else if (term > second) {
        second = term;
      }
    }
    if (reduction == NegReduction::sum_max && best_a < A) {
      total += best;
      if (probe && second > 0.0) probe->note(best - second);
      if (dscores) {
        dscores->at(p, best_a) += 1.0;
        dpos() -= 1.0;
      }
    }
  }
  return total;
}

}  // namespace

double loss_pair_full(const Tensor& scores, int a_star, std::size_t p_star,
                      const std::vector<int>& overlap, double margin,
                      NegReduction reduction, Tensor* dscores,
                      KinkProbe* probe) {
  std::size_t P = scores.rows(), A = scores.cols();
  if (a_star < 0 || static_cast<std::size_t>(a_star) >= A)
    fail_invalid("pair loss: interaction label out of range");
  if (p_star >= P) fail_invalid("pair loss: positive pair index out of range");
  auto admissible = [&](std::size_t p, std::size_t a) {
    if (in_overlap(overlap, static_cast<int>(a))) return false;
    return !(a == static_cast<std::size_t>(a_star) && p == p_star);
  };
  return ranked_hinge_matrix(scores, a_star, p_star, admissible, margin,
                             reduction, dscores, probe);
}

std::size_t sample_pair_weak(const Tensor& scores, int a_star,
                             bool multinomial, Rng& rng) {
  std::size_t P = scores.rows(), A = scores.cols();
  if (a_star < 0 || static_cast<std::size_t>(a_star) >= A)
    fail_invalid("pair sampling: interaction label out of range");
  std::vector<double> weights(P);
  for (std::size_t p = 0; p < P; ++p)
    weights[p] = scores.at(p, static_cast<std::size_t>(a_star));
  return select_pair(weights, multinomial, rng);
}

double loss_pair_weak(const Tensor& scores, int a_star, std::size_t p_hat,
                      const std::vector<int>& overlap, double margin,
                      NegReduction reduction, Tensor* dscores,
                      KinkProbe* probe) {
  std::size_t P = scores.rows(), A = scores.cols();
  if (a_star < 0 || static_cast<std::size_t>(a_star) >= A)
    fail_invalid("pair loss: interaction label out of range");
  if (p_hat >= P) fail_invalid("pair loss: sampled pair index out of range");
  auto admissible = [&](std::size_t, std::size_t a) {
    if (a == static_cast<std::size_t>(a_star)) return false;  // whole column out
    return !in_overlap(overlap, static_cast<int>(a));
  };
  return ranked_hinge_matrix(scores, a_star, p_hat, admissible, margin,
                             reduction, dscores, probe);
}

double loss_rel_pair_weak(const Tensor& scores, int r_star, std::size_t p_hat,
                          double margin, Tensor* dscores, KinkProbe* probe) {
  std::size_t P = scores.rows(), R = scores.cols();
  if (r_star < 0 || static_cast<std::size_t>(r_star) >= R)
    fail_invalid("relationship pair loss: label out of range");
  if (p_hat >= P)
    fail_invalid("relationship pair loss: pair index out of range");
  auto admissible = [&](std::size_t, std::size_t r) {
    return r != static_cast<std::size_t>(r_star);
  };
  return ranked_hinge_matrix(scores, r_star, p_hat, admissible, margin,
                             NegReduction::sum, dscores, probe);
}

std::size_t select_pair(const std::vector<double>& weights, bool multinomial,
                        Rng& rng) {
  if (weights.empty()) fail_invalid("pair selection: no candidates");
  if (multinomial) return rng.multinomial(weights);
  std::size_t best = 0;
  for (std::size_t p = 1; p < weights.size(); ++p)
    if (weights[p] > weights[best]) best = p;
  return best;
}

}  // namespace lirec
