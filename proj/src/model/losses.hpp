#pragma once

#include <string>
#include <vector>

#include "core/layers.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "util/jsonsafe.hpp"

namespace lirec {

// How hinge terms over the candidate-pair axis are reduced: plain sum, or
// one hard negative per pair (each pair contributes only its maximal term).
enum class NegReduction { sum, sum_max };

NegReduction reduction_from_string(const std::string& s);
std::string reduction_str(NegReduction r);

struct LossConfig {
  double margin_interaction = 0.2;
  double margin_relationship = 0.2;
  double margin_pair = 0.2;
  double margin_rel_pair = 0.2;
  double lambda = 1.5;
  NegReduction reduction = NegReduction::sum_max;
  int burn_in_epochs = 20;  // epochs trained with plain sum before switching
  bool weak = false;        // latent character pairs instead of GT
  bool multinomial_sampling = true;  // false: greedy argmax selection

  // reduction actually used at a given epoch (sum during burn-in)
  NegReduction effective_reduction(int epoch) const {
    if (reduction == NegReduction::sum_max && epoch < burn_in_epochs)
      return NegReduction::sum;
    return reduction;
  }

  void validate() const;
  static LossConfig from_json(const Json& j);
  Json to_json() const;
};

// Margin-ranking loss over interaction scores: negatives are every label
// outside overlap ∪ {a_star}. overlap must be sorted ascending (dataset
// overlap sets already are). dscores, when given, is overwritten with the
// gradient.
double loss_interaction(const Tensor& scores, int a_star,
                        const std::vector<int>& overlap, double margin,
                        Tensor* dscores = nullptr, KinkProbe* probe = nullptr);

// Same ranking form over relationship scores; no masking.
double loss_relationship(const Tensor& scores, int r_star, double margin,
                         Tensor* dscores = nullptr, KinkProbe* probe = nullptr);

// Bundle combination: rel_loss + (lambda / |V|) * sum of clip losses.
double loss_joint(double rel_loss, const std::vector<double>& clip_losses,
                  double lambda);

// Pair-supervised ranking over a (pairs, interactions) score matrix.
// Negatives: every cell whose label is outside overlap, excluding only the
// single positive cell (a_star, p_star) — cells sharing the positive label
// under other pairs do count as negatives.
double loss_pair_full(const Tensor& scores, int a_star, std::size_t p_star,
                      const std::vector<int>& overlap, double margin,
                      NegReduction reduction, Tensor* dscores = nullptr,
                      KinkProbe* probe = nullptr);

// Draws the latent pair for column a_star, proportional to its scores
// (multinomial) or greedy argmax.
std::size_t sample_pair_weak(const Tensor& scores, int a_star,
                             bool multinomial, Rng& rng);

// Weak variant: the positive is (a_star, p_hat) and the entire a_star
// column is discarded from the negatives; all pairs of the remaining
// unmasked columns count.
double loss_pair_weak(const Tensor& scores, int a_star, std::size_t p_hat,
                      const std::vector<int>& overlap, double margin,
                      NegReduction reduction, Tensor* dscores = nullptr,
                      KinkProbe* probe = nullptr);

// Ranking over a (pairs, relationships) matrix with latent pair p_hat: the
// positive is (p_hat, r_star); negatives are all pairs of every other
// relationship (the r_star column is discarded entirely).
double loss_rel_pair_weak(const Tensor& scores, int r_star, std::size_t p_hat,
                          double margin, Tensor* dscores = nullptr,
                          KinkProbe* probe = nullptr);

// Selection weights combining relationship and interaction evidence for a
// bundle's latent pair; the caller normalizes nothing, weights are already
// positive.
std::size_t select_pair(const std::vector<double>& weights, bool multinomial,
                        Rng& rng);

}  // namespace lirec
