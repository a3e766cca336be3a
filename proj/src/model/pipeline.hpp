#pragma once

#include <optional>

#include "data/dataset.hpp"
#include "model/losses.hpp"
#include "model/model.hpp"

namespace lirec {

// Everything threaded through one sample's forward (and optional backward).
struct StepContext {
  bool train = false;       // dropout active
  bool accumulate = false;  // run backward, accumulate parameter grads
  NegReduction reduction = NegReduction::sum;
  const LossConfig* loss = nullptr;
  Rng* dropout_rng = nullptr;   // required when train and dropout > 0
  Rng* sampling_rng = nullptr;  // required in weak mode
  // pins the latent pair index so finite differences see a fixed objective
  std::optional<std::size_t> fixed_pair;
  KinkProbe* probe = nullptr;
};

// One sample's loss under each regime. Gradients (when ctx.accumulate)
// land in the model's parameter grad buffers.
double step_interaction(Model& m, const MovieDataset& ds, int clip_idx,
                        StepContext& ctx);
double step_relationship(Model& m, const MovieDataset& ds,
                         const PairBundle& bundle, StepContext& ctx);
double step_joint(Model& m, const MovieDataset& ds, const PairBundle& bundle,
                  StepContext& ctx);
double step_interaction_char(Model& m, const MovieDataset& ds, int clip_idx,
                             StepContext& ctx);
double step_interaction_rel_char(Model& m, const MovieDataset& ds,
                                 const PairBundle& bundle, StepContext& ctx);

// Evaluation-mode scoring (no dropout, no gradients).

// clip scores conditioned on its annotated pair; regimes whose interaction
// head reads a single clip embedding
Tensor eval_clip_interactions(const Model& m, const MovieDataset& ds,
                              int clip_idx);
// joint-regime form: the head reads [clip embedding ‖ pooled bundle embedding]
Tensor eval_clip_interactions_joint(const Model& m, const MovieDataset& ds,
                                    const PairBundle& bundle, int clip_idx);
// relationship scores for a bundle under its annotated pair
Tensor eval_bundle_relationships(const Model& m, const MovieDataset& ds,
                                 const PairBundle& bundle);
// (pairs × interactions) score matrix for the given candidates
Tensor eval_pair_matrix(const Model& m, const MovieDataset& ds, int clip_idx,
                        const std::vector<PairId>& pairs);
// (pairs × relationships): the bundle encoded under every candidate pair
Tensor eval_rel_pair_matrix(const Model& m, const MovieDataset& ds,
                            const PairBundle& bundle,
                            const std::vector<PairId>& pairs);
// additive 3-D combination for one clip inside one bundle
ScoreTensor eval_score_tensor(const Model& m, const MovieDataset& ds,
                              const PairBundle& bundle, int clip_idx,
                              const std::vector<PairId>& pairs);

}  // namespace lirec
