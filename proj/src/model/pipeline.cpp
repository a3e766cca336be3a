#include "model/pipeline.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace lirec {

namespace {

const LossConfig& loss_cfg(const StepContext& ctx) {
  if (!ctx.loss) fail_invalid("step: missing loss config");
  return *ctx.loss;
}

const InteractionHead& require_ihead(const Model& m) {
  if (!m.ihead) fail_invalid("model regime " + regime_str(m.cfg.regime) +
                             " has no interaction head");
  return *m.ihead;
}

const RelationshipHead& require_rhead(const Model& m) {
  if (!m.rhead) fail_invalid("model regime " + regime_str(m.cfg.regime) +
                             " has no relationship head");
  return *m.rhead;
}

const ClipRecord& clip_at(const MovieDataset& ds, int clip_idx) {
  if (clip_idx < 0 || static_cast<std::size_t>(clip_idx) >= ds.clips.size())
    fail_invalid("step: clip index out of range");
  return ds.clips[static_cast<std::size_t>(clip_idx)];
}

const std::vector<int>& overlap_at(const MovieDataset& ds, int clip_idx) {
  return ds.overlap_sets[static_cast<std::size_t>(clip_idx)];
}

std::size_t find_pair_index(const std::vector<PairId>& pairs, const PairId& p,
                            const char* what) {
  auto it = std::find(pairs.begin(), pairs.end(), p);
  if (it == pairs.end())
    fail_invalid(std::string(what) + ": pair " + pair_str(p) +
                 " is not among the candidates");
  return static_cast<std::size_t>(it - pairs.begin());
}

Tensor matrix_row(const Tensor& m, std::size_t row) {
  Tensor v = Tensor::zeros({m.cols()});
  for (std::size_t c = 0; c < m.cols(); ++c) v.at(c) = m.at(row, c);
  return v;
}

bool row_nonzero(const Tensor& m, std::size_t row) {
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (m.at(row, c) != 0.0) return true;
  return false;
}

// interaction-branch scores for every candidate pair of one clip; caches
// are kept per pair so the backward pass can route each row independently
struct PairMatrixForward {
  ClipParts parts;
  std::vector<Tensor> phis;
  std::vector<InteractionHead::Cache> caches;
  Tensor scores;  // (pairs, A)
};

PairMatrixForward forward_pair_matrix(const Model& m, const ClipRecord& clip,
                                      const std::vector<PairId>& pairs,
                                      const StepContext& ctx) {
  PairMatrixForward f;
  f.parts = encode_clip_parts(m.enc, m.cfg.encoder_settings(), clip, pairs,
                              ctx.train, ctx.dropout_rng, ctx.probe);
  std::size_t A = require_ihead(m).num_classes();
  f.scores = Tensor::zeros({pairs.size(), A});
  f.phis.resize(pairs.size());
  f.caches.resize(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    f.phis[p] = assemble_embedding(f.parts, pairs[p]);
    Tensor s = require_ihead(m).forward(f.phis[p], &f.caches[p], ctx.probe);
    for (std::size_t a = 0; a < A; ++a) f.scores.at(p, a) = s.at(a);
  }
  return f;
}

void backward_pair_matrix(Model& m, PairMatrixForward& f,
                          const std::vector<PairId>& pairs,
                          const Tensor& dscores) {
  ClipPartsGrad grad;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (!row_nonzero(dscores, p)) continue;
    Tensor dphi = m.ihead->backward(f.caches[p], matrix_row(dscores, p));
    add_embedding_grad(grad, f.parts, pairs[p], dphi);
  }
  encode_clip_parts_backward(m.enc, f.parts, grad);
}

// relationship-branch forward for a bundle under every candidate pair:
// clip parts are shared, only the assembly differs per pair
struct RelMatrixForward {
  std::vector<ClipParts> parts;                 // per clip
  std::vector<std::vector<Tensor>> embs;        // [pair][clip]
  std::vector<Tensor> phiV;                     // per pair
  std::vector<RelationshipHead::Cache> caches;  // per pair
  Tensor scores;                                // (pairs, R)
};

RelMatrixForward forward_rel_matrix(const Model& m, const MovieDataset& ds,
                                    const PairBundle& bundle,
                                    const std::vector<PairId>& pairs,
                                    const StepContext& ctx) {
  const ClipEncoder& enc = m.rel_encoder();
  EncoderSettings s = m.cfg.encoder_settings();
  RelMatrixForward f;
  f.parts.reserve(bundle.clips.size());
  for (int gi : bundle.clips)
    f.parts.push_back(encode_clip_parts(enc, s, clip_at(ds, gi), pairs,
                                        ctx.train, ctx.dropout_rng, ctx.probe));
  std::size_t R = require_rhead(m).num_classes();
  f.scores = Tensor::zeros({pairs.size(), R});
  f.embs.resize(pairs.size());
  f.phiV.resize(pairs.size());
  f.caches.resize(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    f.embs[p].reserve(f.parts.size());
    for (const ClipParts& parts : f.parts)
      f.embs[p].push_back(assemble_embedding(parts, pairs[p]));
    f.phiV[p] = encode_bundle(f.embs[p], m.cfg.bundle_pool, ctx.probe);
    Tensor sc = require_rhead(m).forward(f.phiV[p], &f.caches[p]);
    for (std::size_t r = 0; r < R; ++r) f.scores.at(p, r) = sc.at(r);
  }
  return f;
}

void backward_rel_matrix(Model& m, RelMatrixForward& f,
                         const std::vector<PairId>& pairs,
                         const Tensor& dscores) {
  std::vector<ClipPartsGrad> grads(f.parts.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (!row_nonzero(dscores, p)) continue;
    Tensor dphiV = m.rhead->backward(f.caches[p], matrix_row(dscores, p));
    std::vector<Tensor> dembs =
        encode_bundle_backward(f.embs[p], m.cfg.bundle_pool, dphiV);
    for (std::size_t i = 0; i < f.parts.size(); ++i)
      add_embedding_grad(grads[i], f.parts[i], pairs[p], dembs[i]);
  }
  ClipEncoder& enc = m.rel_encoder();
  for (std::size_t i = 0; i < f.parts.size(); ++i)
    encode_clip_parts_backward(enc, f.parts[i], grads[i]);
}

}  // namespace

double step_interaction(Model& m, const MovieDataset& ds, int clip_idx,
                        StepContext& ctx) {
  const LossConfig& lc = loss_cfg(ctx);
  const ClipRecord& clip = clip_at(ds, clip_idx);
  if (!clip.gt_pair) fail_invalid("interaction step: clip " + clip.id +
                                  " has no annotated pair");
  ClipParts parts;
  Tensor phi = encode_clip(m.enc, m.cfg.encoder_settings(), clip, *clip.gt_pair,
                           ctx.train, ctx.dropout_rng, &parts, ctx.probe);
  InteractionHead::Cache hc;
  Tensor scores = require_ihead(m).forward(phi, &hc, ctx.probe);
  Tensor dscores;
  double loss = loss_interaction(scores, clip.interaction,
                                 overlap_at(ds, clip_idx), lc.margin_interaction,
                                 ctx.accumulate ? &dscores : nullptr, ctx.probe);
  if (ctx.accumulate) {
    Tensor dphi = m.ihead->backward(hc, dscores);
    ClipPartsGrad grad;
    add_embedding_grad(grad, parts, *clip.gt_pair, dphi);
    encode_clip_parts_backward(m.enc, parts, grad);
  }
  return loss;
}

double step_relationship(Model& m, const MovieDataset& ds,
                         const PairBundle& bundle, StepContext& ctx) {
  const LossConfig& lc = loss_cfg(ctx);
  if (!bundle.relationship)
    fail_invalid("relationship step: bundle has no relationship label");
  ClipEncoder& enc = m.rel_encoder();
  EncoderSettings s = m.cfg.encoder_settings();

  std::vector<ClipParts> parts;
  std::vector<Tensor> embs;
  for (int gi : bundle.clips) {
    parts.push_back(encode_clip_parts(enc, s, clip_at(ds, gi), {bundle.pair},
                                      ctx.train, ctx.dropout_rng, ctx.probe));
    embs.push_back(assemble_embedding(parts.back(), bundle.pair));
  }
  Tensor phiV = encode_bundle(embs, m.cfg.bundle_pool, ctx.probe);
  RelationshipHead::Cache rc;
  Tensor scores = require_rhead(m).forward(phiV, &rc);
  Tensor dscores;
  double loss = loss_relationship(scores, *bundle.relationship,
                                  lc.margin_relationship,
                                  ctx.accumulate ? &dscores : nullptr, ctx.probe);
  if (ctx.accumulate) {
    Tensor dphiV = m.rhead->backward(rc, dscores);
    std::vector<Tensor> dembs =
        encode_bundle_backward(embs, m.cfg.bundle_pool, dphiV);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      ClipPartsGrad grad;
      add_embedding_grad(grad, parts[i], bundle.pair, dembs[i]);
      encode_clip_parts_backward(enc, parts[i], grad);
    }
  }
  return loss;
}

double step_joint(Model& m, const MovieDataset& ds, const PairBundle& bundle,
                  StepContext& ctx) {
  const LossConfig& lc = loss_cfg(ctx);
  if (!bundle.relationship)
    fail_invalid("joint step: bundle has no relationship label");
  EncoderSettings s = m.cfg.encoder_settings();
  std::size_t V = bundle.clips.size();

  // relationship branch: one embedding per clip, pooled
  ClipEncoder& renc = m.rel_encoder();
  std::vector<ClipParts> parts_rel(V);
  std::vector<Tensor> embs_rel(V);
  for (std::size_t i = 0; i < V; ++i) {
    parts_rel[i] =
        encode_clip_parts(renc, s, clip_at(ds, bundle.clips[i]), {bundle.pair},
                          ctx.train, ctx.dropout_rng, ctx.probe);
    embs_rel[i] = assemble_embedding(parts_rel[i], bundle.pair);
  }
  Tensor phiV = encode_bundle(embs_rel, m.cfg.bundle_pool, ctx.probe);
  RelationshipHead::Cache rc;
  Tensor rel_scores = require_rhead(m).forward(phiV, &rc);
  Tensor drel;
  double rel_loss = loss_relationship(rel_scores, *bundle.relationship,
                                      lc.margin_relationship,
                                      ctx.accumulate ? &drel : nullptr, ctx.probe);

  // interaction branch: the head reads [Φ_int(v) ‖ pooled Φ_rel(V)]
  std::vector<ClipParts> parts_int(V);
  std::vector<InteractionHead::Cache> caches(V);
  std::vector<Tensor> dscores(V);
  std::vector<double> clip_losses(V);
  for (std::size_t i = 0; i < V; ++i) {
    const ClipRecord& clip = clip_at(ds, bundle.clips[i]);
    Tensor phi_int =
        encode_clip(m.enc, s, clip, bundle.pair, ctx.train, ctx.dropout_rng,
                    &parts_int[i], ctx.probe);
    Tensor scores = require_ihead(m).forward(concat(phi_int, phiV), &caches[i], ctx.probe);
    clip_losses[i] = loss_interaction(scores, clip.interaction,
                                      overlap_at(ds, bundle.clips[i]),
                                      lc.margin_interaction,
                                      ctx.accumulate ? &dscores[i] : nullptr,
                                      ctx.probe);
  }
  double total = loss_joint(rel_loss, clip_losses, lc.lambda);

  if (ctx.accumulate) {
    double scale = lc.lambda / static_cast<double>(V);
    Tensor dphiV = m.rhead->backward(rc, drel);
    std::size_t D = m.cfg.fused_dim();
    for (std::size_t i = 0; i < V; ++i) {
      for (double& g : dscores[i].data) g *= scale;
      Tensor djoint = m.ihead->backward(caches[i], dscores[i]);
      Tensor dphi_int, dphiV_part;
      split_grad(djoint, D, &dphi_int, &dphiV_part);
      for (std::size_t c = 0; c < D; ++c) dphiV.at(c) += dphiV_part.at(c);
      ClipPartsGrad grad;
      add_embedding_grad(grad, parts_int[i], bundle.pair, dphi_int);
      encode_clip_parts_backward(m.enc, parts_int[i], grad);
    }
    std::vector<Tensor> dembs =
        encode_bundle_backward(embs_rel, m.cfg.bundle_pool, dphiV);
    for (std::size_t i = 0; i < V; ++i) {
      ClipPartsGrad grad;
      add_embedding_grad(grad, parts_rel[i], bundle.pair, dembs[i]);
      encode_clip_parts_backward(renc, parts_rel[i], grad);
    }
  }
  return total;
}

double step_interaction_char(Model& m, const MovieDataset& ds, int clip_idx,
                             StepContext& ctx) {
  const LossConfig& lc = loss_cfg(ctx);
  const ClipRecord& clip = clip_at(ds, clip_idx);
  const std::vector<PairId>& pairs =
      ds.candidate_pairs[static_cast<std::size_t>(clip_idx)];
  if (pairs.empty())
    fail_invalid("pair step: clip " + clip.id + " has no candidate pairs");

  PairMatrixForward f = forward_pair_matrix(m, clip, pairs, ctx);
  const std::vector<int>& overlap = overlap_at(ds, clip_idx);
  Tensor dscores;
  Tensor* dptr = ctx.accumulate ? &dscores : nullptr;
  double loss = 0.0;
  if (lc.weak) {
    std::size_t p_hat;
    if (ctx.fixed_pair) {
      p_hat = *ctx.fixed_pair;
    } else {
      if (!ctx.sampling_rng) fail_invalid("weak step: missing sampling stream");
      p_hat = sample_pair_weak(f.scores, clip.interaction,
                               lc.multinomial_sampling, *ctx.sampling_rng);
    }
    loss = loss_pair_weak(f.scores, clip.interaction, p_hat, overlap,
                          lc.margin_pair, ctx.reduction, dptr, ctx.probe);
  } else {
    if (!clip.gt_pair)
      fail_invalid("pair step: clip " + clip.id + " has no annotated pair");
    std::size_t p_star = find_pair_index(pairs, *clip.gt_pair, "pair step");
    loss = loss_pair_full(f.scores, clip.interaction, p_star, overlap,
                          lc.margin_pair, ctx.reduction, dptr, ctx.probe);
  }
  if (ctx.accumulate) backward_pair_matrix(m, f, pairs, dscores);
  return loss;
}

double step_interaction_rel_char(Model& m, const MovieDataset& ds,
                                 const PairBundle& bundle, StepContext& ctx) {
  const LossConfig& lc = loss_cfg(ctx);
  if (!bundle.relationship)
    fail_invalid("joint pair step: bundle has no relationship label");
  const Movie& movie = ds.movies[static_cast<std::size_t>(bundle.movie)];
  std::vector<PairId> pairs = movie_pair_set(movie);
  std::size_t V = bundle.clips.size();
  int r_star = *bundle.relationship;

  RelMatrixForward rel = forward_rel_matrix(m, ds, bundle, pairs, ctx);
  std::vector<PairMatrixForward> ints(V);
  for (std::size_t i = 0; i < V; ++i)
    ints[i] = forward_pair_matrix(m, clip_at(ds, bundle.clips[i]), pairs, ctx);

  // one latent pair per bundle: relationship evidence plus the bundle's
  // average interaction evidence at each clip's labeled class
  std::size_t p_pos;
  if (!lc.weak) {
    p_pos = find_pair_index(pairs, bundle.pair, "joint pair step");
  } else if (ctx.fixed_pair) {
    p_pos = *ctx.fixed_pair;
  } else {
    if (!ctx.sampling_rng) fail_invalid("weak step: missing sampling stream");
    std::vector<double> evidence(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      double e = rel.scores.at(p, static_cast<std::size_t>(r_star));
      for (std::size_t i = 0; i < V; ++i) {
        int a_star = clip_at(ds, bundle.clips[i]).interaction;
        e += ints[i].scores.at(p, static_cast<std::size_t>(a_star)) /
             static_cast<double>(V);
      }
      evidence[p] = e;
    }
    p_pos = select_pair(evidence, lc.multinomial_sampling, *ctx.sampling_rng);
  }

  Tensor drel;
  double rel_loss =
      loss_rel_pair_weak(rel.scores, r_star, p_pos, lc.margin_rel_pair,
                         ctx.accumulate ? &drel : nullptr, ctx.probe);
  std::vector<Tensor> dints(V);
  std::vector<double> clip_losses(V);
  for (std::size_t i = 0; i < V; ++i) {
    int gi = bundle.clips[i];
    const ClipRecord& clip = clip_at(ds, gi);
    Tensor* dptr = ctx.accumulate ? &dints[i] : nullptr;
    if (lc.weak) {
      clip_losses[i] =
          loss_pair_weak(ints[i].scores, clip.interaction, p_pos,
                         overlap_at(ds, gi), lc.margin_pair, ctx.reduction,
                         dptr, ctx.probe);
    } else {
      clip_losses[i] =
          loss_pair_full(ints[i].scores, clip.interaction, p_pos,
                         overlap_at(ds, gi), lc.margin_pair, ctx.reduction,
                         dptr, ctx.probe);
    }
  }
  double total = loss_joint(rel_loss, clip_losses, lc.lambda);

  if (ctx.accumulate) {
    backward_rel_matrix(m, rel, pairs, drel);
    double scale = lc.lambda / static_cast<double>(V);
    for (std::size_t i = 0; i < V; ++i) {
      for (double& g : dints[i].data) g *= scale;
      backward_pair_matrix(m, ints[i], pairs, dints[i]);
    }
  }
  return total;
}

Tensor eval_clip_interactions(const Model& m, const MovieDataset& ds,
                              int clip_idx) {
  const ClipRecord& clip = clip_at(ds, clip_idx);
  if (!clip.gt_pair)
    fail_invalid("eval: clip " + clip.id + " has no annotated pair");
  Tensor phi = encode_clip(m.enc, m.cfg.encoder_settings(), clip,
                           *clip.gt_pair, false, nullptr);
  return require_ihead(m).forward(phi);
}

Tensor eval_clip_interactions_joint(const Model& m, const MovieDataset& ds,
                                    const PairBundle& bundle, int clip_idx) {
  EncoderSettings s = m.cfg.encoder_settings();
  std::vector<Tensor> embs;
  for (int gi : bundle.clips)
    embs.push_back(encode_clip(m.rel_encoder(), s, clip_at(ds, gi),
                               bundle.pair, false, nullptr));
  Tensor phiV = encode_bundle(embs, m.cfg.bundle_pool);
  Tensor phi =
      encode_clip(m.enc, s, clip_at(ds, clip_idx), bundle.pair, false, nullptr);
  return require_ihead(m).forward(concat(phi, phiV));
}

Tensor eval_bundle_relationships(const Model& m, const MovieDataset& ds,
                                 const PairBundle& bundle) {
  EncoderSettings s = m.cfg.encoder_settings();
  std::vector<Tensor> embs;
  for (int gi : bundle.clips)
    embs.push_back(encode_clip(m.rel_encoder(), s, clip_at(ds, gi),
                               bundle.pair, false, nullptr));
  return require_rhead(m).forward(encode_bundle(embs, m.cfg.bundle_pool));
}

Tensor eval_pair_matrix(const Model& m, const MovieDataset& ds, int clip_idx,
                        const std::vector<PairId>& pairs) {
  StepContext ctx;
  return forward_pair_matrix(m, clip_at(ds, clip_idx), pairs, ctx).scores;
}

Tensor eval_rel_pair_matrix(const Model& m, const MovieDataset& ds,
                            const PairBundle& bundle,
                            const std::vector<PairId>& pairs) {
  StepContext ctx;
  return forward_rel_matrix(m, ds, bundle, pairs, ctx).scores;
}

ScoreTensor eval_score_tensor(const Model& m, const MovieDataset& ds,
                              const PairBundle& bundle, int clip_idx,
                              const std::vector<PairId>& pairs) {
  Tensor sic = eval_pair_matrix(m, ds, clip_idx, pairs);
  Tensor src = eval_rel_pair_matrix(m, ds, bundle, pairs);
  return combine_score_tensor(sic, src);
}

}  // namespace lirec
