#include "model/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.hpp"

namespace lirec {

PoolKind pool_kind_from_string(const std::string& s) {
  if (s == "max") return PoolKind::max;
  if (s == "avg") return PoolKind::avg;
  if (s == "sum") return PoolKind::sum;
  fail_invalid("unknown pooling kind: " + s + " (expected max, avg or sum)");
}

std::string pool_kind_str(PoolKind k) {
  switch (k) {
    case PoolKind::max: return "max";
    case PoolKind::avg: return "avg";
    case PoolKind::sum: return "sum";
  }
  return "?";
}

Tensor pool_temporal(const Tensor& block, PoolKind kind, KinkProbe* probe) {
  std::size_t n = block.rows(), d = block.cols();
  if (n == 0) fail_invalid("pool_temporal: empty block");
  Tensor out = Tensor::zeros({d});
  switch (kind) {
    case PoolKind::max:
      for (std::size_t c = 0; c < d; ++c) {
        double best = block.at(0, c), second = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 1; r < n; ++r) {
          double v = block.at(r, c);
          if (v > best) {
            second = best;
            best = v;
          } else if (v > second) {
            second = v;
          }
        }
        out.at(c) = best;
        if (probe && n > 1) probe->note(best - second);
      }
      break;
    case PoolKind::avg:
    case PoolKind::sum:
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) out.at(c) += block.at(r, c);
      if (kind == PoolKind::avg)
        for (std::size_t c = 0; c < d; ++c) out.at(c) /= static_cast<double>(n);
      break;
  }
  return out;
}

Tensor pool_temporal_backward(const Tensor& block, PoolKind kind, const Tensor& dy) {
  std::size_t n = block.rows(), d = block.cols();
  check_shape(dy, {d}, "pool_temporal_backward dy");
  Tensor dx = Tensor::zeros({n, d});
  switch (kind) {
    case PoolKind::max:
      for (std::size_t c = 0; c < d; ++c) {
        std::size_t arg = 0;
        for (std::size_t r = 1; r < n; ++r)
          if (block.at(r, c) > block.at(arg, c)) arg = r;
        dx.at(arg, c) = dy.at(c);
      }
      break;
    case PoolKind::avg:
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c)
          dx.at(r, c) = dy.at(c) / static_cast<double>(n);
      break;
    case PoolKind::sum:
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) dx.at(r, c) = dy.at(c);
      break;
  }
  return dx;
}

ModalityEncoder ModalityEncoder::create(std::size_t in_dim, std::size_t hidden,
                                        std::size_t out_dim, Rng& rng) {
  ModalityEncoder e;
  e.l1 = DenseLayer::create(hidden, in_dim, rng);
  e.l2 = DenseLayer::create(out_dim, hidden, rng);
  return e;
}

Tensor ModalityEncoder::forward(const Tensor& x, double dropout, bool train,
                                Rng* rng, Cache* cache, KinkProbe* probe) const {
  check_shape(x, {in_dim()}, "encoder input");
  Tensor h_pre = l1.forward(x);
  if (probe)
    for (double v : h_pre.data) probe->note(std::abs(v));
  Tensor h = relu(h_pre);
  double p_keep = 1.0 - dropout;
  DropoutMask mask;  // identity unless train mode draws one
  if (train && p_keep < 1.0) {
    if (!rng) fail_invalid("encoder: train-mode dropout needs an rng stream");
    mask = make_dropout_mask(h.size(), p_keep, true, *rng);
  }
  Tensor h_drop = dropout_forward(h, mask);
  Tensor y = tanh_map(l2.forward(h_drop));
  if (cache) {
    cache->x = x;
    cache->h_pre = std::move(h_pre);
    cache->h_drop = h_drop;
    cache->y = y;
    cache->mask = std::move(mask);
  }
  return y;
}

Tensor ModalityEncoder::backward(const Cache& cache, const Tensor& dy) {
  Tensor d2 = tanh_backward(cache.y, dy);
  Tensor dh_drop = l2.backward(cache.h_drop, d2);
  Tensor dh = dropout_backward(dh_drop, cache.mask);
  Tensor dh_pre = relu_backward(cache.h_pre, dh);
  return l1.backward(cache.x, dh_pre);
}

void ModalityEncoder::zero_grad() {
  l1.zero_grad();
  l2.zero_grad();
}

ClipEncoder ClipEncoder::create(std::size_t dv, std::size_t dd, std::size_t dt,
                                const EncoderSettings& s, Rng& rng) {
  if (s.embed_dim < 2 || s.embed_dim % 2 != 0)
    fail_invalid("encoder settings: embed_dim must be even and >= 2");
  if (s.hidden < 1) fail_invalid("encoder settings: hidden must be >= 1");
  if (s.dropout < 0.0 || s.dropout >= 1.0)
    fail_invalid("encoder settings: dropout must be in [0, 1)");
  ClipEncoder enc;
  if (s.use_visual && dv > 0)
    enc.visual = ModalityEncoder::create(dv, s.hidden, s.embed_dim, rng);
  if (s.use_dialog && dd > 0)
    enc.dialog = ModalityEncoder::create(dd, s.hidden, s.embed_dim, rng);
  if (s.use_tracks && dt > 0)
    enc.track = ModalityEncoder::create(dt, s.hidden, s.embed_dim / 2, rng);
  return enc;
}

void ClipEncoder::zero_grad() {
  if (visual) visual->zero_grad();
  if (dialog) dialog->zero_grad();
  if (track) track->zero_grad();
}

ClipParts encode_clip_parts(const ClipEncoder& enc, const EncoderSettings& s,
                            const ClipRecord& clip,
                            const std::vector<PairId>& pairs, bool train,
                            Rng* dropout_rng, KinkProbe* probe) {
  ClipParts parts;
  parts.embed_dim = s.embed_dim;
  parts.vis_emb = Tensor::zeros({s.embed_dim});
  parts.dlg_emb = Tensor::zeros({s.embed_dim});

  if (enc.visual && clip.visual.size() > 0) {
    Tensor pooled = pool_temporal(clip.visual, s.temporal_pool, probe);
    parts.vis_emb = enc.visual->forward(pooled, s.dropout, train, dropout_rng,
                                        &parts.vis_cache, probe);
    parts.has_visual = true;
  }
  if (enc.dialog && clip.dialog) {
    Tensor pooled = pool_temporal(*clip.dialog, s.temporal_pool, probe);
    parts.dlg_emb = enc.dialog->forward(pooled, s.dropout, train, dropout_rng,
                                        &parts.dlg_cache, probe);
    parts.has_dialog = true;
  }
  if (enc.track) {
    std::set<int> wanted;
    for (const PairId& p : pairs) {
      if (clip.has_track(p.actor)) wanted.insert(p.actor);
      if (!p.is_singleton() && clip.has_track(p.recipient)) wanted.insert(p.recipient);
    }
    for (int c : wanted) {
      Tensor pooled = pool_temporal(clip.tracks.at(c), s.temporal_pool, probe);
      ModalityEncoder::Cache cache;
      parts.track_emb[c] =
          enc.track->forward(pooled, s.dropout, train, dropout_rng, &cache, probe);
      parts.track_cache[c] = std::move(cache);
    }
  }
  return parts;
}

Tensor assemble_embedding(const ClipParts& parts, const PairId& pair) {
  std::size_t E = parts.embed_dim, half = E / 2;
  Tensor phi = Tensor::zeros({3 * E});
  for (std::size_t i = 0; i < E; ++i) phi.at(i) = parts.vis_emb.at(i);
  for (std::size_t i = 0; i < E; ++i) phi.at(E + i) = parts.dlg_emb.at(i);
  auto it = parts.track_emb.find(pair.actor);
  if (it != parts.track_emb.end())
    for (std::size_t i = 0; i < half; ++i) phi.at(2 * E + i) = it->second.at(i);
  if (!pair.is_singleton()) {
    it = parts.track_emb.find(pair.recipient);
    if (it != parts.track_emb.end())
      for (std::size_t i = 0; i < half; ++i)
        phi.at(2 * E + half + i) = it->second.at(i);
  }
  return phi;
}

void add_embedding_grad(ClipPartsGrad& g, const ClipParts& parts,
                        const PairId& pair, const Tensor& dphi) {
  std::size_t E = parts.embed_dim, half = E / 2;
  check_shape(dphi, {3 * E}, "embedding grad");
  if (g.dvis.size() == 0) {
    g.dvis = Tensor::zeros({E});
    g.ddlg = Tensor::zeros({E});
  }
  for (std::size_t i = 0; i < E; ++i) g.dvis.at(i) += dphi.at(i);
  for (std::size_t i = 0; i < E; ++i) g.ddlg.at(i) += dphi.at(E + i);
  auto add_track = [&](int character, std::size_t offset) {
    if (!parts.track_emb.count(character)) return;
    Tensor& d = g.dtrack.try_emplace(character, Tensor::zeros({half})).first->second;
    for (std::size_t i = 0; i < half; ++i) d.at(i) += dphi.at(offset + i);
  };
  add_track(pair.actor, 2 * E);
  if (!pair.is_singleton()) add_track(pair.recipient, 2 * E + half);
}

void encode_clip_parts_backward(ClipEncoder& enc, const ClipParts& parts,
                                const ClipPartsGrad& g) {
  if (parts.has_visual && g.dvis.size() > 0)
    enc.visual->backward(parts.vis_cache, g.dvis);
  if (parts.has_dialog && g.ddlg.size() > 0)
    enc.dialog->backward(parts.dlg_cache, g.ddlg);
  for (const auto& [character, d] : g.dtrack)
    enc.track->backward(parts.track_cache.at(character), d);
}

Tensor encode_clip(const ClipEncoder& enc, const EncoderSettings& s,
                   const ClipRecord& clip, const PairId& pair, bool train,
                   Rng* dropout_rng, ClipParts* cache, KinkProbe* probe) {
  ClipParts local;
  ClipParts& parts = cache ? *cache : local;
  parts = encode_clip_parts(enc, s, clip, {pair}, train, dropout_rng, probe);
  return assemble_embedding(parts, pair);
}

Tensor encode_bundle(const std::vector<Tensor>& clip_embeddings, PoolKind g,
                     KinkProbe* probe) {
  if (clip_embeddings.empty()) fail_invalid("encode_bundle: empty bundle");
  std::size_t d = clip_embeddings[0].size();
  Tensor stack = Tensor::zeros({clip_embeddings.size(), d});
  for (std::size_t r = 0; r < clip_embeddings.size(); ++r) {
    check_shape(clip_embeddings[r], {d}, "bundle embedding");
    for (std::size_t c = 0; c < d; ++c) stack.at(r, c) = clip_embeddings[r].at(c);
  }
  return pool_temporal(stack, g, probe);
}

std::vector<Tensor> encode_bundle_backward(
    const std::vector<Tensor>& clip_embeddings, PoolKind g, const Tensor& dy) {
  std::size_t d = clip_embeddings[0].size();
  Tensor stack = Tensor::zeros({clip_embeddings.size(), d});
  for (std::size_t r = 0; r < clip_embeddings.size(); ++r)
    for (std::size_t c = 0; c < d; ++c) stack.at(r, c) = clip_embeddings[r].at(c);
  Tensor dstack = pool_temporal_backward(stack, g, dy);
  std::vector<Tensor> out(clip_embeddings.size());
  for (std::size_t r = 0; r < clip_embeddings.size(); ++r) {
    out[r] = Tensor::zeros({d});
    for (std::size_t c = 0; c < d; ++c) out[r].at(c) = dstack.at(r, c);
  }
  return out;
}

}  // namespace lirec
