#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/layers.hpp"
#include "data/dataset.hpp"

namespace lirec {

enum class PoolKind { max, avg, sum };

PoolKind pool_kind_from_string(const std::string& s);
std::string pool_kind_str(PoolKind k);

// column-wise reduction of a (rows, d) block to a d-vector
Tensor pool_temporal(const Tensor& block, PoolKind kind, KinkProbe* probe = nullptr);
// routes dy back onto the rows (max sends it to the first maximal row)
Tensor pool_temporal_backward(const Tensor& block, PoolKind kind, const Tensor& dy);

struct EncoderSettings {
  std::size_t embed_dim = 64;  // per-modality output; the track pair splits it
  std::size_t hidden = 128;
  double dropout = 0.3;  // drop probability inside each encoder MLP
  PoolKind temporal_pool = PoolKind::max;
  bool use_visual = true;
  bool use_dialog = true;
  bool use_tracks = true;
};

// pooled block -> dense -> ReLU -> dropout -> dense -> tanh
struct ModalityEncoder {
  DenseLayer l1;
  DenseLayer l2;

  static ModalityEncoder create(std::size_t in_dim, std::size_t hidden,
                                std::size_t out_dim, Rng& rng);

  struct Cache {
    Tensor x;
    Tensor h_pre;
    Tensor h_drop;
    Tensor y;
    DropoutMask mask;
  };

  // train mode draws one dropout mask from rng; eval mode needs no rng
  Tensor forward(const Tensor& x, double dropout, bool train, Rng* rng,
                 Cache* cache = nullptr, KinkProbe* probe = nullptr) const;
  // accumulates parameter grads, returns dx
  Tensor backward(const Cache& cache, const Tensor& dy);
  void zero_grad();

  std::size_t in_dim() const { return l1.in_dim(); }
  std::size_t out_dim() const { return l2.out_dim(); }
};

// One encoding branch. The track encoder is shared by the actor and
// recipient slots; a modality disabled in settings (or absent from the
// dataset) simply has no encoder.
struct ClipEncoder {
  std::optional<ModalityEncoder> visual;
  std::optional<ModalityEncoder> dialog;
  std::optional<ModalityEncoder> track;

  static ClipEncoder create(std::size_t dv, std::size_t dd, std::size_t dt,
                            const EncoderSettings& s, Rng& rng);
  void zero_grad();
};

// Per-clip forward products shared across pair hypotheses: the visual and
// dialog embeddings do not depend on the pair, and each character's track
// embedding is slot-independent (shared track encoder).
struct ClipParts {
  std::size_t embed_dim = 0;
  bool has_visual = false;
  bool has_dialog = false;
  ModalityEncoder::Cache vis_cache;
  ModalityEncoder::Cache dlg_cache;
  Tensor vis_emb;                    // E; zeros when absent
  Tensor dlg_emb;                    // E; zeros when absent
  std::map<int, ModalityEncoder::Cache> track_cache;
  std::map<int, Tensor> track_emb;   // E/2 per encoded character
};

// Encodes the clip's shared blocks plus the tracks of every character
// referenced by `pairs`. Dropout draws happen in a fixed order: visual,
// dialog, then characters ascending.
ClipParts encode_clip_parts(const ClipEncoder& enc, const EncoderSettings& s,
                            const ClipRecord& clip,
                            const std::vector<PairId>& pairs, bool train,
                            Rng* dropout_rng, KinkProbe* probe = nullptr);

// [visual ‖ dialog ‖ actor track ‖ recipient track], dim 3E; zero blocks
// stand in for missing modalities and unseen pair members
Tensor assemble_embedding(const ClipParts& parts, const PairId& pair);

struct ClipPartsGrad {
  Tensor dvis;
  Tensor ddlg;
  std::map<int, Tensor> dtrack;
};

// splits dphi for one pair hypothesis and adds it onto the shared parts
void add_embedding_grad(ClipPartsGrad& g, const ClipParts& parts,
                        const PairId& pair, const Tensor& dphi);
// pushes the accumulated embedding grads through the encoders (once per
// shared product, however many pairs consumed it)
void encode_clip_parts_backward(ClipEncoder& enc, const ClipParts& parts,
                                const ClipPartsGrad& g);

// single-pair convenience wrapper producing the fused clip embedding
Tensor encode_clip(const ClipEncoder& enc, const EncoderSettings& s,
                   const ClipRecord& clip, const PairId& pair, bool train,
                   Rng* dropout_rng, ClipParts* cache = nullptr,
                   KinkProbe* probe = nullptr);

// stacks clip embeddings as rows and pools them with g
Tensor encode_bundle(const std::vector<Tensor>& clip_embeddings, PoolKind g,
                     KinkProbe* probe = nullptr);
std::vector<Tensor> encode_bundle_backward(
    const std::vector<Tensor>& clip_embeddings, PoolKind g, const Tensor& dy);

}  // namespace lirec
