#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/adam.hpp"
#include "core/serialize.hpp"
#include "model/encoder.hpp"
#include "model/heads.hpp"
#include "util/jsonsafe.hpp"

namespace lirec {

// Training/evaluation wirings. The char regimes score every candidate pair;
// weak supervision is a loss-config flag on top of them.
enum class Regime {
  interaction,            // clip -> interaction
  relationship,           // bundle -> relationship
  joint,                  // bundle-conditioned interactions + relationship
  interaction_char,       // per-pair interaction matrix
  interaction_rel_char,   // per-pair interactions + relationships (3-D scores)
};

Regime regime_from_string(const std::string& s);
std::string regime_str(Regime r);

bool regime_has_interaction_head(Regime r);
bool regime_has_relationship_head(Regime r);
bool regime_uses_bundles(Regime r);

struct ModelConfig {
  Regime regime = Regime::interaction;
  std::size_t num_interactions = 0;
  std::size_t num_relationships = 0;
  std::size_t dim_visual = 0;
  std::size_t dim_dialog = 0;
  std::size_t dim_track = 0;
  std::size_t embed_dim = 64;
  std::size_t encoder_hidden = 128;
  std::size_t head_hidden = 128;
  double dropout = 0.3;
  PoolKind temporal_pool = PoolKind::max;
  PoolKind bundle_pool = PoolKind::max;
  bool use_visual = true;
  bool use_dialog = true;
  bool use_tracks = true;
  bool share_encoders = false;  // one encoder for both branches when joint

  std::size_t fused_dim() const { return 3 * embed_dim; }
  EncoderSettings encoder_settings() const;

  void validate() const;
  // require_dims=false parses the partial form embedded in a train config,
  // where class counts and feature dims come from the dataset later
  static ModelConfig from_json(const Json& j, bool require_dims = true);
  Json to_json() const;
};

struct Model {
  ModelConfig cfg;
  ClipEncoder enc;                      // primary branch
  std::optional<ClipEncoder> enc_rel;   // relationship branch when separate
  std::optional<InteractionHead> ihead;
  std::optional<RelationshipHead> rhead;

  static Model create(const ModelConfig& cfg, Rng& init_rng);

  // the branch feeding the relationship head (== enc when shared/single)
  const ClipEncoder& rel_encoder() const { return enc_rel ? *enc_rel : enc; }
  ClipEncoder& rel_encoder() { return enc_rel ? *enc_rel : enc; }

  // fixed-order named parameter registry; ordering is part of the
  // determinism and checkpoint contract
  std::vector<ParamRef> params();
  void zero_grad();

  std::vector<std::pair<std::string, Tensor>> named_params();
  // strict by-name load; any missing/extra/mis-shaped tensor is an error
  void load_params(const std::vector<std::pair<std::string, Tensor>>& saved);
};

// Sidecar JSON stored next to a checkpoint so evaluation can rebuild the
// exact model (the checkpoint itself carries only tensors and a step).
struct ModelMeta {
  ModelConfig config;
  int epoch = 0;
  std::uint64_t seed = 0;
};

std::filesystem::path meta_path_for(const std::filesystem::path& checkpoint);
void write_model_meta(const std::filesystem::path& checkpoint, const ModelMeta& meta);
ModelMeta read_model_meta(const std::filesystem::path& checkpoint);

}  // namespace lirec
