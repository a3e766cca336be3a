#include "model/model.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace lirec {

Regime regime_from_string(const std::string& s) {
  if (s == "interaction") return Regime::interaction;
  if (s == "relationship") return Regime::relationship;
  if (s == "joint") return Regime::joint;
  if (s == "interaction_char") return Regime::interaction_char;
  if (s == "interaction_rel_char") return Regime::interaction_rel_char;
  fail_invalid("unknown regime: " + s +
               " (expected interaction, relationship, joint, interaction_char"
               " or interaction_rel_char)");
}

std::string regime_str(Regime r) {
  switch (r) {
    case Regime::interaction: return "interaction";
    case Regime::relationship: return "relationship";
    case Regime::joint: return "joint";
    case Regime::interaction_char: return "interaction_char";
    case Regime::interaction_rel_char: return "interaction_rel_char";
  }
  return "?";
}

bool regime_has_interaction_head(Regime r) { return r != Regime::relationship; }

bool regime_has_relationship_head(Regime r) {
  return r == Regime::relationship || r == Regime::joint ||
         r == Regime::interaction_rel_char;
}

bool regime_uses_bundles(Regime r) {
  return r == Regime::relationship || r == Regime::joint ||
         r == Regime::interaction_rel_char;
}

EncoderSettings ModelConfig::encoder_settings() const {
  EncoderSettings s;
  s.embed_dim = embed_dim;
  s.hidden = encoder_hidden;
  s.dropout = dropout;
  s.temporal_pool = temporal_pool;
  s.use_visual = use_visual;
  s.use_dialog = use_dialog;
  s.use_tracks = use_tracks;
  return s;
}

void ModelConfig::validate() const {
  if (num_interactions < 1) fail_invalid("model config: num_interactions must be >= 1");
  if (regime_has_relationship_head(regime) && num_relationships < 1)
    fail_invalid("model config: num_relationships must be >= 1 for regime " +
                 regime_str(regime));
  if (embed_dim < 2 || embed_dim % 2 != 0)
    fail_invalid("model config: embed_dim must be even and >= 2");
  if (encoder_hidden < 1 || head_hidden < 1)
    fail_invalid("model config: hidden dims must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0)
    fail_invalid("model config: dropout must be in [0, 1)");
  bool any = (use_visual && dim_visual > 0) || (use_dialog && dim_dialog > 0) ||
             (use_tracks && dim_track > 0);
  if (!any) fail_invalid("model config: every modality is disabled or absent");
}

ModelConfig ModelConfig::from_json(const Json& j, bool require_dims) {
  JsonReader r(j, "model config");
  ModelConfig c;
  if (r.has("regime")) c.regime = regime_from_string(r.require<std::string>("regime"));
  c.num_interactions = r.get<std::size_t>("num_interactions", c.num_interactions);
  c.num_relationships = r.get<std::size_t>("num_relationships", c.num_relationships);
  c.dim_visual = r.get<std::size_t>("dim_visual", c.dim_visual);
  c.dim_dialog = r.get<std::size_t>("dim_dialog", c.dim_dialog);
  c.dim_track = r.get<std::size_t>("dim_track", c.dim_track);
  c.embed_dim = r.get<std::size_t>("embed_dim", c.embed_dim);
  c.encoder_hidden = r.get<std::size_t>("encoder_hidden", c.encoder_hidden);
  c.head_hidden = r.get<std::size_t>("head_hidden", c.head_hidden);
  c.dropout = r.get<double>("dropout", c.dropout);
  if (r.has("temporal_pool"))
    c.temporal_pool = pool_kind_from_string(r.require<std::string>("temporal_pool"));
  if (r.has("bundle_pool"))
    c.bundle_pool = pool_kind_from_string(r.require<std::string>("bundle_pool"));
  c.use_visual = r.get<bool>("use_visual", c.use_visual);
  c.use_dialog = r.get<bool>("use_dialog", c.use_dialog);
  c.use_tracks = r.get<bool>("use_tracks", c.use_tracks);
  c.share_encoders = r.get<bool>("share_encoders", c.share_encoders);
  r.finish();
  if (require_dims) c.validate();
  return c;
}

Json ModelConfig::to_json() const {
  Json j;
  j["regime"] = regime_str(regime);
  j["num_interactions"] = num_interactions;
  j["num_relationships"] = num_relationships;
  j["dim_visual"] = dim_visual;
  j["dim_dialog"] = dim_dialog;
  j["dim_track"] = dim_track;
  j["embed_dim"] = embed_dim;
  j["encoder_hidden"] = encoder_hidden;
  j["head_hidden"] = head_hidden;
  j["dropout"] = dropout;
  j["temporal_pool"] = pool_kind_str(temporal_pool);
  j["bundle_pool"] = pool_kind_str(bundle_pool);
  j["use_visual"] = use_visual;
  j["use_dialog"] = use_dialog;
  j["use_tracks"] = use_tracks;
  j["share_encoders"] = share_encoders;
  return j;
}

Model Model::create(const ModelConfig& cfg, Rng& init_rng) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  EncoderSettings s = cfg.encoder_settings();
  m.enc = ClipEncoder::create(cfg.dim_visual, cfg.dim_dialog, cfg.dim_track, s,
                              init_rng);
  bool two_branches = (cfg.regime == Regime::joint ||
                       cfg.regime == Regime::interaction_rel_char) &&
                      !cfg.share_encoders;
  if (two_branches)
    m.enc_rel = ClipEncoder::create(cfg.dim_visual, cfg.dim_dialog,
                                    cfg.dim_track, s, init_rng);
  if (regime_has_interaction_head(cfg.regime)) {
    std::size_t in_dim =
        cfg.regime == Regime::joint ? 2 * cfg.fused_dim() : cfg.fused_dim();
    m.ihead = InteractionHead::create(cfg.num_interactions, in_dim,
                                      cfg.head_hidden, init_rng);
  }
  if (regime_has_relationship_head(cfg.regime))
    m.rhead = RelationshipHead::create(cfg.num_relationships, cfg.fused_dim(),
                                       init_rng);
  return m;
}

namespace {

void add_encoder_params(std::vector<ParamRef>& out, const std::string& prefix,
                        ClipEncoder& enc) {
  auto add_mlp = [&](const std::string& name, std::optional<ModalityEncoder>& e) {
    if (!e) return;
    out.push_back({prefix + "." + name + ".l1.weight", &e->l1.weight, &e->l1.grad_weight});
    out.push_back({prefix + "." + name + ".l1.bias", &e->l1.bias, &e->l1.grad_bias});
    out.push_back({prefix + "." + name + ".l2.weight", &e->l2.weight, &e->l2.grad_weight});
    out.push_back({prefix + "." + name + ".l2.bias", &e->l2.bias, &e->l2.grad_bias});
  };
  add_mlp("visual", enc.visual);
  add_mlp("dialog", enc.dialog);
  add_mlp("track", enc.track);
}

}  // namespace

std::vector<ParamRef> Model::params() {
  std::vector<ParamRef> out;
  add_encoder_params(out, "enc", enc);
  if (enc_rel) add_encoder_params(out, "enc_rel", *enc_rel);
  if (ihead) {
    out.push_back({"ihead.l1.weight", &ihead->l1.weight, &ihead->l1.grad_weight});
    out.push_back({"ihead.l1.bias", &ihead->l1.bias, &ihead->l1.grad_bias});
    out.push_back({"ihead.l2.weight", &ihead->l2.weight, &ihead->l2.grad_weight});
    out.push_back({"ihead.l2.bias", &ihead->l2.bias, &ihead->l2.grad_bias});
  }
  if (rhead) {
    out.push_back({"rhead.weight", &rhead->lin.weight, &rhead->lin.grad_weight});
    out.push_back({"rhead.bias", &rhead->lin.bias, &rhead->lin.grad_bias});
  }
  return out;
}

void Model::zero_grad() {
  enc.zero_grad();
  if (enc_rel) enc_rel->zero_grad();
  if (ihead) ihead->zero_grad();
  if (rhead) rhead->zero_grad();
}

std::vector<std::pair<std::string, Tensor>> Model::named_params() {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const ParamRef& p : params()) out.emplace_back(p.name, *p.value);
  return out;
}

void Model::load_params(const std::vector<std::pair<std::string, Tensor>>& saved) {
  std::vector<ParamRef> refs = params();
  if (saved.size() != refs.size())
    fail_io("checkpoint holds " + std::to_string(saved.size()) +
            " parameters, model expects " + std::to_string(refs.size()));
  std::set<std::string> seen;
  for (const auto& [name, tensor] : saved) {
    bool found = false;
    for (ParamRef& ref : refs) {
      if (ref.name != name) continue;
      if (!ref.value->same_shape(tensor))
        fail_io("checkpoint parameter " + name + " has shape " +
                shape_str(tensor.shape) + ", model expects " +
                shape_str(ref.value->shape));
      *ref.value = tensor;
      found = true;
      break;
    }
    if (!found) fail_io("checkpoint parameter " + name + " unknown to this model");
    if (!seen.insert(name).second) fail_io("checkpoint repeats parameter " + name);
  }
}

std::filesystem::path meta_path_for(const std::filesystem::path& checkpoint) {
  return checkpoint.string() + ".meta.json";
}

void write_model_meta(const std::filesystem::path& checkpoint, const ModelMeta& meta) {
  Json j;
  j["schema_version"] = 1;
  j["model"] = meta.config.to_json();
  j["epoch"] = meta.epoch;
  j["seed"] = meta.seed;
  std::filesystem::path path = meta_path_for(checkpoint);
  std::ofstream os(path);
  if (!os) fail_io("cannot write checkpoint metadata: " + path.string());
  os << j.dump(2) << "\n";
  if (!os) fail_io("write failed for checkpoint metadata: " + path.string());
}

ModelMeta read_model_meta(const std::filesystem::path& checkpoint) {
  std::filesystem::path path = meta_path_for(checkpoint);
  std::ifstream is(path);
  if (!is) fail_io("missing checkpoint metadata: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  Json j = parse_json(buf.str(), path.string());
  JsonReader r(j, "checkpoint metadata");
  int version = r.get<int>("schema_version", 1);
  if (version != 1) fail_io("checkpoint metadata: unsupported schema_version");
  ModelMeta meta;
  meta.config = ModelConfig::from_json(r.raw("model"));
  meta.epoch = r.get<int>("epoch", 0);
  meta.seed = r.get<std::uint64_t>("seed", 0);
  r.finish();
  return meta;
}

}  // namespace lirec
