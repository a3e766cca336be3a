#include "train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "core/error.hpp"
#include "model/pipeline.hpp"

namespace lirec {

namespace {

AdamConfig adam_from_json(const Json& j) {
  JsonReader r(j, "optimizer config");
  AdamConfig c;
  c.lr = r.get<double>("lr", c.lr);
  c.beta1 = r.get<double>("beta1", c.beta1);
  c.beta2 = r.get<double>("beta2", c.beta2);
  c.eps = r.get<double>("eps", c.eps);
  r.finish();
  return c;
}

Json adam_to_json(const AdamConfig& c) {
  Json j;
  j["lr"] = c.lr;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  return j;
}

// Clip ids a clip-level regime can train on.
std::vector<int> clip_samples(const MovieDataset& ds, Regime regime, bool weak) {
  std::vector<int> out;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    const ClipRecord& c = ds.clips[i];
    if (c.interaction < 0) continue;
    if (regime == Regime::interaction) {
      if (!c.gt_pair) continue;
    } else {
      if (ds.candidate_pairs[i].empty()) continue;
      if (!weak && !c.gt_pair) continue;
    }
    out.push_back(static_cast<int>(i));
  }
  return out;
}

// Segment eligibility for bundle-level regimes; fixed across epochs so the
// per-epoch bundle count only varies with clip membership, never labels.
std::vector<char> trainable_segments(const MovieDataset& ds, Regime regime) {
  std::vector<char> ok(ds.segments.size(), 0);
  for (std::size_t s = 0; s < ds.segments.size(); ++s) {
    const PairSegment& seg = ds.segments[s];
    if (!seg.relationship) continue;
    bool good = true;
    if (regime != Regime::relationship) {
      for (int ci : seg.clips)
        if (ds.clips[ci].interaction < 0) { good = false; break; }
    }
    if (good) ok[s] = 1;
  }
  return ok;
}

double run_clip_sample(Model& m, const MovieDataset& ds, int clip,
                       StepContext& ctx) {
  if (m.cfg.regime == Regime::interaction)
    return step_interaction(m, ds, clip, ctx);
  return step_interaction_char(m, ds, clip, ctx);
}

double run_bundle_sample(Model& m, const MovieDataset& ds,
                         const PairBundle& b, StepContext& ctx) {
  switch (m.cfg.regime) {
    case Regime::relationship: return step_relationship(m, ds, b, ctx);
    case Regime::joint: return step_joint(m, ds, b, ctx);
    default: return step_interaction_rel_char(m, ds, b, ctx);
  }
}

void scale_grads(std::vector<ParamRef>& params, double factor) {
  for (ParamRef& p : params)
    for (double& g : p.grad->data) g *= factor;
}

void save_checkpoint(const std::filesystem::path& path, Model& m, Adam& adam,
                     int epochs_done, std::uint64_t seed) {
  io::Checkpoint ck;
  ck.params = m.named_params();
  std::vector<ParamRef> refs = m.params();
  for (const auto& [name, t] : adam.named_state(refs))
    ck.opt_state.emplace_back(name, *t);
  ck.step = adam.step_count();
  io::write_checkpoint(path, ck);
  ModelMeta meta;
  meta.config = m.cfg;
  meta.epoch = epochs_done;
  meta.seed = seed;
  write_model_meta(path, meta);
}

TrainResult run_epochs(Model& m, Adam& adam, const TrainConfig& cfg,
                       std::uint64_t seed, int start_epoch,
                       const MovieDataset& ds,
                       const std::filesystem::path& out_dir, bool fresh_log) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  Rng root(seed);
  Rng order_root = root.fork("order");
  Rng dropout_root = root.fork("dropout");
  Rng sampling_root = root.fork("sampling");
  Rng bundles_root = root.fork("bundles");

  bool bundles = regime_uses_bundles(m.cfg.regime);
  std::vector<int> clips;
  std::vector<char> seg_ok;
  if (bundles)
    seg_ok = trainable_segments(ds, m.cfg.regime);
  else
    clips = clip_samples(ds, m.cfg.regime, cfg.loss.weak);

  std::ofstream log_file(out_dir / "train_log.jsonl",
                         fresh_log ? std::ios::trunc : std::ios::app);
  if (!log_file) fail_io("cannot open train log in " + out_dir.string());

  std::vector<ParamRef> params = m.params();
  TrainResult result;

  for (int e = start_epoch; e < cfg.epochs; ++e) {
    auto t0 = std::chrono::steady_clock::now();
    NegReduction red = cfg.loss.effective_reduction(e);

    std::vector<int> clip_order;
    std::vector<PairBundle> bundle_order;
    std::size_t n = 0;
    Rng order = order_root.fork(static_cast<std::uint64_t>(e));
    if (bundles) {
      Rng draw = bundles_root.fork(static_cast<std::uint64_t>(e));
      for (PairBundle& b :
           build_bundles(ds, cfg.bundle_cap, BundleMode::train_random, draw)) {
        if (seg_ok[static_cast<std::size_t>(b.segment)])
          bundle_order.push_back(std::move(b));
      }
      order.shuffle(bundle_order);
      n = bundle_order.size();
    } else {
      clip_order = clips;
      order.shuffle(clip_order);
      n = clip_order.size();
    }
    if (n == 0)
      fail_invalid("training: no usable samples for regime " +
                   regime_str(m.cfg.regime));

    Rng dropout_epoch = dropout_root.fork(static_cast<std::uint64_t>(e));
    Rng sampling_epoch = sampling_root.fork(static_cast<std::uint64_t>(e));

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      std::size_t stop = std::min(n, start + cfg.batch_size);
      m.zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        Rng drng = dropout_epoch.fork(i);
        Rng srng = sampling_epoch.fork(i);
        StepContext ctx;
        ctx.train = true;
        ctx.accumulate = true;
        ctx.reduction = red;
        ctx.loss = &cfg.loss;
        ctx.dropout_rng = &drng;
        ctx.sampling_rng = &srng;
        double loss = bundles
                          ? run_bundle_sample(m, ds, bundle_order[i], ctx)
                          : run_clip_sample(m, ds, clip_order[i], ctx);
        if (!std::isfinite(loss)) {
          std::string what =
              bundles ? "pair " + pair_str(bundle_order[i].pair)
                      : "clip " + ds.clips[clip_order[i]].id;
          fail_runtime("training: non-finite loss at epoch " +
                       std::to_string(e) + ", " + what);
        }
        loss_sum += loss;
      }
      scale_grads(params, 1.0 / static_cast<double>(stop - start));
      adam.step(params);
    }

    auto t1 = std::chrono::steady_clock::now();
    EpochLog entry;
    entry.epoch = e;
    entry.loss = loss_sum / static_cast<double>(n);
    entry.samples = n;
    entry.reduction = reduction_str(red);
    entry.wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    Json line;
    line["epoch"] = entry.epoch;
    line["loss"] = entry.loss;
    line["samples"] = entry.samples;
    line["reduction"] = entry.reduction;
    line["wall_ms"] = entry.wall_ms;
    log_file << line.dump() << "\n";
    log_file.flush();
    result.log.push_back(std::move(entry));

    int done = e + 1;
    if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 &&
        done != cfg.epochs) {
      save_checkpoint(
          out_dir / ("checkpoint_epoch_" + std::to_string(done) + ".lirc"), m,
          adam, done, seed);
    }
  }

  int completed = std::max(start_epoch, cfg.epochs);
  result.checkpoint = out_dir / "checkpoint_final.lirc";
  save_checkpoint(result.checkpoint, m, adam, completed, seed);
  result.epochs_run = completed - start_epoch;
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) fail_invalid("train config: epochs must be >= 0");
  if (batch_size == 0) fail_invalid("train config: batch_size must be >= 1");
  if (bundle_cap == 0) fail_invalid("train config: bundle_cap must be >= 1");
  if (checkpoint_every < 0)
    fail_invalid("train config: checkpoint_every must be >= 0");
  if (!(optim.lr > 0.0)) fail_invalid("train config: lr must be positive");
  if (optim.beta1 < 0.0 || optim.beta1 >= 1.0 || optim.beta2 < 0.0 ||
      optim.beta2 >= 1.0)
    fail_invalid("train config: adam betas must lie in [0, 1)");
  if (!(optim.eps > 0.0)) fail_invalid("train config: adam eps must be positive");
  loss.validate();
  if (loss.weak && model.regime != Regime::interaction_char &&
      model.regime != Regime::interaction_rel_char)
    fail_invalid(
        "train config: weak supervision applies to the character-pair "
        "regimes only");
}

TrainConfig TrainConfig::from_json(const Json& j) {
  JsonReader r(j, "train config");
  int sv = r.get<int>("schema_version", 1);
  if (sv != 1) fail_invalid("train config: unsupported schema_version");
  TrainConfig c;
  if (r.has("model")) c.model = ModelConfig::from_json(r.raw("model"), false);
  if (r.has("loss")) c.loss = LossConfig::from_json(r.raw("loss"));
  if (r.has("optim")) c.optim = adam_from_json(r.raw("optim"));
  c.epochs = r.get<int>("epochs", c.epochs);
  c.batch_size = r.get<std::size_t>("batch_size", c.batch_size);
  c.bundle_cap = r.get<std::size_t>("bundle_cap", c.bundle_cap);
  c.seed = r.get<std::uint64_t>("seed", c.seed);
  c.checkpoint_every = r.get<int>("checkpoint_every", c.checkpoint_every);
  r.finish();
  c.validate();
  return c;
}

Json TrainConfig::to_json() const {
  Json j;
  j["schema_version"] = 1;
  j["model"] = model.to_json();
  j["loss"] = loss.to_json();
  j["optim"] = adam_to_json(optim);
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["bundle_cap"] = bundle_cap;
  j["seed"] = seed;
  j["checkpoint_every"] = checkpoint_every;
  return j;
}

ModelConfig resolve_model_config(ModelConfig base, const MovieDataset& ds) {
  auto fill = [](std::size_t& field, std::size_t from_ds, const char* what) {
    if (field == 0) {
      field = from_ds;
    } else if (from_ds != 0 && field != from_ds) {
      fail_invalid(std::string("model config: ") + what + " is " +
                   std::to_string(field) + " but the dataset has " +
                   std::to_string(from_ds));
    }
  };
  fill(base.num_interactions, ds.num_interactions(), "num_interactions");
  fill(base.num_relationships, ds.num_relationships(), "num_relationships");
  fill(base.dim_visual, ds.dim_visual(), "dim_visual");
  fill(base.dim_dialog, ds.dim_dialog(), "dim_dialog");
  fill(base.dim_track, ds.dim_track(), "dim_track");
  base.validate();
  return base;
}

TrainResult train(const TrainConfig& cfg, const MovieDataset& ds,
                  const std::filesystem::path& out_dir) {
  cfg.validate();
  TrainConfig rc = cfg;
  rc.model = resolve_model_config(cfg.model, ds);
  Rng root(cfg.seed);
  Rng init = root.fork("init");
  Model m = Model::create(rc.model, init);
  Adam adam(rc.optim);
  return run_epochs(m, adam, rc, cfg.seed, 0, ds, out_dir, true);
}

TrainResult resume(const std::filesystem::path& checkpoint,
                   const TrainConfig& cfg, const MovieDataset& ds,
                   const std::filesystem::path& out_dir) {
  cfg.validate();
  ModelMeta meta;
  io::Checkpoint raw;
  Model m = load_model(checkpoint, &meta, &raw);
  resolve_model_config(m.cfg, ds);  // consistency check against the dataset
  TrainConfig rc = cfg;
  rc.model = m.cfg;
  Adam adam(rc.optim);
  adam.restore(m.params(), raw.opt_state, raw.step);
  return run_epochs(m, adam, rc, meta.seed, meta.epoch, ds, out_dir, false);
}

Model load_model(const std::filesystem::path& checkpoint, ModelMeta* meta_out,
                 io::Checkpoint* raw_out) {
  ModelMeta meta = read_model_meta(checkpoint);
  io::Checkpoint raw = io::read_checkpoint(checkpoint);
  Rng root(meta.seed);
  Rng init = root.fork("init");
  Model m = Model::create(meta.config, init);
  m.load_params(raw.params);
  if (meta_out) *meta_out = meta;
  if (raw_out) *raw_out = std::move(raw);
  return m;
}

}  // namespace lirec
