#include "train/gradcheck.hpp"

#include <chrono>
#include <cmath>

#include "core/error.hpp"
#include "model/pipeline.hpp"

namespace lirec {

namespace {

// Below this distance to the nearest hinge / ReLU / max-pool switch the toy
// is redrawn: central differences with h = 1e-5 need the neighbourhood of
// the evaluation point to stay on one smooth piece.
constexpr double kMinKinkMargin = 1e-3;
constexpr double kStep = 1e-5;

struct FormSpec {
  const char* name;
  Regime regime;
  bool weak;
  NegReduction red;
  double lambda;
};

const FormSpec kForms[] = {
    {"interaction", Regime::interaction, false, NegReduction::sum, 0.0},
    {"relationship", Regime::relationship, false, NegReduction::sum, 0.0},
    {"joint", Regime::joint, false, NegReduction::sum, 1.5},
    {"pair_full_sum", Regime::interaction_char, false, NegReduction::sum, 0.0},
    {"pair_full_summax", Regime::interaction_char, false, NegReduction::sum_max,
     0.0},
    {"pair_weak_sum", Regime::interaction_char, true, NegReduction::sum, 0.0},
    {"pair_weak_summax", Regime::interaction_char, true, NegReduction::sum_max,
     0.0},
    // lambda 0 keeps only the relationship ranking term of the weak bundle
    // objective, so this exercises that loss in isolation
    {"rel_pair_weak", Regime::interaction_rel_char, true, NegReduction::sum,
     0.0},
    {"weak_irc", Regime::interaction_rel_char, true, NegReduction::sum_max,
     1.5},
    {"irc_full", Regime::interaction_rel_char, false, NegReduction::sum_max,
     1.5},
};

const FormSpec& find_form(const std::string& name) {
  for (const FormSpec& f : kForms)
    if (name == f.name) return f;
  fail_invalid("gradcheck: unknown form \"" + name + "\"");
}

Tensor random_block(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t = Tensor::zeros({rows, cols});
  for (double& x : t.data) x = rng.normal();
  return t;
}

// Three clips of one movie, one annotated pair segment. Spans make clips 0
// and 1 overlap (IoU 1/3), clip 1 has no dialog, character 2 is tracked in
// clip 1 only.
MovieDataset make_toy_dataset(Rng& rng, std::size_t A, std::size_t R) {
  MovieDataset ds;
  for (std::size_t a = 0; a < A; ++a)
    ds.interactions.names.push_back("i" + std::to_string(a));
  for (std::size_t r = 0; r < R; ++r)
    ds.relationships.names.push_back("r" + std::to_string(r));
  Movie mv;
  mv.id = "toy";
  mv.characters = {"c0", "c1", "c2"};
  int rel = static_cast<int>(rng.uniform_index(R));
  for (int i = 0; i < 3; ++i) {
    ClipRecord c;
    c.id = "clip" + std::to_string(i);
    c.movie = 0;
    c.span = i == 0 ? TimeSpan{0.0, 4.0}
                    : i == 1 ? TimeSpan{2.0, 6.0} : TimeSpan{8.0, 12.0};
    c.visual = random_block(2, 3, rng);
    if (i != 1) c.dialog = random_block(2, 2, rng);
    c.tracks[0] = random_block(2, 2, rng);
    c.tracks[1] = random_block(2, 2, rng);
    if (i == 1) c.tracks[2] = random_block(2, 2, rng);
    c.interaction = static_cast<int>(rng.uniform_index(A));
    c.gt_pair = PairId::full(0, 1);
    c.relationship = rel;
    mv.clip_indices.push_back(i);
    ds.clips.push_back(std::move(c));
  }
  ds.movies.push_back(std::move(mv));
  ds.build_derived();
  return ds;
}

PoolKind pick_pool(Rng& rng) {
  switch (rng.uniform_index(3)) {
    case 0: return PoolKind::max;
    case 1: return PoolKind::avg;
    default: return PoolKind::sum;
  }
}

struct Toy {
  MovieDataset ds;
  Model model;
  PairBundle bundle;
  int clip = 0;
  std::optional<std::size_t> fixed_pair;
  LossConfig loss;
  NegReduction red = NegReduction::sum;
};

Toy make_toy(const FormSpec& form, std::uint64_t seed) {
  Rng rng(seed);
  Toy t;
  t.ds = make_toy_dataset(rng, 4, 3);

  ModelConfig cfg;
  cfg.regime = form.regime;
  cfg.num_interactions = 4;
  cfg.num_relationships = 3;
  cfg.dim_visual = 3;
  cfg.dim_dialog = 2;
  cfg.dim_track = 2;
  cfg.embed_dim = 4;
  cfg.encoder_hidden = 5;
  cfg.head_hidden = 5;
  cfg.dropout = 0.0;
  cfg.temporal_pool = pick_pool(rng);
  cfg.bundle_pool = pick_pool(rng);
  cfg.share_encoders = rng.bernoulli(0.5);
  Rng init = rng.fork("init");
  t.model = Model::create(cfg, init);
  // spread the toy away from the near-symmetric fresh init so scores and
  // hinge terms separate
  for (ParamRef& p : t.model.params())
    for (double& x : p.value->data) x += 0.3 * rng.normal();

  t.bundle.movie = 0;
  t.bundle.pair = PairId::full(0, 1);
  t.bundle.relationship = t.ds.clips[0].relationship;
  t.bundle.clips = {0, 1, 2};
  t.clip = static_cast<int>(rng.uniform_index(3));

  t.loss.lambda = form.lambda;
  t.loss.reduction = form.red;
  t.loss.burn_in_epochs = 0;
  t.loss.weak = form.weak;
  t.loss.multinomial_sampling = false;
  t.red = form.red;

  if (form.weak) {
    std::size_t pairs =
        form.regime == Regime::interaction_char
            ? t.ds.candidate_pairs[static_cast<std::size_t>(t.clip)].size()
            : movie_pair_set(t.ds.movies[0]).size();
    t.fixed_pair = rng.uniform_index(pairs);
  }
  return t;
}

double toy_loss(Toy& t, bool accumulate, KinkProbe* probe) {
  StepContext ctx;
  ctx.train = false;
  ctx.accumulate = accumulate;
  ctx.reduction = t.red;
  ctx.loss = &t.loss;
  ctx.fixed_pair = t.fixed_pair;
  ctx.probe = probe;
  switch (t.model.cfg.regime) {
    case Regime::interaction:
      return step_interaction(t.model, t.ds, t.clip, ctx);
    case Regime::relationship:
      return step_relationship(t.model, t.ds, t.bundle, ctx);
    case Regime::joint:
      return step_joint(t.model, t.ds, t.bundle, ctx);
    case Regime::interaction_char:
      return step_interaction_char(t.model, t.ds, t.clip, ctx);
    default:
      return step_interaction_rel_char(t.model, t.ds, t.bundle, ctx);
  }
}

GradCheckEntry check_instance(const FormSpec& form, std::uint64_t seed) {
  GradCheckEntry entry;
  entry.form = form.name;

  Toy toy;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 500)
      fail_runtime(std::string("gradcheck: no smooth toy found for form ") +
                   form.name);
    std::uint64_t s = seed + static_cast<std::uint64_t>(attempt) * 0x9e3779b9;
    toy = make_toy(form, s);
    KinkProbe probe;
    toy.model.zero_grad();
    entry.loss = toy_loss(toy, true, &probe);
    if (probe.min_margin >= kMinKinkMargin) {
      entry.instance_seed = s;
      entry.redraws = attempt;
      break;
    }
  }

  std::vector<ParamRef> params = toy.model.params();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const ParamRef& p : params) analytic.push_back(*p.grad);

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor* value = params[pi].value;
    for (std::size_t k = 0; k < value->size(); ++k) {
      double saved = value->data[k];
      value->data[k] = saved + kStep;
      double up = toy_loss(toy, false, nullptr);
      value->data[k] = saved - kStep;
      double down = toy_loss(toy, false, nullptr);
      value->data[k] = saved;
      double fd = (up - down) / (2.0 * kStep);
      double a = analytic[pi].data[k];
      double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
      if (rel > worst) worst = rel;
    }
  }
  entry.max_rel_err = worst;
  return entry;
}

GradCheckReport run_forms(const std::vector<const FormSpec*>& forms,
                          std::uint64_t seed, int instances) {
  if (instances < 1) fail_invalid("gradcheck: instances must be >= 1");
  auto t0 = std::chrono::steady_clock::now();
  GradCheckReport report;
  Rng root(seed);
  for (const FormSpec* form : forms) {
    Rng stream = root.fork(form->name);
    for (int i = 0; i < instances; ++i) {
      GradCheckEntry e = check_instance(*form, stream.fork(i).next_u64());
      report.max_rel_err = std::max(report.max_rel_err, e.max_rel_err);
      report.entries.push_back(std::move(e));
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  report.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return report;
}

}  // namespace

std::vector<std::string> gradcheck_forms() {
  std::vector<std::string> out;
  for (const FormSpec& f : kForms) out.push_back(f.name);
  return out;
}

GradCheckReport run_gradcheck(std::uint64_t seed, int instances_per_form) {
  std::vector<const FormSpec*> forms;
  for (const FormSpec& f : kForms) forms.push_back(&f);
  return run_forms(forms, seed, instances_per_form);
}

GradCheckReport run_gradcheck_form(const std::string& form, std::uint64_t seed,
                                   int instances) {
  return run_forms({&find_form(form)}, seed, instances);
}

Json GradCheckReport::to_json() const {
  Json j;
  j["max_rel_err"] = max_rel_err;
  j["wall_ms"] = wall_ms;
  Json arr = Json::array();
  for (const GradCheckEntry& e : entries) {
    Json je;
    je["form"] = e.form;
    je["instance_seed"] = e.instance_seed;
    je["redraws"] = e.redraws;
    je["loss"] = e.loss;
    je["max_rel_err"] = e.max_rel_err;
    arr.push_back(std::move(je));
  }
  j["entries"] = std::move(arr);
  return j;
}

}  // namespace lirec
