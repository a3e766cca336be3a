#include "eval/evaluator.hpp"

#include <algorithm>
#include <optional>

#include "core/error.hpp"
#include "model/pipeline.hpp"
#include "util/threads.hpp"

namespace lirec {

namespace {

Json metric_json(const Metric& m) {
  Json j;
  j["value"] = m.value;
  j["count"] = m.count;
  j["present"] = m.present;
  return j;
}

// index of `pair` inside a canonical candidate list, or nullopt
std::optional<std::size_t> find_pair(const std::vector<PairId>& pairs,
                                     const PairId& pair) {
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i] == pair) return i;
  return std::nullopt;
}

// clips eligible for pair-conditioned interaction metrics
std::vector<int> labeled_clips(const MovieDataset& ds) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < ds.clips.size(); ++i)
    if (ds.clips[i].interaction >= 0 && ds.clips[i].gt_pair)
      ids.push_back(static_cast<int>(i));
  return ids;
}

void add_clip_metrics(MetricReport& rep, const MovieDataset& ds, int clip,
                      const Tensor& scores) {
  const ClipRecord& c = ds.clips[static_cast<std::size_t>(clip)];
  rep.top1.add(argmax_index(scores.data.data(), scores.size()) ==
               static_cast<std::size_t>(c.interaction));
  rep.top5.add(topk_contains(scores, c.interaction, 5));
  rep.soft.add(soft_hit(scores, c.interaction,
                        ds.overlap_sets[static_cast<std::size_t>(clip)]));
}

void eval_clip_regimes(const Model& m, const MovieDataset& ds,
                       MetricReport& rep) {
  std::vector<int> ids = labeled_clips(ds);
  std::vector<Tensor> scores(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    scores[i] = eval_clip_interactions(m, ds, ids[i]);
  });
  for (std::size_t i = 0; i < ids.size(); ++i)
    add_clip_metrics(rep, ds, ids[i], scores[i]);
}

void eval_pair_regime(const Model& m, const MovieDataset& ds,
                      MetricReport& rep) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    const ClipRecord& c = ds.clips[i];
    if (c.interaction >= 0 && c.gt_pair && !ds.candidate_pairs[i].empty())
      ids.push_back(static_cast<int>(i));
  }
  std::vector<Tensor> mats(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    mats[i] = eval_pair_matrix(
        m, ds, ids[i], ds.candidate_pairs[static_cast<std::size_t>(ids[i])]);
  });
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const ClipRecord& c = ds.clips[static_cast<std::size_t>(ids[i])];
    const std::vector<PairId>& cands =
        ds.candidate_pairs[static_cast<std::size_t>(ids[i])];
    std::optional<std::size_t> p_gt = find_pair(cands, *c.gt_pair);
    if (!p_gt) continue;
    const Tensor& mat = mats[i];
    std::size_t P = mat.rows(), A = mat.cols();
    std::size_t a_star = static_cast<std::size_t>(c.interaction);

    std::size_t best_p = 0;
    for (std::size_t p = 1; p < P; ++p)
      if (mat.at(p, a_star) > mat.at(best_p, a_star)) best_p = p;
    rep.char_given_int.add(best_p == *p_gt);

    std::size_t best_a = 0;
    for (std::size_t a = 1; a < A; ++a)
      if (mat.at(*p_gt, a) > mat.at(*p_gt, best_a)) best_a = a;
    rep.int_given_char.add(best_a == a_star);

    std::size_t flat = argmax_index(mat.data.data(), mat.size());
    rep.joint_pair.add(flat / A == *p_gt && flat % A == a_star);
  }
}

// relationship accuracy over eval bundles at one cap
Metric rel_accuracy(const Model& m, const MovieDataset& ds, std::size_t cap) {
  std::vector<PairBundle> bundles =
      build_bundles(ds, cap, BundleMode::eval_uniform, Rng(0));
  std::vector<int> keep;
  for (std::size_t b = 0; b < bundles.size(); ++b)
    if (bundles[b].relationship) keep.push_back(static_cast<int>(b));
  std::vector<Tensor> scores(keep.size());
  parallel_for(keep.size(), [&](std::size_t i) {
    scores[i] = eval_bundle_relationships(
        m, ds, bundles[static_cast<std::size_t>(keep[i])]);
  });
  Metric acc;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    int r_star = *bundles[static_cast<std::size_t>(keep[i])].relationship;
    acc.add(argmax_index(scores[i].data.data(), scores[i].size()) ==
            static_cast<std::size_t>(r_star));
  }
  return acc;
}

void eval_joint_regime(const Model& m, const MovieDataset& ds,
                       const EvalConfig& cfg, MetricReport& rep) {
  std::vector<PairBundle> bundles =
      build_bundles(ds, cfg.bundle_cap, BundleMode::eval_uniform, Rng(0));
  struct Slot {
    std::optional<Tensor> rel;
    std::vector<std::pair<int, Tensor>> clips;
  };
  std::vector<Slot> slots(bundles.size());
  parallel_for(bundles.size(), [&](std::size_t b) {
    const PairBundle& bundle = bundles[b];
    if (bundle.relationship)
      slots[b].rel = eval_bundle_relationships(m, ds, bundle);
    for (int ci : bundle.clips) {
      const ClipRecord& c = ds.clips[static_cast<std::size_t>(ci)];
      if (c.interaction < 0) continue;
      slots[b].clips.emplace_back(
          ci, eval_clip_interactions_joint(m, ds, bundle, ci));
    }
  });
  for (std::size_t b = 0; b < bundles.size(); ++b) {
    if (slots[b].rel)
      rep.rel_top1.add(
          argmax_index(slots[b].rel->data.data(), slots[b].rel->size()) ==
          static_cast<std::size_t>(*bundles[b].relationship));
    for (const auto& [ci, scores] : slots[b].clips)
      add_clip_metrics(rep, ds, ci, scores);
  }
}

void eval_tensor_regime(const Model& m, const MovieDataset& ds,
                        const EvalConfig& cfg, MetricReport& rep) {
  std::vector<PairBundle> all =
      build_bundles(ds, cfg.bundle_cap, BundleMode::eval_uniform, Rng(0));
  std::vector<PairBundle> bundles;
  for (PairBundle& b : all)
    if (b.relationship) bundles.push_back(std::move(b));

  struct Hit {
    bool usable = false;
    bool char_hit = false, int_hit = false, rel_hit = false, joint_hit = false;
  };
  std::vector<std::vector<Hit>> slots(bundles.size());
  parallel_for(bundles.size(), [&](std::size_t b) {
    const PairBundle& bundle = bundles[b];
    const Movie& movie = ds.movies[static_cast<std::size_t>(bundle.movie)];
    std::vector<PairId> pairs = movie_pair_set(movie);
    Tensor src = eval_rel_pair_matrix(m, ds, bundle, pairs);
    std::size_t r_star = static_cast<std::size_t>(*bundle.relationship);
    std::size_t R = src.cols();

    slots[b].resize(bundle.clips.size());
    for (std::size_t k = 0; k < bundle.clips.size(); ++k) {
      int ci = bundle.clips[k];
      const ClipRecord& c = ds.clips[static_cast<std::size_t>(ci)];
      const std::vector<PairId>& cands =
          ds.candidate_pairs[static_cast<std::size_t>(ci)];
      if (c.interaction < 0 || !c.gt_pair || cands.empty()) continue;
      std::optional<std::size_t> p_gt = find_pair(cands, *c.gt_pair);
      if (!p_gt) continue;
      Tensor sic = eval_pair_matrix(m, ds, ci, cands);
      std::size_t A = sic.cols();
      std::size_t a_star = static_cast<std::size_t>(c.interaction);

      // row map: candidate row -> movie-level pair row of src
      std::vector<std::size_t> row(cands.size());
      for (std::size_t p = 0; p < cands.size(); ++p) {
        std::optional<std::size_t> mp = find_pair(pairs, cands[p]);
        if (!mp) fail_runtime("candidate pair missing from the movie pair set");
        row[p] = *mp;
      }
      auto cell = [&](std::size_t p, std::size_t a, std::size_t r) {
        return sic.at(p, a) + src.at(row[p], r);
      };

      Hit& h = slots[b][k];
      h.usable = true;
      std::size_t best_p = 0;
      for (std::size_t p = 1; p < cands.size(); ++p)
        if (cell(p, a_star, r_star) > cell(best_p, a_star, r_star)) best_p = p;
      h.char_hit = best_p == *p_gt;
      std::size_t best_a = 0;
      for (std::size_t a = 1; a < A; ++a)
        if (cell(*p_gt, a, r_star) > cell(*p_gt, best_a, r_star)) best_a = a;
      h.int_hit = best_a == a_star;
      std::size_t best_r = 0;
      for (std::size_t r = 1; r < R; ++r)
        if (cell(*p_gt, a_star, r) > cell(*p_gt, a_star, best_r)) best_r = r;
      h.rel_hit = best_r == r_star;
      std::size_t bp = 0, ba = 0, br = 0;
      double best = cell(0, 0, 0);
      for (std::size_t p = 0; p < cands.size(); ++p)
        for (std::size_t a = 0; a < A; ++a)
          for (std::size_t r = 0; r < R; ++r)
            if (cell(p, a, r) > best) {
              best = cell(p, a, r);
              bp = p; ba = a; br = r;
            }
      h.joint_hit = bp == *p_gt && ba == a_star && br == r_star;
    }
  });
  for (const std::vector<Hit>& bundle_hits : slots)
    for (const Hit& h : bundle_hits) {
      if (!h.usable) continue;
      rep.char_given_int_rel.add(h.char_hit);
      rep.int_given_char_rel.add(h.int_hit);
      rep.rel_given_char_int.add(h.rel_hit);
      rep.joint_tensor.add(h.joint_hit);
    }
}

}  // namespace

void EvalConfig::validate() const {
  if (bundle_cap == 0) fail_invalid("eval config: bundle_cap must be >= 1");
  if (sweep) {
    if (sweep_caps.empty())
      fail_invalid("eval config: sweep requested with no caps");
    for (std::size_t c : sweep_caps)
      if (c == 0) fail_invalid("eval config: sweep caps must be >= 1");
  }
}

EvalConfig EvalConfig::from_json(const Json& j) {
  JsonReader r(j, "eval config");
  EvalConfig c;
  c.bundle_cap = r.get<std::size_t>("bundle_cap", c.bundle_cap);
  c.sweep = r.get<bool>("sweep", c.sweep);
  c.sweep_caps = r.get<std::vector<std::size_t>>("sweep_caps", c.sweep_caps);
  r.finish();
  c.validate();
  return c;
}

Json EvalConfig::to_json() const {
  Json j;
  j["bundle_cap"] = bundle_cap;
  j["sweep"] = sweep;
  j["sweep_caps"] = sweep_caps;
  return j;
}

std::size_t argmax_index(const double* v, std::size_t n) {
  if (n == 0) fail_invalid("argmax over an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

bool topk_contains(const Tensor& scores, int label, std::size_t k) {
  if (label < 0 || static_cast<std::size_t>(label) >= scores.size())
    return false;
  std::size_t li = static_cast<std::size_t>(label);
  double s = scores.data[li];
  std::size_t ahead = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == li) continue;
    if (scores.data[i] > s || (scores.data[i] == s && i < li)) ++ahead;
  }
  return ahead < k;
}

bool soft_hit(const Tensor& scores, int label, const std::vector<int>& overlap) {
  std::size_t top = argmax_index(scores.data.data(), scores.size());
  if (top == static_cast<std::size_t>(label)) return true;
  return std::binary_search(overlap.begin(), overlap.end(),
                            static_cast<int>(top));
}

MetricReport evaluate(const Model& m, const MovieDataset& ds,
                      const EvalConfig& cfg) {
  cfg.validate();
  MetricReport rep;
  switch (m.cfg.regime) {
    case Regime::interaction:
      eval_clip_regimes(m, ds, rep);
      break;
    case Regime::interaction_char:
      eval_clip_regimes(m, ds, rep);
      eval_pair_regime(m, ds, rep);
      break;
    case Regime::relationship:
      rep.rel_top1 = rel_accuracy(m, ds, cfg.bundle_cap);
      break;
    case Regime::joint:
      eval_joint_regime(m, ds, cfg, rep);
      break;
    case Regime::interaction_rel_char:
      eval_tensor_regime(m, ds, cfg, rep);
      break;
  }
  if (cfg.sweep && (m.cfg.regime == Regime::relationship ||
                    m.cfg.regime == Regime::joint)) {
    for (std::size_t cap : cfg.sweep_caps)
      rep.rel_sweep.emplace_back(cap, rel_accuracy(m, ds, cap).value);
  }
  return rep;
}

Json MetricReport::to_json() const {
  Json j;
  j["top1"] = metric_json(top1);
  j["top5"] = metric_json(top5);
  j["soft"] = metric_json(soft);
  j["rel_top1"] = metric_json(rel_top1);
  j["char_given_int"] = metric_json(char_given_int);
  j["int_given_char"] = metric_json(int_given_char);
  j["joint_pair"] = metric_json(joint_pair);
  j["char_given_int_rel"] = metric_json(char_given_int_rel);
  j["int_given_char_rel"] = metric_json(int_given_char_rel);
  j["rel_given_char_int"] = metric_json(rel_given_char_int);
  j["joint_tensor"] = metric_json(joint_tensor);
  Json sweep = Json::array();
  for (const auto& [cap, value] : rel_sweep) {
    Json e;
    e["cap"] = cap;
    e["rel_top1"] = value;
    sweep.push_back(std::move(e));
  }
  j["rel_sweep"] = std::move(sweep);
  return j;
}

}  // namespace lirec
