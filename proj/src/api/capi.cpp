#include "lirec/lirec.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "core/error.hpp"
#include "data/dataset_io.hpp"
#include "eval/evaluator.hpp"
#include "synth/synthgen.hpp"
#include "train/gradcheck.hpp"
#include "train/trainer.hpp"

using namespace lirec;

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) std::abort();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lirec_status fail(lirec_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <class Fn>
lirec_status guarded(Fn&& fn) {
  try {
    fn();
    return LIREC_OK;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::invalid: return fail(LIREC_ERR_INVALID, e.what());
      case ErrorKind::io: return fail(LIREC_ERR_IO, e.what());
      case ErrorKind::runtime: return fail(LIREC_ERR_RUNTIME, e.what());
    }
    return fail(LIREC_ERR_RUNTIME, e.what());
  } catch (const std::exception& e) {
    return fail(LIREC_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(LIREC_ERR_RUNTIME, "unknown error");
  }
}

lirec_status require(bool ok, const char* what) {
  if (ok) return LIREC_OK;
  return fail(LIREC_ERR_INVALID, std::string("null argument: ") + what);
}

Json parse_or_empty(const char* json, const char* what) {
  if (!json || !*json) return Json::object();
  return parse_json(json, what);
}

Json train_result_json(const TrainResult& r) {
  Json j;
  j["checkpoint"] = r.checkpoint.string();
  j["epochs_run"] = r.epochs_run;
  Json log = Json::array();
  for (const EpochLog& e : r.log) {
    Json je;
    je["epoch"] = e.epoch;
    je["loss"] = e.loss;
    je["samples"] = e.samples;
    je["reduction"] = e.reduction;
    je["wall_ms"] = e.wall_ms;
    log.push_back(std::move(je));
  }
  j["log"] = std::move(log);
  return j;
}

}  // namespace

struct lirec_dataset {
  MovieDataset ds;
};

extern "C" {

const char* lirec_version(void) { return "0.1.0"; }

const char* lirec_last_error(void) { return g_last_error.c_str(); }

void lirec_string_free(char* s) { std::free(s); }

lirec_status lirec_dataset_open(const char* root, lirec_dataset** out) {
  if (lirec_status s = require(root, "root"); s != LIREC_OK) return s;
  if (lirec_status s = require(out, "out"); s != LIREC_OK) return s;
  *out = nullptr;
  return guarded([&] {
    auto* handle = new lirec_dataset{load_dataset(root)};
    *out = handle;
  });
}

void lirec_dataset_close(lirec_dataset* ds) { delete ds; }

lirec_status lirec_dataset_summary(const lirec_dataset* ds, char** json_out) {
  if (lirec_status s = require(ds, "ds"); s != LIREC_OK) return s;
  if (lirec_status s = require(json_out, "json_out"); s != LIREC_OK) return s;
  *json_out = nullptr;
  return guarded([&] {
    const MovieDataset& d = ds->ds;
    std::size_t with_dialog = 0, with_gt_pair = 0, with_rel = 0;
    for (const ClipRecord& c : d.clips) {
      if (c.dialog) ++with_dialog;
      if (c.gt_pair) ++with_gt_pair;
      if (c.relationship) ++with_rel;
    }
    Json j;
    j["movies"] = d.movies.size();
    j["clips"] = d.clips.size();
    j["segments"] = d.segments.size();
    j["interactions"] = d.num_interactions();
    j["relationships"] = d.num_relationships();
    j["dim_visual"] = d.dim_visual();
    j["dim_dialog"] = d.dim_dialog();
    j["dim_track"] = d.dim_track();
    j["clips_with_dialog"] = with_dialog;
    j["clips_with_pair"] = with_gt_pair;
    j["clips_with_relationship"] = with_rel;
    *json_out = dup_string(j.dump(2));
  });
}

lirec_status lirec_generate(const char* config_json, const char* out_dir) {
  if (lirec_status s = require(out_dir, "out_dir"); s != LIREC_OK) return s;
  return guarded([&] {
    GenConfig cfg =
        GenConfig::from_json(parse_or_empty(config_json, "generator config"));
    Generated g = generate(cfg);
    write_dataset(g.dataset, out_dir);
    write_truth(std::filesystem::path(out_dir) / "truth.json", g.truth);
  });
}

lirec_status lirec_train(const char* config_json, const lirec_dataset* ds,
                         const char* out_dir, char** result_json_out) {
  if (lirec_status s = require(ds, "ds"); s != LIREC_OK) return s;
  if (lirec_status s = require(out_dir, "out_dir"); s != LIREC_OK) return s;
  if (result_json_out) *result_json_out = nullptr;
  return guarded([&] {
    TrainConfig cfg =
        TrainConfig::from_json(parse_or_empty(config_json, "train config"));
    TrainResult r = train(cfg, ds->ds, out_dir);
    if (result_json_out)
      *result_json_out = dup_string(train_result_json(r).dump(2));
  });
}

lirec_status lirec_resume(const char* checkpoint, const char* config_json,
                          const lirec_dataset* ds, const char* out_dir,
                          char** result_json_out) {
  if (lirec_status s = require(checkpoint, "checkpoint"); s != LIREC_OK)
    return s;
  if (lirec_status s = require(ds, "ds"); s != LIREC_OK) return s;
  if (lirec_status s = require(out_dir, "out_dir"); s != LIREC_OK) return s;
  if (result_json_out) *result_json_out = nullptr;
  return guarded([&] {
    TrainConfig cfg =
        TrainConfig::from_json(parse_or_empty(config_json, "train config"));
    TrainResult r = resume(checkpoint, cfg, ds->ds, out_dir);
    if (result_json_out)
      *result_json_out = dup_string(train_result_json(r).dump(2));
  });
}

lirec_status lirec_evaluate(const char* checkpoint, const lirec_dataset* ds,
                            const char* options_json, char** report_json_out) {
  if (lirec_status s = require(checkpoint, "checkpoint"); s != LIREC_OK)
    return s;
  if (lirec_status s = require(ds, "ds"); s != LIREC_OK) return s;
  if (lirec_status s = require(report_json_out, "report_json_out");
      s != LIREC_OK)
    return s;
  *report_json_out = nullptr;
  return guarded([&] {
    EvalConfig cfg =
        EvalConfig::from_json(parse_or_empty(options_json, "eval config"));
    Model m = load_model(checkpoint);
    MetricReport rep = evaluate(m, ds->ds, cfg);
    *report_json_out = dup_string(rep.to_json().dump(2));
  });
}

lirec_status lirec_checkpoint_summary(const char* checkpoint, char** json_out) {
  if (lirec_status s = require(checkpoint, "checkpoint"); s != LIREC_OK)
    return s;
  if (lirec_status s = require(json_out, "json_out"); s != LIREC_OK) return s;
  *json_out = nullptr;
  return guarded([&] {
    ModelMeta meta = read_model_meta(checkpoint);
    io::Checkpoint raw = io::read_checkpoint(checkpoint);
    std::size_t scalars = 0;
    for (const auto& [name, t] : raw.params) scalars += t.size();
    Json j;
    j["model"] = meta.config.to_json();
    j["epoch"] = meta.epoch;
    j["seed"] = meta.seed;
    j["step"] = raw.step;
    j["tensors"] = raw.params.size();
    j["parameters"] = scalars;
    *json_out = dup_string(j.dump(2));
  });
}

lirec_status lirec_gradcheck(uint64_t seed, int instances_per_form,
                             char** report_json_out, double* max_rel_err_out) {
  if (report_json_out) *report_json_out = nullptr;
  return guarded([&] {
    GradCheckReport rep = run_gradcheck(seed, instances_per_form);
    if (max_rel_err_out) *max_rel_err_out = rep.max_rel_err;
    if (report_json_out) *report_json_out = dup_string(rep.to_json().dump(2));
  });
}

}  // extern "C"
