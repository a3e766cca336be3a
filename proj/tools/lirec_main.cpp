// Command-line front end. Talks to the engine exclusively through the C API;
// JSON handling here is only for merging config files with flag overrides.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lirec/lirec.h"

namespace {

using Json = nlohmann::json;

int exit_code(lirec_status s) {
  switch (s) {
    case LIREC_OK: return 0;
    case LIREC_ERR_INVALID: return 1;
    default: return 2;
  }
}

int report_failure(lirec_status s) {
  std::cerr << "error: " << lirec_last_error() << "\n";
  return exit_code(s);
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream f(path);
  if (!f) {
    std::cerr << "error: cannot open config file " << path << "\n";
    std::exit(1);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  Json j = Json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) {
    std::cerr << "error: malformed JSON in " << path << "\n";
    std::exit(1);
  }
  return j;
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  return static_cast<bool>(f);
}

// freed string -> std::string
std::string take(char* s) {
  std::string out = s ? s : "";
  lirec_string_free(s);
  return out;
}

void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const Json& config, const Json& extra) {
  Json j;
  j["command"] = command;
  j["version"] = lirec_version();
  j["config"] = config;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  write_text(out_dir + "/run_manifest.json", j.dump(2) + "\n");
}

struct DatasetHandle {
  lirec_dataset* ds = nullptr;
  ~DatasetHandle() { lirec_dataset_close(ds); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lirec: interactions, relationships and character pairs from "
               "clip features"};
  app.require_subcommand(1);
  app.footer("Environment:\n  LIREC_THREADS   caps evaluation worker threads "
             "(default: hardware concurrency)");

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  std::string gen_config, gen_out;
  std::optional<std::uint64_t> gen_seed;
  std::optional<int> gen_movies, gen_chars, gen_clips, gen_ints, gen_rels;
  std::optional<double> gen_sigma, gen_corr;
  gen->add_option("--config", gen_config, "generator config JSON file");
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--movies", gen_movies, "number of movies");
  gen->add_option("--characters", gen_chars, "characters per movie");
  gen->add_option("--clips", gen_clips, "clips per movie");
  gen->add_option("--interactions", gen_ints, "interaction vocabulary size");
  gen->add_option("--relationships", gen_rels, "relationship vocabulary size");
  gen->add_option("--sigma", gen_sigma, "feature noise level");
  gen->add_option("--correlation", gen_corr,
                  "interaction/relationship correlation strength in [0,1]");

  // ---- train / resume ----
  auto* train = app.add_subcommand("train", "train a model on a dataset");
  auto* resume =
      app.add_subcommand("resume", "continue training from a checkpoint");
  std::string tr_config, tr_dataset, tr_out, tr_regime, tr_reduction, tr_ckpt;
  std::optional<int> tr_epochs, tr_batch, tr_bundle_cap, tr_ckpt_every;
  std::optional<std::uint64_t> tr_seed;
  std::optional<double> tr_lr;
  bool tr_weak = false;
  for (CLI::App* cmd : {train, resume}) {
    cmd->add_option("--config", tr_config, "train config JSON file");
    cmd->add_option("--dataset", tr_dataset, "dataset directory")->required();
    cmd->add_option("--out", tr_out, "run output directory")->required();
    cmd->add_option("--epochs", tr_epochs, "total epochs");
    cmd->add_option("--batch", tr_batch, "batch size");
    cmd->add_option("--bundle-cap", tr_bundle_cap, "max clips per bundle");
    cmd->add_option("--checkpoint-every", tr_ckpt_every,
                    "periodic checkpoint cadence (epochs)");
    cmd->add_option("--lr", tr_lr, "learning rate");
  }
  train->add_option("--regime", tr_regime,
                    "interaction | relationship | joint | interaction_char | "
                    "interaction_rel_char");
  train->add_option("--seed", tr_seed, "RNG seed");
  train->add_option("--reduction", tr_reduction, "sum | sum-max");
  train->add_flag("--weak", tr_weak, "weak supervision (character-pair regimes)");
  resume->add_option("--checkpoint", tr_ckpt, "checkpoint to continue")
      ->required();

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
  std::string ev_ckpt, ev_dataset, ev_out;
  std::optional<int> ev_bundle_cap;
  bool ev_sweep = false;
  eval->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  eval->add_option("--dataset", ev_dataset, "dataset directory")->required();
  eval->add_option("--bundle-cap", ev_bundle_cap, "max clips per bundle");
  eval->add_flag("--sweep", ev_sweep, "relationship accuracy at several caps");
  eval->add_option("--out", ev_out, "also write the report to this file");

  // ---- gradcheck ----
  auto* gc = app.add_subcommand(
      "gradcheck", "finite-difference check of every objective form");
  std::uint64_t gc_seed = 1;
  int gc_instances = 20;
  double gc_tol = 1e-4;
  std::string gc_out;
  gc->add_option("--seed", gc_seed, "RNG seed");
  gc->add_option("--instances", gc_instances, "toy instances per form");
  gc->add_option("--tol", gc_tol, "max relative error to accept");
  gc->add_option("--out", gc_out, "also write the report to this file");

  // ---- inspect ----
  auto* inspect =
      app.add_subcommand("inspect", "summarize a dataset or a checkpoint");
  std::string in_dataset, in_ckpt;
  inspect->add_option("--dataset", in_dataset, "dataset directory");
  inspect->add_option("--checkpoint", in_ckpt, "checkpoint file");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    Json cfg = load_config(gen_config);
    if (gen_seed) cfg["seed"] = *gen_seed;
    if (gen_movies) cfg["movies"] = *gen_movies;
    if (gen_chars) cfg["characters_per_movie"] = *gen_chars;
    if (gen_clips) cfg["clips_per_movie"] = *gen_clips;
    if (gen_ints) cfg["num_interactions"] = *gen_ints;
    if (gen_rels) cfg["num_relationships"] = *gen_rels;
    if (gen_sigma) cfg["noise_sigma"] = *gen_sigma;
    if (gen_corr) cfg["correlation_strength"] = *gen_corr;
    lirec_status s = lirec_generate(cfg.dump().c_str(), gen_out.c_str());
    if (s != LIREC_OK) return report_failure(s);
    Json extra;
    extra["out"] = gen_out;
    write_run_manifest(gen_out, "generate", cfg, extra);
    std::cout << "dataset written to " << gen_out << "\n";
    return 0;
  }

  if (train->parsed() || resume->parsed()) {
    Json cfg = load_config(tr_config);
    if (!tr_regime.empty()) cfg["model"]["regime"] = tr_regime;
    if (tr_seed) cfg["seed"] = *tr_seed;
    if (tr_epochs) cfg["epochs"] = *tr_epochs;
    if (tr_batch) cfg["batch_size"] = *tr_batch;
    if (tr_bundle_cap) cfg["bundle_cap"] = *tr_bundle_cap;
    if (tr_ckpt_every) cfg["checkpoint_every"] = *tr_ckpt_every;
    if (tr_lr) cfg["optim"]["lr"] = *tr_lr;
    if (tr_weak) cfg["loss"]["weak"] = true;
    if (!tr_reduction.empty()) cfg["loss"]["reduction"] = tr_reduction;

    DatasetHandle ds;
    lirec_status s = lirec_dataset_open(tr_dataset.c_str(), &ds.ds);
    if (s != LIREC_OK) return report_failure(s);
    char* result = nullptr;
    s = train->parsed()
            ? lirec_train(cfg.dump().c_str(), ds.ds, tr_out.c_str(), &result)
            : lirec_resume(tr_ckpt.c_str(), cfg.dump().c_str(), ds.ds,
                           tr_out.c_str(), &result);
    if (s != LIREC_OK) return report_failure(s);
    Json extra;
    extra["dataset"] = tr_dataset;
    extra["out"] = tr_out;
    if (resume->parsed()) extra["resumed_from"] = tr_ckpt;
    write_run_manifest(tr_out, train->parsed() ? "train" : "resume", cfg, extra);
    std::cout << take(result) << "\n";
    return 0;
  }

  if (eval->parsed()) {
    Json cfg = Json::object();
    if (ev_bundle_cap) cfg["bundle_cap"] = *ev_bundle_cap;
    if (ev_sweep) cfg["sweep"] = true;
    DatasetHandle ds;
    lirec_status s = lirec_dataset_open(ev_dataset.c_str(), &ds.ds);
    if (s != LIREC_OK) return report_failure(s);
    char* report = nullptr;
    s = lirec_evaluate(ev_ckpt.c_str(), ds.ds, cfg.dump().c_str(), &report);
    if (s != LIREC_OK) return report_failure(s);
    std::string text = take(report);
    if (!ev_out.empty() && !write_text(ev_out, text + "\n")) {
      std::cerr << "error: cannot write report to " << ev_out << "\n";
      return 2;
    }
    std::cout << text << "\n";
    return 0;
  }

  if (gc->parsed()) {
    char* report = nullptr;
    double max_rel_err = 0.0;
    lirec_status s = lirec_gradcheck(gc_seed, gc_instances, &report, &max_rel_err);
    if (s != LIREC_OK) return report_failure(s);
    std::string text = take(report);
    if (!gc_out.empty() && !write_text(gc_out, text + "\n")) {
      std::cerr << "error: cannot write report to " << gc_out << "\n";
      return 2;
    }
    bool ok = max_rel_err < gc_tol;
    std::printf("max_rel_err %.3e (tol %.1e): %s\n", max_rel_err, gc_tol,
                ok ? "pass" : "FAIL");
    return ok ? 0 : 2;
  }

  if (inspect->parsed()) {
    if (in_dataset.empty() == in_ckpt.empty()) {
      std::cerr << "error: inspect needs exactly one of --dataset, --checkpoint\n";
      return 1;
    }
    char* json = nullptr;
    lirec_status s;
    if (!in_dataset.empty()) {
      DatasetHandle ds;
      s = lirec_dataset_open(in_dataset.c_str(), &ds.ds);
      if (s != LIREC_OK) return report_failure(s);
      s = lirec_dataset_summary(ds.ds, &json);
    } else {
      s = lirec_checkpoint_summary(in_ckpt.c_str(), &json);
    }
    if (s != LIREC_OK) return report_failure(s);
    std::cout << take(json) << "\n";
    return 0;
  }

  return 0;
}
