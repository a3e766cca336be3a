#include "synth/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace lirec {

namespace {

const char* kRelationshipNames15[] = {
    "stranger",  "friend",   "colleague", "lover",    "enemy",
    "acquaintance", "ex-lover", "boss",   "worker",   "manager",
    "customer",  "knows-by-reputation", "parent", "child", "sibling"};

std::string zero_pad(int value, int width) {
  std::ostringstream os;
  for (int digits = width - 1; digits > 0 && value < std::pow(10, digits); --digits) os << '0';
  os << value;
  return os.str();
}

void check_prob(double p, const std::string& name) {
  if (p < 0.0 || p > 1.0) fail_invalid("generator config: " + name + " must be in [0, 1]");
}

Tensor gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::zeros({rows, cols});
  for (double& x : t.data) x = scale * rng.normal();
  return t;
}

}  // namespace

void GenConfig::validate() const {
  if (movies < 1) fail_invalid("generator config: movies must be >= 1");
  if (characters_per_movie < 2)
    fail_invalid("generator config: characters_per_movie must be >= 2 (pairs need two)");
  if (clips_per_movie < 1) fail_invalid("generator config: clips_per_movie must be >= 1");
  if (num_interactions < 2) fail_invalid("generator config: num_interactions must be >= 2");
  if (num_relationships < 1) fail_invalid("generator config: num_relationships must be >= 1");
  if (dv < 1 || dd < 1 || dt < 1) fail_invalid("generator config: feature dims must be >= 1");
  if (noise_sigma < 0.0) fail_invalid("generator config: noise_sigma must be >= 0");
  check_prob(correlation_strength, "correlation_strength");
  check_prob(visual_only_fraction, "visual_only_fraction");
  check_prob(dialog_only_fraction, "dialog_only_fraction");
  if (visual_only_fraction + dialog_only_fraction > 1.0)
    fail_invalid("generator config: modality profile fractions exceed 1");
  check_prob(dialog_missing_prob, "dialog_missing_prob");
  check_prob(overlap_injection_rate, "overlap_injection_rate");
  check_prob(track_missing_prob, "track_missing_prob");
  check_prob(relationship_change_prob, "relationship_change_prob");
  check_prob(relationship_missing_prob, "relationship_missing_prob");
  check_prob(distractor_rate, "distractor_rate");
  check_prob(co_activity_prob, "co_activity_prob");
  check_prob(offset_free_fraction, "offset_free_fraction");
  if (role_scale < 0.0) fail_invalid("generator config: role_scale must be >= 0");
  if (active_pairs_per_movie < 0)
    fail_invalid("generator config: active_pairs_per_movie must be >= 0");
  if (relationship_prior != "uniform" && relationship_prior != "powerlaw")
    fail_invalid("generator config: relationship_prior must be \"uniform\" or \"powerlaw\"");
  if (!correlation && correlation_strength > 0.0 && num_interactions < num_relationships)
    fail_invalid(
        "generator config: grouped correlation needs num_interactions >= num_relationships");
  if (powerlaw_exponent < 0.0) fail_invalid("generator config: powerlaw_exponent must be >= 0");
  if (correlation) {
    if (correlation->ndim() != 2 ||
        correlation->rows() != static_cast<std::size_t>(num_interactions) ||
        correlation->cols() != static_cast<std::size_t>(num_relationships))
      fail_invalid("generator config: correlation matrix must be (num_interactions, num_relationships)");
    for (std::size_t r = 0; r < correlation->cols(); ++r) {
      double sum = 0.0;
      for (std::size_t a = 0; a < correlation->rows(); ++a) {
        double v = correlation->at(a, r);
        if (v < 0.0) fail_invalid("generator config: correlation entries must be >= 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        fail_invalid("generator config: correlation column " + std::to_string(r) +
                     " sums to " + std::to_string(sum) + ", expected 1");
    }
  }
}

GenConfig GenConfig::from_json(const Json& j) {
  JsonReader r(j, "generator config");
  GenConfig c;
  int version = r.get<int>("schema_version", 1);
  if (version != 1) fail_invalid("generator config: unsupported schema_version");
  c.movies = r.get<int>("movies", c.movies);
  c.characters_per_movie = r.get<int>("characters_per_movie", c.characters_per_movie);
  c.clips_per_movie = r.get<int>("clips_per_movie", c.clips_per_movie);
  c.num_interactions = r.get<int>("num_interactions", c.num_interactions);
  c.num_relationships = r.get<int>("num_relationships", c.num_relationships);
  c.dv = r.get<int>("dv", c.dv);
  c.dd = r.get<int>("dd", c.dd);
  c.dt = r.get<int>("dt", c.dt);
  c.noise_sigma = r.get<double>("noise_sigma", c.noise_sigma);
  c.correlation_strength = r.get<double>("correlation_strength", c.correlation_strength);
  if (r.has("correlation") && !r.raw("correlation").is_null()) {
    auto rows = r.raw("correlation").get<std::vector<std::vector<double>>>();
    Tensor m = Tensor::zeros({rows.size(), rows.empty() ? 0 : rows[0].size()});
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (rows[a].size() != m.cols())
        fail_invalid("generator config: ragged correlation matrix");
      for (std::size_t rr = 0; rr < rows[a].size(); ++rr) m.at(a, rr) = rows[a][rr];
    }
    c.correlation = std::move(m);
  }
  c.visual_only_fraction = r.get<double>("visual_only_fraction", c.visual_only_fraction);
  c.dialog_only_fraction = r.get<double>("dialog_only_fraction", c.dialog_only_fraction);
  c.dialog_missing_prob = r.get<double>("dialog_missing_prob", c.dialog_missing_prob);
  c.overlap_injection_rate = r.get<double>("overlap_injection_rate", c.overlap_injection_rate);
  c.track_missing_prob = r.get<double>("track_missing_prob", c.track_missing_prob);
  c.relationship_change_prob = r.get<double>("relationship_change_prob", c.relationship_change_prob);
  c.relationship_missing_prob = r.get<double>("relationship_missing_prob", c.relationship_missing_prob);
  c.distractor_rate = r.get<double>("distractor_rate", c.distractor_rate);
  c.co_activity_prob = r.get<double>("co_activity_prob", c.co_activity_prob);
  c.offset_free_fraction = r.get<double>("offset_free_fraction", c.offset_free_fraction);
  c.symmetric_roles = r.get<bool>("symmetric_roles", c.symmetric_roles);
  c.role_scale = r.get<double>("role_scale", c.role_scale);
  c.active_pairs_per_movie = r.get<int>("active_pairs_per_movie", c.active_pairs_per_movie);
  c.relationship_prior = r.get<std::string>("relationship_prior", c.relationship_prior);
  c.powerlaw_exponent = r.get<double>("powerlaw_exponent", c.powerlaw_exponent);
  c.seed = r.get<std::uint64_t>("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

Json GenConfig::to_json() const {
  Json j;
  j["schema_version"] = 1;
  j["movies"] = movies;
  j["characters_per_movie"] = characters_per_movie;
  j["clips_per_movie"] = clips_per_movie;
  j["num_interactions"] = num_interactions;
  j["num_relationships"] = num_relationships;
  j["dv"] = dv;
  j["dd"] = dd;
  j["dt"] = dt;
  j["noise_sigma"] = noise_sigma;
  j["correlation_strength"] = correlation_strength;
  if (correlation) {
    Json rows = Json::array();
    for (std::size_t a = 0; a < correlation->rows(); ++a) {
      Json row = Json::array();
      for (std::size_t r = 0; r < correlation->cols(); ++r) row.push_back(correlation->at(a, r));
      rows.push_back(std::move(row));
    }
    j["correlation"] = rows;
  }
  j["visual_only_fraction"] = visual_only_fraction;
  j["dialog_only_fraction"] = dialog_only_fraction;
  j["dialog_missing_prob"] = dialog_missing_prob;
  j["overlap_injection_rate"] = overlap_injection_rate;
  j["track_missing_prob"] = track_missing_prob;
  j["relationship_change_prob"] = relationship_change_prob;
  j["relationship_missing_prob"] = relationship_missing_prob;
  j["distractor_rate"] = distractor_rate;
  j["co_activity_prob"] = co_activity_prob;
  j["offset_free_fraction"] = offset_free_fraction;
  j["symmetric_roles"] = symmetric_roles;
  j["role_scale"] = role_scale;
  j["active_pairs_per_movie"] = active_pairs_per_movie;
  j["relationship_prior"] = relationship_prior;
  j["powerlaw_exponent"] = powerlaw_exponent;
  j["seed"] = seed;
  return j;
}

namespace {

Tensor build_correlation(const GenConfig& c) {
  if (c.correlation) return *c.correlation;
  std::size_t A = static_cast<std::size_t>(c.num_interactions);
  std::size_t R = static_cast<std::size_t>(c.num_relationships);
  Tensor m = Tensor::zeros({A, R});
  // disjoint grouping: class a belongs to relationship a mod R
  std::vector<std::size_t> group_size(R, 0);
  for (std::size_t a = 0; a < A; ++a) ++group_size[a % R];
  double s = c.correlation_strength;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t a = 0; a < A; ++a) {
      double disjoint = (a % R == r) ? 1.0 / static_cast<double>(group_size[r]) : 0.0;
      m.at(a, r) = s * disjoint + (1.0 - s) / static_cast<double>(A);
    }
  }
  return m;
}

std::vector<double> build_prior(const GenConfig& c) {
  std::size_t R = static_cast<std::size_t>(c.num_relationships);
  std::vector<double> prior(R, 1.0 / static_cast<double>(R));
  if (c.relationship_prior == "powerlaw") {
    double total = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      prior[r] = std::pow(static_cast<double>(r + 1), -c.powerlaw_exponent);
      total += prior[r];
    }
    for (double& p : prior) p /= total;
  }
  return prior;
}

Tensor noisy_rows(const Tensor& mean, std::size_t rows, double sigma, Rng& rng) {
  Tensor block = Tensor::zeros({rows, mean.size()});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < mean.size(); ++i)
      block.at(r, i) = mean.at(i) + sigma * rng.normal();
  return block;
}

Tensor matrix_row(const Tensor& m, std::size_t row) {
  Tensor v = Tensor::zeros({m.cols()});
  for (std::size_t i = 0; i < m.cols(); ++i) v.at(i) = m.at(row, i);
  return v;
}

Tensor add_vec(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) += b.at(i);
  return out;
}

}  // namespace

Generated generate(const GenConfig& config) {
  config.validate();
  std::size_t A = static_cast<std::size_t>(config.num_interactions);
  std::size_t R = static_cast<std::size_t>(config.num_relationships);

  Generated out;
  MovieDataset& ds = out.dataset;
  PlantedTruth& truth = out.truth;
  truth.config = config;

  for (std::size_t a = 0; a < A; ++a)
    ds.interactions.names.push_back("int_" + zero_pad(static_cast<int>(a), 3));
  if (R == 15) {
    for (const char* name : kRelationshipNames15) ds.relationships.names.push_back(name);
  } else {
    for (std::size_t r = 0; r < R; ++r)
      ds.relationships.names.push_back("rel_" + zero_pad(static_cast<int>(r), 2));
  }

  // class modality profiles: leading block visual-only, next dialog-only
  std::size_t n_visual = static_cast<std::size_t>(std::lround(config.visual_only_fraction * static_cast<double>(A)));
  std::size_t n_dialog = static_cast<std::size_t>(std::lround(config.dialog_only_fraction * static_cast<double>(A)));
  n_visual = std::min(n_visual, A);
  n_dialog = std::min(n_dialog, A - n_visual);
  truth.profile.resize(A);
  for (std::size_t a = 0; a < A; ++a) {
    truth.profile[a] = a < n_visual                ? ModalityProfile::visual_only
                       : a < n_visual + n_dialog   ? ModalityProfile::dialog_only
                                                   : ModalityProfile::both;
  }

  Rng root(config.seed);
  Rng proto_rng = root.fork("prototypes");
  truth.visual_prototypes = gaussian_matrix(A, static_cast<std::size_t>(config.dv), proto_rng);
  truth.dialog_prototypes = gaussian_matrix(A, static_cast<std::size_t>(config.dd), proto_rng);
  truth.actor_offsets =
      gaussian_matrix(A, static_cast<std::size_t>(config.dt), proto_rng, config.role_scale);
  truth.recipient_offsets =
      gaussian_matrix(A, static_cast<std::size_t>(config.dt), proto_rng, config.role_scale);
  if (config.symmetric_roles) truth.recipient_offsets = truth.actor_offsets;
  // some interactions leave no signature in the tracks; spread them evenly
  // over the class range so every modality profile gets its share
  std::size_t n_free = static_cast<std::size_t>(
      std::lround(config.offset_free_fraction * static_cast<double>(A)));
  for (std::size_t i = 0; i < n_free; ++i) {
    std::size_t a = i * A / n_free;
    for (std::size_t d = 0; d < truth.actor_offsets.cols(); ++d) {
      truth.actor_offsets.at(a, d) = 0.0;
      truth.recipient_offsets.at(a, d) = 0.0;
    }
  }
  for (std::size_t a = 0; a < A; ++a) {
    if (truth.profile[a] == ModalityProfile::dialog_only)
      for (std::size_t i = 0; i < truth.visual_prototypes.cols(); ++i)
        truth.visual_prototypes.at(a, i) = 0.0;
    if (truth.profile[a] == ModalityProfile::visual_only)
      for (std::size_t i = 0; i < truth.dialog_prototypes.cols(); ++i)
        truth.dialog_prototypes.at(a, i) = 0.0;
  }

  truth.correlation = build_correlation(config);
  truth.relationship_prior = build_prior(config);

  int chars = config.characters_per_movie;
  std::vector<PairId> all_pairs;
  for (int j = 0; j < chars; ++j)
    for (int k = 0; k < chars; ++k)
      if (j != k) all_pairs.push_back(PairId::full(j, k));

  for (int m = 0; m < config.movies; ++m) {
    Rng movie_rng = root.fork("movie").fork(static_cast<std::uint64_t>(m));
    Movie movie;
    movie.id = "m" + zero_pad(m, 3);
    for (int cidx = 0; cidx < chars; ++cidx)
      movie.characters.push_back(movie.id + "_char" + zero_pad(cidx, 2));

    truth.identity_prototypes.push_back(gaussian_matrix(
        static_cast<std::size_t>(chars), static_cast<std::size_t>(config.dt), movie_rng));
    const Tensor& identities = truth.identity_prototypes.back();

    // which ordered pairs act in this movie
    std::vector<PairId> active = all_pairs;
    if (config.active_pairs_per_movie > 0 &&
        static_cast<std::size_t>(config.active_pairs_per_movie) < active.size()) {
      movie_rng.shuffle(active);
      active.resize(static_cast<std::size_t>(config.active_pairs_per_movie));
      std::sort(active.begin(), active.end());
    }

    // planted relationships per active pair, with optional mid-timeline change
    struct PairPlan {
      int rel_first = 0;
      int rel_second = 0;  // == rel_first when no change
      bool hidden = false;
      int clips_seen = 0;
      int total_clips = 0;
    };
    std::vector<PairPlan> plans(active.size());
    for (std::size_t p = 0; p < active.size(); ++p) {
      plans[p].rel_first = static_cast<int>(movie_rng.multinomial(truth.relationship_prior));
      plans[p].rel_second = plans[p].rel_first;
      if (R > 1 && movie_rng.bernoulli(config.relationship_change_prob)) {
        int other = plans[p].rel_first;
        while (other == plans[p].rel_first)
          other = static_cast<int>(movie_rng.multinomial(truth.relationship_prior));
        plans[p].rel_second = other;
      }
      plans[p].hidden = movie_rng.bernoulli(config.relationship_missing_prob);
    }

    // first pass: which pair acts in each clip (so relationship changes can
    // split each pair's chronological clip list at its midpoint)
    std::vector<std::size_t> clip_pair(static_cast<std::size_t>(config.clips_per_movie));
    for (auto& cp : clip_pair) {
      cp = movie_rng.uniform_index(active.size());
      ++plans[cp].total_clips;
    }

    double cursor = 0.0;
    double prev_start = 0.0;
    const double duration = 4.0;
    const double gap = 1.0;
    for (int ci = 0; ci < config.clips_per_movie; ++ci) {
      std::size_t pi = clip_pair[static_cast<std::size_t>(ci)];
      PairPlan& plan = plans[pi];
      PairId pair = active[pi];

      ClipRecord clip;
      clip.movie = m;
      clip.id = movie.id + "_c" + zero_pad(ci, 5);

      double start = cursor;
      if (ci > 0 && movie_rng.bernoulli(config.overlap_injection_rate))
        start = prev_start + 0.5 * duration;  // IoU 1/3 with the previous clip
      clip.span = {start, start + duration};
      prev_start = start;
      cursor = start + duration + gap;

      bool second_half = plan.clips_seen * 2 >= plan.total_clips;
      ++plan.clips_seen;
      int rel = second_half ? plan.rel_second : plan.rel_first;
      if (!plan.hidden) clip.relationship = rel;

      Tensor col = Tensor::zeros({A});
      for (std::size_t a = 0; a < A; ++a)
        col.at(a) = truth.correlation.at(a, static_cast<std::size_t>(rel));
      int interaction = static_cast<int>(movie_rng.multinomial(col.data));
      clip.interaction = interaction;
      auto ia = static_cast<std::size_t>(interaction);

      std::size_t vis_rows = 2 + movie_rng.uniform_index(3);
      clip.visual = noisy_rows(matrix_row(truth.visual_prototypes, ia), vis_rows,
                               config.noise_sigma, movie_rng);

      bool class_has_dialog = truth.profile[ia] != ModalityProfile::visual_only;
      if (class_has_dialog && !movie_rng.bernoulli(config.dialog_missing_prob)) {
        std::size_t sent_rows = 1 + movie_rng.uniform_index(3);
        clip.dialog = noisy_rows(matrix_row(truth.dialog_prototypes, ia), sent_rows,
                                 config.noise_sigma, movie_rng);
      }

      bool drop_recipient = movie_rng.bernoulli(config.track_missing_prob);
      clip.gt_pair = drop_recipient ? PairId::singleton(pair.actor) : pair;
      if (config.symmetric_roles && !drop_recipient && movie_rng.bernoulli(0.5))
        clip.gt_pair = PairId::full(pair.recipient, pair.actor);

      std::size_t trk_rows = 2 + movie_rng.uniform_index(3);
      Tensor actor_mean = add_vec(matrix_row(identities, static_cast<std::size_t>(pair.actor)),
                                  matrix_row(truth.actor_offsets, ia));
      clip.tracks[pair.actor] = noisy_rows(actor_mean, trk_rows, config.noise_sigma, movie_rng);
      if (!drop_recipient) {
        Tensor recip_mean =
            add_vec(matrix_row(identities, static_cast<std::size_t>(pair.recipient)),
                    matrix_row(truth.recipient_offsets, ia));
        clip.tracks[pair.recipient] =
            noisy_rows(recip_mean, trk_rows, config.noise_sigma, movie_rng);
      }

      // co-activity: a second active pair performs the same interaction in the
      // background, so its tracks carry the same role offsets and the clip
      // label alone cannot tell the two pairs apart
      if (config.co_activity_prob > 0.0 &&
          movie_rng.bernoulli(config.co_activity_prob)) {
        std::vector<std::size_t> decoys;
        for (std::size_t q = 0; q < active.size(); ++q) {
          const PairId& d = active[q];
          if (d.actor == pair.actor || d.actor == pair.recipient ||
              d.recipient == pair.actor || d.recipient == pair.recipient)
            continue;
          decoys.push_back(q);
        }
        if (!decoys.empty()) {
          const PairId& d = active[decoys[movie_rng.uniform_index(decoys.size())]];
          Tensor actor_d = add_vec(matrix_row(identities, static_cast<std::size_t>(d.actor)),
                                   matrix_row(truth.actor_offsets, ia));
          clip.tracks[d.actor] = noisy_rows(actor_d, trk_rows, config.noise_sigma, movie_rng);
          Tensor recip_d =
              add_vec(matrix_row(identities, static_cast<std::size_t>(d.recipient)),
                      matrix_row(truth.recipient_offsets, ia));
          clip.tracks[d.recipient] =
              noisy_rows(recip_d, trk_rows, config.noise_sigma, movie_rng);
        }
      }

      for (int c = 0; c < chars; ++c) {
        if (clip.tracks.count(c)) continue;
        if (!movie_rng.bernoulli(config.distractor_rate)) continue;
        clip.tracks[c] = noisy_rows(matrix_row(identities, static_cast<std::size_t>(c)),
                                    trk_rows, config.noise_sigma, movie_rng);
      }

      movie.clip_indices.push_back(static_cast<int>(ds.clips.size()));
      ds.clips.push_back(std::move(clip));
    }
    ds.movies.push_back(std::move(movie));
  }

  ds.build_derived();
  return out;
}

OracleAccuracy bayes_oracle_accuracy(const MovieDataset& ds, const PlantedTruth& truth,
                                     std::size_t bundle_cap) {
  OracleAccuracy acc;
  std::size_t A = truth.visual_prototypes.rows();

  auto mean_rows = [](const Tensor& block) {
    Tensor mean = Tensor::zeros({block.cols()});
    for (std::size_t r = 0; r < block.rows(); ++r)
      for (std::size_t c = 0; c < block.cols(); ++c) mean.at(c) += block.at(r, c);
    for (std::size_t c = 0; c < block.cols(); ++c)
      mean.at(c) /= static_cast<double>(block.rows());
    return mean;
  };
  auto sq_dist = [](const Tensor& a, const Tensor& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double diff = a.at(i) - b.at(i);
      d += diff * diff;
    }
    return d;
  };

  // interaction: nearest generative mean over the blocks the clip carries
  std::vector<int> predicted(ds.clips.size(), -1);
  for (std::size_t ci = 0; ci < ds.clips.size(); ++ci) {
    const ClipRecord& clip = ds.clips[ci];
    Tensor vis_mean = mean_rows(clip.visual);
    std::optional<Tensor> dlg_mean;
    if (clip.dialog) dlg_mean = mean_rows(*clip.dialog);
    double best = 0.0;
    int best_a = -1;
    for (std::size_t a = 0; a < A; ++a) {
      double cost = sq_dist(vis_mean, matrix_row(truth.visual_prototypes, a));
      if (dlg_mean) {
        // a visual-only class cannot emit dialog at all
        if (truth.profile[a] == ModalityProfile::visual_only)
          cost += 1e18;
        else
          cost += sq_dist(*dlg_mean, matrix_row(truth.dialog_prototypes, a));
      } else if (truth.profile[a] == ModalityProfile::dialog_only ||
                 truth.profile[a] == ModalityProfile::both) {
        // silence is possible (dialog-missing), no extra evidence either way
      }
      if (best_a < 0 || cost < best) {
        best = cost;
        best_a = static_cast<int>(a);
      }
    }
    predicted[ci] = best_a;
    ++acc.interaction_count;
    if (best_a == clip.interaction) acc.interaction += 1.0;
  }

  // pair given GT interaction: residual cost over every observed track
  for (std::size_t ci = 0; ci < ds.clips.size(); ++ci) {
    const ClipRecord& clip = ds.clips[ci];
    if (!clip.gt_pair || ds.candidate_pairs[ci].empty()) continue;
    const Tensor& identities = truth.identity_prototypes[static_cast<std::size_t>(clip.movie)];
    auto ia = static_cast<std::size_t>(clip.interaction);
    double best = 0.0;
    std::size_t best_p = 0;
    for (std::size_t pi = 0; pi < ds.candidate_pairs[ci].size(); ++pi) {
      const PairId& hyp = ds.candidate_pairs[ci][pi];
      double cost = 0.0;
      for (const auto& [character, block] : clip.tracks) {
        Tensor expected = matrix_row(identities, static_cast<std::size_t>(character));
        if (character == hyp.actor)
          expected = add_vec(expected, matrix_row(truth.actor_offsets, ia));
        else if (!hyp.is_singleton() && character == hyp.recipient)
          expected = add_vec(expected, matrix_row(truth.recipient_offsets, ia));
        cost += sq_dist(mean_rows(block), expected);
      }
      if (pi == 0 || cost < best) {
        best = cost;
        best_p = pi;
      }
    }
    ++acc.pair_count;
    if (ds.candidate_pairs[ci][best_p] == *clip.gt_pair) acc.pair_given_interaction += 1.0;
  }

  // relationship per labeled bundle: posterior over oracle-predicted clip
  // interactions through the planted conditionals
  Rng dummy(0);
  auto bundles = build_bundles(ds, bundle_cap, BundleMode::eval_uniform, dummy);
  std::size_t Rn = truth.relationship_prior.size();
  for (const PairBundle& bundle : bundles) {
    if (!bundle.relationship) continue;
    double best = 0.0;
    int best_r = -1;
    for (std::size_t r = 0; r < Rn; ++r) {
      double log_post = std::log(std::max(truth.relationship_prior[r], 1e-300));
      for (int gi : bundle.clips) {
        auto a = static_cast<std::size_t>(predicted[static_cast<std::size_t>(gi)]);
        log_post += std::log(std::max(truth.correlation.at(a, r), 1e-300));
      }
      if (best_r < 0 || log_post > best) {
        best = log_post;
        best_r = static_cast<int>(r);
      }
    }
    ++acc.relationship_count;
    if (best_r == *bundle.relationship) acc.relationship += 1.0;
  }

  if (acc.interaction_count) acc.interaction /= static_cast<double>(acc.interaction_count);
  if (acc.pair_count) acc.pair_given_interaction /= static_cast<double>(acc.pair_count);
  if (acc.relationship_count) acc.relationship /= static_cast<double>(acc.relationship_count);
  return acc;
}

namespace {

Json tensor_to_json(const Tensor& t) {
  Json j;
  j["shape"] = t.shape;
  j["data"] = t.data;
  return j;
}

Tensor tensor_from_json(const Json& j, const std::string& where) {
  JsonReader r(j, where);
  Tensor t;
  t.shape = r.require<std::vector<std::size_t>>("shape");
  t.data = r.require<std::vector<double>>("data");
  r.finish();
  if (t.data.size() != shape_numel(t.shape)) fail_io(where + ": tensor size/shape mismatch");
  return t;
}

}  // namespace

void write_truth(const std::filesystem::path& path, const PlantedTruth& truth) {
  Json j;
  j["schema_version"] = 1;
  j["config"] = truth.config.to_json();
  Json profile = Json::array();
  for (ModalityProfile p : truth.profile)
    profile.push_back(p == ModalityProfile::visual_only   ? "visual"
                      : p == ModalityProfile::dialog_only ? "dialog"
                                                          : "both");
  j["modality_profile"] = profile;
  j["visual_prototypes"] = tensor_to_json(truth.visual_prototypes);
  j["dialog_prototypes"] = tensor_to_json(truth.dialog_prototypes);
  j["actor_offsets"] = tensor_to_json(truth.actor_offsets);
  j["recipient_offsets"] = tensor_to_json(truth.recipient_offsets);
  Json ids = Json::array();
  for (const Tensor& t : truth.identity_prototypes) ids.push_back(tensor_to_json(t));
  j["identity_prototypes"] = ids;
  j["correlation"] = tensor_to_json(truth.correlation);
  j["relationship_prior"] = truth.relationship_prior;

  std::ofstream os(path);
  if (!os) fail_io("cannot write truth file: " + path.string());
  os << j.dump(2) << "\n";
  if (!os) fail_io("write failed for truth file: " + path.string());
}

PlantedTruth read_truth(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail_io("missing truth file: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  Json j = parse_json(buf.str(), path.string());

  JsonReader r(j, "truth file");
  int version = r.get<int>("schema_version", 1);
  if (version != 1) fail_io("truth file: unsupported schema_version");
  PlantedTruth truth;
  truth.config = GenConfig::from_json(r.raw("config"));
  for (const auto& name : r.require<std::vector<std::string>>("modality_profile"))
    truth.profile.push_back(name == "visual"   ? ModalityProfile::visual_only
                            : name == "dialog" ? ModalityProfile::dialog_only
                                               : ModalityProfile::both);
  truth.visual_prototypes = tensor_from_json(r.raw("visual_prototypes"), "visual_prototypes");
  truth.dialog_prototypes = tensor_from_json(r.raw("dialog_prototypes"), "dialog_prototypes");
  truth.actor_offsets = tensor_from_json(r.raw("actor_offsets"), "actor_offsets");
  truth.recipient_offsets = tensor_from_json(r.raw("recipient_offsets"), "recipient_offsets");
  for (const Json& t : r.raw("identity_prototypes"))
    truth.identity_prototypes.push_back(tensor_from_json(t, "identity_prototypes"));
  truth.correlation = tensor_from_json(r.raw("correlation"), "correlation");
  truth.relationship_prior = r.require<std::vector<double>>("relationship_prior");
  r.finish();
  return truth;
}

}  // namespace lirec
