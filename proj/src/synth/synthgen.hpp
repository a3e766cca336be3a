#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"
#include "data/dataset.hpp"
#include "util/jsonsafe.hpp"

namespace lirec {

// Which modalities carry a class's signal. Classes that never produce
// dialog model purely-physical actions; their clips ship no dialog block.
enum class ModalityProfile { visual_only, dialog_only, both };

struct GenConfig {
  int movies = 8;
  int characters_per_movie = 6;
  int clips_per_movie = 250;
  int num_interactions = 101;
  int num_relationships = 15;
  int dv = 32;
  int dd = 32;
  int dt = 32;
  double noise_sigma = 0.5;
  // P(interaction | relationship) columns; either an explicit matrix or an
  // interpolation between uniform (0) and disjoint per-relationship class
  // groups (1)
  double correlation_strength = 0.5;
  std::optional<Tensor> correlation;  // (|A|, |R|), column-stochastic
  double visual_only_fraction = 0.25;
  double dialog_only_fraction = 0.25;
  double dialog_missing_prob = 0.1;
  double overlap_injection_rate = 0.15;
  // knobs exercising optional dataset behaviors (all default off/neutral)
  double track_missing_prob = 0.0;       // recipient track dropped -> singleton pair
  double relationship_change_prob = 0.0; // pair's timeline splits into two segments
  double relationship_missing_prob = 0.0;// pair's relationship label hidden
  double distractor_rate = 0.5;          // chance each bystander gets a track
  double role_scale = 1.0;               // magnitude of actor/recipient offsets
  double co_activity_prob = 0.0;         // chance a second active pair also
                                         // performs the clip's interaction
  double offset_free_fraction = 0.0;     // fraction of interaction classes
                                         // whose tracks carry no role offsets
  bool symmetric_roles = false;          // both members get the same offsets
                                         // and the annotated order is arbitrary
  int active_pairs_per_movie = 0;        // 0 = all ordered pairs may act
  std::string relationship_prior = "uniform";  // or "powerlaw"
  double powerlaw_exponent = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  static GenConfig from_json(const Json& j);
  Json to_json() const;
};

// Everything the generator knows that the dataset does not expose: the
// generative means and the planted conditionals, enabling oracle evaluation.
struct PlantedTruth {
  GenConfig config;
  std::vector<ModalityProfile> profile;  // per interaction class
  Tensor visual_prototypes;              // (|A|, Dv); zero rows for dialog-only
  Tensor dialog_prototypes;              // (|A|, Dd); zero rows for visual-only
  Tensor actor_offsets;                  // (|A|, Dt)
  Tensor recipient_offsets;              // (|A|, Dt)
  std::vector<Tensor> identity_prototypes;  // per movie: (characters, Dt)
  Tensor correlation;                    // (|A|, |R|)
  std::vector<double> relationship_prior;
};

struct Generated {
  MovieDataset dataset;
  PlantedTruth truth;
};

Generated generate(const GenConfig& config);

struct OracleAccuracy {
  double interaction = 0.0;
  double pair_given_interaction = 0.0;
  double relationship = 0.0;
  std::size_t interaction_count = 0;
  std::size_t pair_count = 0;
  std::size_t relationship_count = 0;
};

// Plug-in Bayes classifier on the generative means; at sigma=0 it is exact,
// so it upper-bounds what any trained model can reach.
OracleAccuracy bayes_oracle_accuracy(const MovieDataset& ds, const PlantedTruth& truth,
                                     std::size_t bundle_cap = 18);

void write_truth(const std::filesystem::path& path, const PlantedTruth& truth);
PlantedTruth read_truth(const std::filesystem::path& path);

}  // namespace lirec
