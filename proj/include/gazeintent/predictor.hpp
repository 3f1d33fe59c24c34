#pragma once

// Intent prediction: per-candidate attention features, the pick and place
// classifiers, and one-vs-all resolution into a single target.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazeintent/attention.hpp"
#include "gazeintent/svm.hpp"
#include "gazeintent/synthetic_user.hpp"
#include "gazeintent/task_world.hpp"

namespace gazeintent {

struct PredictorConfig {
  AttentionConfig attention;
  double threshold = 0.55;  ///< decided when the best probability reaches this

  /// Throws ConfigError unless 0 < threshold < 1 and the attention config is valid.
  void validate() const;
};

struct FeatureVector {
  ActionKind kind = ActionKind::Pick;
  std::vector<double> values;  ///< pick: F1 then F2 (600); place: F1 (300)
};

struct Prediction {
  double t = 0.0;
  ActionKind kind = ActionKind::Pick;
  std::map<ObjectId, double> per_candidate;
  ObjectId chosen = -1;
  bool decided = false;
};

/// Trained pick and place classifiers. A 300-wide pick model is treated as F1-only.
struct PredictorModels {
  SvmModel pick;
  SvmModel place;
};

/// The attention window (samples_per_window values) of one object.
using ProfileSource = std::function<std::span<const double>(ObjectId)>;

/// Windowed mean used to rank matching cells.
[[nodiscard]] double window_mean(std::span<const double> values);

/// Incomplete cell of the slot's type with the largest windowed mean (lowest id on ties), or -1.
[[nodiscard]] ObjectId matching_cell(const ProfileSource& profiles, const BoardState& board, int slot);

/// F1 (stock slot) then F2 (most attended incomplete matching cell, zeros if none).
/// Throws EmptySlotError for a slot outside the stock.
[[nodiscard]] FeatureVector pick_features(const ProfileSource& profiles, const BoardState& board, int slot,
                                          bool f1_only = false);
[[nodiscard]] FeatureVector pick_features(const GazeTrace& trace, const BoardState& board, int candidate_slot,
                                          double window_end, const AttentionConfig& cfg,
                                          const BoardLayout& layout = standard_layout());

/// Throws IllegalCandidateError unless the cell is incomplete and matches the held piece.
[[nodiscard]] FeatureVector place_features(const ProfileSource& profiles, const BoardState& board, int cell);
[[nodiscard]] FeatureVector place_features(const GazeTrace& trace, const BoardState& board, int candidate_cell,
                                           double window_end, const AttentionConfig& cfg,
                                           const BoardLayout& layout = standard_layout());

/// Objects whose profiles a prediction for `kind` reads: candidates plus, for
/// picks, every incomplete cell of a candidate's type. Ascending.
[[nodiscard]] std::vector<ObjectId> required_objects(const BoardState& board, ActionKind kind);

/// Labeled examples of one episode: the true target as chosen = 1, every other candidate as 0.
[[nodiscard]] std::vector<TrainingExample> episode_examples(const Episode& episode, const ProfileSource& profiles,
                                                            bool f1_only = false);

/// Examples of every episode of `kind`, windows ending at action_time - t_prior.
[[nodiscard]] std::vector<TrainingExample> build_dataset(std::span<const Episode> episodes, ActionKind kind,
                                                         double t_prior, const AttentionConfig& cfg,
                                                         bool f1_only = false,
                                                         const BoardLayout& layout = standard_layout());

/// Trains both classifiers on windows ending at the action (Platt-calibrated on an inner 20%).
/// Throws DegenerateDataError when a kind is missing.
[[nodiscard]] PredictorModels train_predictors(std::span<const Episode> episodes, const SvmParams& params,
                                               std::uint64_t seed, const AttentionConfig& cfg = AttentionConfig{},
                                               const BoardLayout& layout = standard_layout());

/// argmax with lowest-id tie-break; decided when the maximum reaches the threshold.
/// Throws NoCandidatesError on an empty map.
void resolve(Prediction& p, double threshold);

/// Throws NoCandidatesError when the board has no candidates for `kind`.
[[nodiscard]] Prediction predict(const PredictorModels& models, const ProfileSource& profiles, const BoardState& board,
                                 ActionKind kind, double t, double threshold);
[[nodiscard]] Prediction predict(const PredictorModels& models, const GazeTrace& trace, const BoardState& board,
                                 ActionKind kind, double window_end, const PredictorConfig& cfg,
                                 const BoardLayout& layout = standard_layout());

[[nodiscard]] nlohmann::json prediction_to_json(const Prediction& p);

/// `dir`/pick.json and `dir`/place.json.
void save_models(const PredictorModels& models, const std::string& dir);
/// Throws ModelLoadError.
[[nodiscard]] PredictorModels load_models(const std::string& dir);
/// Content hash over both models.
[[nodiscard]] std::string models_hash(const PredictorModels& models);

}  // namespace gazeintent
