#pragma once

// Synthetic participant for the block-copy task. Plays whole boards on a
// continuous 75 Hz gaze timeline and cuts labeled pick/place episodes out of
// it. Gaze patterns follow a small scenario catalog; timings follow normal
// episode-duration models.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazeintent/attention.hpp"
#include "gazeintent/task_world.hpp"

namespace gazeintent {

inline constexpr int kCorpusFormatVersion = 1;

enum class Scenario { OneDominant, Alternating, TrendingChoice, Distractor, FaultyTracking };
inline constexpr int kScenarioCount = 5;

[[nodiscard]] const char* to_string(Scenario s);
/// Throws DataError on an unknown tag.
[[nodiscard]] Scenario scenario_from_string(const std::string& text);

struct Interval {
  double min = 0.0;
  double max = 0.0;
};

struct IntRange {
  int min = 0;
  int max = 0;
};

struct NormalDist {
  double mean = 0.0;
  double sd = 0.0;
};

struct GazeProfileParams {
  Interval fixation_duration{0.2, 0.6};  ///< s
  double jitter_sigma = 12.0;            ///< mm, per sample and axis
  double saccade_duration = 0.04;        ///< s
  IntRange alternation_count{1, 3};      ///< stock/pattern round trips in Alternating episodes
  double distractor_prob = 0.25;         ///< chance a stray glance lands on a competing candidate
  double dropout_prob = 0.05;            ///< chance a fixation contains a tracking-loss burst
  NormalDist pick_duration{3.61, 1.36};
  NormalDist place_duration{4.65, 1.34};
  double min_duration = 1.0;              ///< sampled durations are clamped to at least this
  Interval final_fixation_lead{0.4, 0.8}; ///< last fixation on the target starts this long before the action
  double dominance = 0.7;                 ///< mean share of free fixations on the target (OneDominant and kin)
  double dominance_ramp = 0.3;            ///< target share rises from dominance - ramp to dominance + ramp
  double planning_prob = 0.4;             ///< pick episodes opening with a glance at the destination cell
  double lookahead_prob = 0.3;            ///< pick episodes whose eyes reach the destination before the trigger
  double gripper_latency = 1.3;           ///< s between trigger and the next episode
  double initial_scan = 8.5;              ///< s of free scanning before the first pick
  double history = 8.1;                   ///< s of gaze kept before each action
  /// Scenario weights indexed by Scenario; normalized when drawing.
  std::array<double, kScenarioCount> mix{0.55, 0.20, 0.15, 0.07, 0.03};

  /// Throws ConfigError on probabilities outside [0,1], non-positive durations or an all-zero mix.
  void validate() const;
};

[[nodiscard]] nlohmann::json params_to_json(const GazeProfileParams& p);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
[[nodiscard]] GazeProfileParams params_from_json(const nlohmann::json& j);

struct Episode {
  ActionKind kind = ActionKind::Pick;
  BoardState board;                 ///< state when the episode starts
  std::vector<ObjectId> candidates;  ///< ascending
  ObjectId true_target = -1;
  GazeTrace trace;                   ///< covers [action_time - history, action_time]
  double start_time = 0.0;
  double action_time = 0.0;
  Scenario scenario = Scenario::OneDominant;

  [[nodiscard]] double duration() const { return action_time - start_time; }
};

/// One executed user action on a played board.
struct UserAction {
  ActionKind kind = ActionKind::Pick;
  ObjectId target = -1;
  double start_time = 0.0;  ///< episode start (previous action + gripper latency)
  double action_time = 0.0;  ///< trigger time
  Scenario scenario = Scenario::OneDominant;
  BoardState before;
};

/// A whole board played from the first scan to completion.
struct BoardRun {
  BoardState initial;
  std::vector<UserAction> actions;
  std::vector<GazeSample> gaze;  ///< continuous, on the frame grid
};

struct Corpus {
  std::uint64_t seed = 0;
  GazeProfileParams params;
  std::vector<Episode> episodes;
};

/// Single episode with a freshly generated scanning lead-in.
/// Throws IllegalTargetError unless `true_target` is a legal candidate for `kind`.
[[nodiscard]] Episode sample_episode(const BoardState& board, ActionKind kind, ObjectId true_target, Scenario scenario,
                                     const GazeProfileParams& params, std::mt19937_64& rng,
                                     const BoardLayout& layout = standard_layout(),
                                     const AttentionConfig& cfg = AttentionConfig{});

/// Plays board `board_seed` to completion; scenario draws and timings come from `stream_seed`.
[[nodiscard]] BoardRun play_board(std::uint64_t board_seed, std::uint64_t stream_seed, const GazeProfileParams& params,
                                  const BoardLayout& layout = standard_layout(),
                                  const AttentionConfig& cfg = AttentionConfig{});

/// Episodes cut from a played board, in action order.
[[nodiscard]] std::vector<Episode> episodes_from_run(const BoardRun& run, const GazeProfileParams& params,
                                                     const AttentionConfig& cfg = AttentionConfig{});

/// Board seed and stream seed of board `index` in a corpus.
[[nodiscard]] std::uint64_t corpus_board_seed(std::uint64_t seed, std::uint64_t index);
[[nodiscard]] std::uint64_t corpus_stream_seed(std::uint64_t seed, std::uint64_t index);

/// Plays ceil(n / 38) boards (OpenMP-parallel across boards) and keeps the first n episodes.
/// Throws ConfigError when n_episodes == 0.
[[nodiscard]] Corpus generate_corpus(const GazeProfileParams& params, std::size_t n_episodes, std::uint64_t seed,
                                     const BoardLayout& layout = standard_layout(),
                                     const AttentionConfig& cfg = AttentionConfig{});

[[nodiscard]] nlohmann::json episode_to_json(const Episode& e);
[[nodiscard]] Episode episode_from_json(const nlohmann::json& j);
/// JSONL: header {version, seed, params, n_episodes}, then one episode per line.
void save_corpus(const Corpus& corpus, const std::string& path);
/// Throws DataError / VersionError on malformed files.
[[nodiscard]] Corpus load_corpus(const std::string& path);

}  // namespace gazeintent
