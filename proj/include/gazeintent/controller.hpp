#pragma once

// Robot behaviour: turns per-frame intention predictions into a committed
// reach target under one of three modes, and animates the tip toward it.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazeintent/predictor.hpp"

namespace gazeintent {

enum class Mode { FollowIntention, Rebel, Random };
inline constexpr int kModeCount = 3;

[[nodiscard]] const char* to_string(Mode m);
/// Accepts the canonical names and the short forms follow / rebel / random. Throws ConfigError.
[[nodiscard]] Mode mode_from_string(const std::string& text);

enum class Phase { Crouched, Deciding, Committed };

[[nodiscard]] const char* to_string(Phase p);

struct ControllerConfig {
  double threshold = 0.55;
  double decision_cap = 1.3;  ///< s
  double tip_speed = 300.0;   ///< mm/s

  /// Throws ConfigError on threshold outside (0,1) or non-positive cap/speed.
  void validate() const;
};

[[nodiscard]] nlohmann::json controller_config_to_json(const ControllerConfig& c);
/// Unknown keys throw ConfigError.
[[nodiscard]] ControllerConfig controller_config_from_json(const nlohmann::json& j);

/// Tip rest position between the stock column and the workspace.
[[nodiscard]] Vec2 crouch_position(const BoardLayout& layout);

struct ControllerState {
  Phase phase = Phase::Crouched;
  double elapsed = 0.0;                 ///< time spent deciding in the current cycle, <= decision_cap
  ObjectId committed = -1;              ///< valid while Committed
  Mode cycle_mode = Mode::FollowIntention;
  ObjectId random_draw = -1;            ///< Random's pick for this cycle, drawn when the cycle opens
  std::vector<ObjectId> cycle_candidates;
  std::uint64_t cycle = 0;              ///< cycles opened so far
  Vec2 tip;
  std::optional<Vec2> tip_target;
};

[[nodiscard]] ControllerState initial_controller(const BoardLayout& layout);

/// Advances the decision cycle by dt with the latest prediction. A new cycle
/// opens on the first step after a reset or when the candidate set changes;
/// `mode` is latched for the cycle at that point. Commits once max probability
/// reaches the threshold or the cap elapses. Returns the tip target while Committed.
std::optional<Vec2> step(ControllerState& state, const Prediction& prediction, Mode mode, double dt,
                         std::mt19937_64& rng, const ControllerConfig& cfg = ControllerConfig{},
                         const BoardLayout& layout = standard_layout());

/// Ends the cycle: back to Crouched with the tip target at the rest position.
void reset_cycle(ControllerState& state, const BoardLayout& layout = standard_layout());

/// Moves the tip toward its target (or the rest position) at tip_speed, without overshoot.
void move_tip(ControllerState& state, double dt, const ControllerConfig& cfg = ControllerConfig{},
              const BoardLayout& layout = standard_layout());

/// Target chosen on commit for `mode`; `random_draw` is used as-is for Random.
[[nodiscard]] ObjectId commit_target(const Prediction& prediction, Mode mode, ObjectId random_draw);

/// {"t","phase","committed","tip":[x,y],"mode"}
[[nodiscard]] nlohmann::json telemetry_record(double t, const ControllerState& state, Mode mode);

/// One executed user action and the controller's commitment at that moment (-1 when undecided).
struct ActionRecord {
  double t = 0.0;
  ActionKind kind = ActionKind::Pick;
  ObjectId executed = -1;
  ObjectId committed = -1;
};

/// Actions whose executed target differs from a commitment held at action time.
[[nodiscard]] std::size_t corrective_move_count(std::span<const ActionRecord> log);

// Closed-loop simulation against the non-adaptive synthetic user.

struct ModeReport {
  Mode mode = Mode::FollowIntention;
  std::size_t actions = 0;
  std::size_t committed = 0;   ///< actions with a commitment in place
  std::size_t matches = 0;     ///< commitments equal to the executed target
  std::size_t corrective_moves = 0;
  double match_rate = 0.0;     ///< mean over boards of matches / committed
  double mean_time_to_commit = 0.0;
  double max_time_to_commit = 0.0;
};

struct SimulationReport {
  std::size_t boards = 0;
  std::uint64_t seed = 0;
  double mean_completion_time = 0.0;  ///< s from first scan to the last placement
  std::vector<ModeReport> modes;
};

struct SimulationConfig {
  GazeProfileParams user;
  PredictorConfig predictor;
  ControllerConfig controller;
  double tick = 1.0 / 75.0;  ///< controller step; predictions are made once per tick
};

/// Plays `boards` boards with the synthetic user; every listed mode's
/// controller sees the same per-tick predictions. OpenMP-parallel over boards.
[[nodiscard]] SimulationReport simulate(const PredictorModels& models, std::span<const Mode> modes, std::size_t boards,
                                        std::uint64_t seed, const SimulationConfig& cfg = SimulationConfig{},
                                        const BoardLayout& layout = standard_layout());

/// Per-board action records of one mode, for inspection; same seeds as simulate.
[[nodiscard]] std::vector<ActionRecord> simulate_board(const PredictorModels& models, Mode mode,
                                                       std::uint64_t board_seed, std::uint64_t stream_seed,
                                                       const SimulationConfig& cfg = SimulationConfig{},
                                                       const BoardLayout& layout = standard_layout());

[[nodiscard]] nlohmann::json simulation_to_json(const SimulationReport& r);

}  // namespace gazeintent
