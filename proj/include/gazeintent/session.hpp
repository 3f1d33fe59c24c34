#pragma once

// Live session: ingests wire messages (gaze, trigger, rotate, set_mode, end),
// runs per-frame prediction and the behaviour controller, and keeps a
// replayable JSONL log of everything that went in and out.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazeintent/controller.hpp"
#include "gazeintent/hash.hpp"

namespace gazeintent {

inline constexpr int kSessionLogVersion = 1;

struct SessionConfig {
  PredictorConfig predictor;
  ControllerConfig controller;
  double gripper_latency = 1.3;        ///< s between trigger and the resulting pick/place
  std::optional<double> trigger_radius;  ///< mm; defaults to half the cell size
  double trace_seconds = 8.0;          ///< gaze history kept

  void validate() const;
};

[[nodiscard]] nlohmann::json session_config_to_json(const SessionConfig& c);
/// Keys: attention, threshold, controller, gripper_latency, trigger_radius, trace_seconds. Unknown keys throw ConfigError.
[[nodiscard]] SessionConfig session_config_from_json(const nlohmann::json& j);

struct SessionSummary {
  double t = 0.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::FollowIntention;
  int blocks_completed = 0;     ///< placements made during the session
  std::size_t picks = 0;
  std::size_t places = 0;
  std::size_t mismatches = 0;
  double elapsed = 0.0;         ///< s from the first to the last message
  double blocks_per_minute = 0.0;
  std::size_t corrective_moves = 0;
  bool complete = false;
  std::string board_hash;
  std::string telemetry_hash;   ///< over every probs and tip message

  friend bool operator==(const SessionSummary&, const SessionSummary&) = default;
};

[[nodiscard]] nlohmann::json summary_to_json(const SessionSummary& s);

class Session {
 public:
  /// Fresh board new_board(seed), controller crouched, empty trace.
  Session(std::uint64_t seed, Mode mode, std::shared_ptr<const PredictorModels> models,
          SessionConfig cfg = SessionConfig{}, BoardLayout layout = standard_layout());

  /// Applies one client message and returns the server responses.
  /// Throws ProtocolError on malformed or unknown messages and OutOfOrderError
  /// when t moves backwards; the session is unchanged in both cases.
  std::vector<nlohmann::json> ingest(const nlohmann::json& msg);

  /// Like ingest, but failures become a single {"type":"error"} response.
  std::vector<nlohmann::json> handle(const nlohmann::json& msg);

  /// Response to the opening handshake: layout, board and mode.
  [[nodiscard]] std::vector<nlohmann::json> start_responses();

  [[nodiscard]] const BoardState& board() const { return board_; }
  [[nodiscard]] const ControllerState& controller() const { return controller_; }
  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] double clock() const { return clock_; }
  [[nodiscard]] bool busy() const { return pending_.has_value(); }
  [[nodiscard]] const std::vector<ActionRecord>& actions() const { return actions_; }
  [[nodiscard]] SessionSummary summary() const;

  /// JSONL lines: header {version, seed, mode, model_hash, config}, then {"in":msg} / {"out":msg}
  /// entries; write_log appends an {"eof":entries} trailer.
  [[nodiscard]] const std::vector<nlohmann::json>& log() const { return log_; }
  void write_log(const std::string& path) const;

 private:
  struct Pending {
    ActionKind kind;
    ObjectId target;
    double due;
  };

  std::vector<nlohmann::json> dispatch(const nlohmann::json& msg, const std::string& type, double t);
  void resolve_pending(double t, std::vector<nlohmann::json>& out);
  void on_gaze(const nlohmann::json& msg, double t, std::vector<nlohmann::json>& out);
  void on_trigger(const nlohmann::json& msg, double t, std::vector<nlohmann::json>& out);
  nlohmann::json state_message(double t, const std::vector<int>& changed) const;
  void emit(std::vector<nlohmann::json>& out, nlohmann::json msg);

  std::uint64_t seed_;
  Mode mode_;
  std::shared_ptr<const PredictorModels> models_;
  SessionConfig cfg_;
  BoardLayout layout_;
  std::string model_hash_;
  BoardState board_;
  GazeTrace trace_;
  ControllerState controller_;
  std::mt19937_64 rng_;
  std::optional<Pending> pending_;
  std::vector<ActionRecord> actions_;
  std::size_t mismatches_ = 0;
  int placed_ = 0;
  double clock_ = 0.0;
  double first_t_ = -1.0;
  double last_gaze_t_ = -1.0;
  bool ended_ = false;
  Fnv1a telemetry_hash_;
  std::vector<nlohmann::json> log_;
};

struct ReplayResult {
  SessionSummary summary;
  bool identical = false;            ///< every recorded response reproduced exactly
  std::size_t messages = 0;          ///< inbound messages replayed
  std::optional<std::size_t> first_divergence;  ///< index of the first differing response
};

/// Reads a session log. Throws CorruptLogError on malformed or truncated files, VersionError on unknown versions.
[[nodiscard]] std::vector<nlohmann::json> read_log(const std::string& path);

/// Re-feeds the recorded inbound messages to a fresh session and compares every response.
/// Throws RefusedError when the models' hash differs from the one pinned in the log.
/// The session configuration recorded in the header is used.
[[nodiscard]] ReplayResult replay(const std::vector<nlohmann::json>& log, std::shared_ptr<const PredictorModels> models,
                                  const BoardLayout& layout = standard_layout());
[[nodiscard]] ReplayResult replay_file(const std::string& path, std::shared_ptr<const PredictorModels> models,
                                       const BoardLayout& layout = standard_layout());

/// Action records (executed vs committed target) of a session log.
[[nodiscard]] std::vector<ActionRecord> log_actions(const std::vector<nlohmann::json>& log);

}  // namespace gazeintent
