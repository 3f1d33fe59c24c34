#pragma once

// One configuration document for every command: attention, SVM, synthetic
// user, controller and session settings. Unknown keys are rejected.

#include <string>

#include "json.hpp"

#include "gazeintent/session.hpp"

namespace gazeintent {

struct RunConfig {
  AttentionConfig attention;
  double threshold = 0.55;  ///< shared by the predictor and the controller
  SvmParams svm;
  GazeProfileParams user;
  ControllerConfig controller;
  double gripper_latency = 1.3;
  std::optional<double> trigger_radius;
  double trace_seconds = 8.0;
  int folds = 5;

  void validate() const;
  [[nodiscard]] PredictorConfig predictor() const;
  [[nodiscard]] SessionConfig session() const;
  [[nodiscard]] SimulationConfig simulation() const;
};

/// Keys: attention, threshold, svm, synthetic_user, controller, session
/// {gripper_latency, trigger_radius, trace_seconds}, folds. Throws ConfigError.
[[nodiscard]] RunConfig run_config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json run_config_to_json(const RunConfig& c);
/// Throws ConfigError when the file is unreadable or malformed.
[[nodiscard]] RunConfig load_run_config(const std::string& path);

}  // namespace gazeintent
