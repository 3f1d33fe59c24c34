#include "gazeintent/run_config.hpp"

#include <fstream>

#include "gazeintent/errors.hpp"

namespace gazeintent {

void RunConfig::validate() const {
  attention.validate();
  svm.validate();
  user.validate();
  session().validate();
  if (folds < 2) throw ConfigError("folds must be at least 2");
}

PredictorConfig RunConfig::predictor() const { return {attention, threshold}; }

SessionConfig RunConfig::session() const {
  SessionConfig s;
  s.predictor = predictor();
  s.controller = controller;
  s.controller.threshold = threshold;
  s.gripper_latency = gripper_latency;
  s.trigger_radius = trigger_radius;
  s.trace_seconds = trace_seconds;
  return s;
}

SimulationConfig RunConfig::simulation() const {
  SimulationConfig s;
  s.user = user;
  s.predictor = predictor();
  s.controller = controller;
  s.controller.threshold = threshold;
  s.tick = attention.frame;
  return s;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "attention") c.attention = attention_config_from_json(v);
      else if (key == "threshold") c.threshold = v.get<double>();
      else if (key == "svm") c.svm = svm_params_from_json(v);
      else if (key == "synthetic_user") c.user = params_from_json(v);
      else if (key == "controller") {
        if (v.contains("threshold")) throw ConfigError("set the decision threshold at top level");
        c.controller = controller_config_from_json(v);
      } else if (key == "session") {
        if (!v.is_object()) throw ConfigError("session settings must be an object");
        for (const auto& [sk, sv] : v.items()) {
          if (sk == "gripper_latency") c.gripper_latency = sv.get<double>();
          else if (sk == "trigger_radius") c.trigger_radius = sv.get<double>();
          else if (sk == "trace_seconds") c.trace_seconds = sv.get<double>();
          else throw ConfigError("unknown session setting '" + sk + "'");
        }
      } else if (key == "folds") c.folds = v.get<int>();
      else throw ConfigError("unknown configuration key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  c.controller.threshold = c.threshold;
  c.validate();
  return c;
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  nlohmann::json session{{"gripper_latency", c.gripper_latency}, {"trace_seconds", c.trace_seconds}};
  if (c.trigger_radius) session["trigger_radius"] = *c.trigger_radius;
  auto controller = controller_config_to_json(c.controller);
  controller.erase("threshold");
  return {{"attention", attention_config_to_json(c.attention)},
          {"threshold", c.threshold},
          {"svm", svm_params_to_json(c.svm)},
          {"synthetic_user", params_to_json(c.user)},
          {"controller", controller},
          {"session", session},
          {"folds", c.folds}};
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read configuration '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
  if (j.is_discarded()) throw ConfigError("configuration '" + path + "' is not valid JSON");
  return run_config_from_json(j);
}

}  // namespace gazeintent
