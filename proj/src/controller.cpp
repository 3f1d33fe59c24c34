#include "gazeintent/controller.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gazeintent/errors.hpp"
#include "gazeintent/rng.hpp"

namespace gazeintent {

namespace {

constexpr std::array<const char*, kModeCount> kModeNames{"FollowIntention", "Rebel", "Random"};
constexpr std::array<const char*, 3> kPhaseNames{"Crouched", "Deciding", "Committed"};

std::vector<ObjectId> keys(const Prediction& p) {
  std::vector<ObjectId> out;
  out.reserve(p.per_candidate.size());
  for (const auto& kv : p.per_candidate) out.push_back(kv.first);
  return out;
}

void open_cycle(ControllerState& s, const Prediction& p, Mode mode, std::mt19937_64& rng) {
  s.phase = Phase::Deciding;
  s.elapsed = 0.0;
  s.committed = -1;
  s.cycle_mode = mode;
  s.cycle_candidates = keys(p);
  // drawn for every mode so the stream does not depend on the mode
  std::uniform_int_distribution<std::size_t> any(0, s.cycle_candidates.size() - 1);
  s.random_draw = s.cycle_candidates[any(rng)];
  ++s.cycle;
}

}  // namespace

const char* to_string(Mode m) { return kModeNames.at(static_cast<std::size_t>(m)); }

Mode mode_from_string(const std::string& text) {
  if (text == "FollowIntention" || text == "follow") return Mode::FollowIntention;
  if (text == "Rebel" || text == "rebel") return Mode::Rebel;
  if (text == "Random" || text == "random") return Mode::Random;
  throw ConfigError("unknown behaviour mode '" + text + "'");
}

const char* to_string(Phase p) { return kPhaseNames.at(static_cast<std::size_t>(p)); }

void ControllerConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
  if (!(decision_cap > 0.0) || !std::isfinite(decision_cap)) throw ConfigError("decision_cap must be positive");
  if (!(tip_speed > 0.0) || !std::isfinite(tip_speed)) throw ConfigError("tip_speed must be positive");
}

nlohmann::json controller_config_to_json(const ControllerConfig& c) {
  return {{"threshold", c.threshold}, {"decision_cap", c.decision_cap}, {"tip_speed", c.tip_speed}};
}

ControllerConfig controller_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("controller settings must be an object");
  ControllerConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "threshold") c.threshold = v.get<double>();
      else if (key == "decision_cap") c.decision_cap = v.get<double>();
      else if (key == "tip_speed") c.tip_speed = v.get<double>();
      else throw ConfigError("unknown controller setting '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed controller settings: ") + e.what());
  }
  c.validate();
  return c;
}

Vec2 crouch_position(const BoardLayout& layout) {
  double stock_x = 0.0;
  for (const auto& p : layout.stock_slots) stock_x += p.x;
  stock_x /= static_cast<double>(layout.stock_slots.size());
  double min_x = layout.pattern_cells.front().x;
  double y = 0.0;
  for (const auto& p : layout.pattern_cells) {
    min_x = std::min(min_x, p.x);
    y += p.y;
  }
  y /= static_cast<double>(layout.pattern_cells.size());
  return {0.5 * (stock_x + min_x), y};
}

ControllerState initial_controller(const BoardLayout& layout) {
  ControllerState s;
  s.tip = crouch_position(layout);
  return s;
}

ObjectId commit_target(const Prediction& prediction, Mode mode, ObjectId random_draw) {
  const auto& probs = prediction.per_candidate;
  if (probs.empty()) throw NoCandidatesError("prediction has no candidates");
  if (probs.size() == 1) return probs.begin()->first;
  switch (mode) {
    case Mode::FollowIntention: {
      auto best = probs.begin();
      for (auto it = probs.begin(); it != probs.end(); ++it)
        if (it->second > best->second) best = it;
      return best->first;
    }
    case Mode::Rebel: {
      auto worst = probs.begin();
      for (auto it = probs.begin(); it != probs.end(); ++it)
        if (it->second < worst->second) worst = it;
      return worst->first;
    }
    case Mode::Random:
      return random_draw;
  }
  return probs.begin()->first;
}

std::optional<Vec2> step(ControllerState& state, const Prediction& prediction, Mode mode, double dt,
                         std::mt19937_64& rng, const ControllerConfig& cfg, const BoardLayout& layout) {
  if (!(dt > 0.0)) throw ConfigError("controller step needs dt > 0");
  if (prediction.per_candidate.empty()) throw NoCandidatesError("prediction has no candidates");

  if (state.phase == Phase::Crouched || keys(prediction) != state.cycle_candidates) open_cycle(state, prediction, mode, rng);
  if (state.phase == Phase::Deciding) {
    state.elapsed = std::min(state.elapsed + dt, cfg.decision_cap);
    double best = 0.0;
    for (const auto& kv : prediction.per_candidate) best = std::max(best, kv.second);
    if (best >= cfg.threshold || state.elapsed >= cfg.decision_cap) {
      state.committed = commit_target(prediction, state.cycle_mode, state.random_draw);
      state.phase = Phase::Committed;
      state.tip_target = object_position(layout, state.committed);
    }
  }
  if (state.phase == Phase::Committed) return state.tip_target;
  return std::nullopt;
}

void reset_cycle(ControllerState& state, const BoardLayout& layout) {
  state.phase = Phase::Crouched;
  state.elapsed = 0.0;
  state.committed = -1;
  state.random_draw = -1;
  state.cycle_candidates.clear();
  state.tip_target = crouch_position(layout);
}

void move_tip(ControllerState& state, double dt, const ControllerConfig& cfg, const BoardLayout& layout) {
  if (!(dt > 0.0)) throw ConfigError("move_tip needs dt > 0");
  Vec2 goal = state.tip_target.value_or(crouch_position(layout));
  Vec2 d = goal - state.tip;
  double dist = d.norm();
  double reach = cfg.tip_speed * dt;
  if (dist <= reach) {
    state.tip = goal;
  } else {
    state.tip = state.tip + (reach / dist) * d;
  }
}

nlohmann::json telemetry_record(double t, const ControllerState& state, Mode mode) {
  return {{"t", t},
          {"phase", to_string(state.phase)},
          {"committed", state.committed},
          {"tip", {state.tip.x, state.tip.y}},
          {"mode", to_string(mode)}};
}

std::size_t corrective_move_count(std::span<const ActionRecord> log) {
  return static_cast<std::size_t>(
      std::count_if(log.begin(), log.end(), [](const ActionRecord& a) { return a.committed >= 0 && a.committed != a.executed; }));
}

namespace {

struct BoardOutcome {
  double completion_time = 0.0;
  std::vector<std::vector<ActionRecord>> records;  // per mode
  std::vector<std::vector<double>> commit_times;   // per mode
};

BoardOutcome run_board(const PredictorModels& models, std::span<const Mode> modes, std::uint64_t board_seed,
                       std::uint64_t stream_seed, const SimulationConfig& cfg, const BoardLayout& layout) {
  const auto& acfg = cfg.predictor.attention;
  BoardRun run = play_board(board_seed, stream_seed, cfg.user, layout, acfg);
  BoardOutcome out;
  out.records.resize(modes.size());
  out.commit_times.resize(modes.size());
  if (run.actions.empty()) return out;
  out.completion_time = run.actions.back().action_time;

  std::vector<ControllerState> ctl(modes.size(), initial_controller(layout));
  std::vector<std::mt19937_64> rngs;
  for (std::size_t m = 0; m < modes.size(); ++m)
    rngs.emplace_back(derive_seed(stream_seed, {0x73696dULL, static_cast<std::uint64_t>(modes[m])}));

  GazeTrace trace(trace_capacity_for(acfg.window + 1.0, acfg));
  std::size_t next = 0;  // next gaze sample to push
  double last_tick = -1.0;
  for (const auto& action : run.actions) {
    for (auto& c : ctl) reset_cycle(c, layout);
    const std::int64_t from = frame_index(action.start_time, acfg);
    const std::int64_t to = frame_index(action.action_time, acfg);
    for (std::int64_t k = from; k <= to; ++k) {
      const double t = static_cast<double>(k) * acfg.frame;
      while (next < run.gaze.size() && run.gaze[next].t <= t + 1e-9) trace.push(run.gaze[next++]);
      const double dt = last_tick < 0.0 ? cfg.tick : std::max(t - last_tick, 1e-9);
      last_tick = t;
      bool any_open = std::any_of(ctl.begin(), ctl.end(), [](const ControllerState& c) { return c.phase != Phase::Committed; });
      if (any_open && !trace.empty()) {
        Prediction p = predict(models, trace, action.before, action.kind, t, cfg.predictor, layout);
        for (std::size_t m = 0; m < modes.size(); ++m) {
          if (ctl[m].phase == Phase::Committed) continue;
          step(ctl[m], p, modes[m], dt, rngs[m], cfg.controller, layout);
          if (ctl[m].phase == Phase::Committed) out.commit_times[m].push_back(ctl[m].elapsed);
        }
      }
      for (auto& c : ctl) move_tip(c, dt, cfg.controller, layout);
    }
    for (std::size_t m = 0; m < modes.size(); ++m) {
      out.records[m].push_back({action.action_time, action.kind, action.target, ctl[m].committed});
    }
  }
  return out;
}

}  // namespace

SimulationReport simulate(const PredictorModels& models, std::span<const Mode> modes, std::size_t boards,
                          std::uint64_t seed, const SimulationConfig& cfg, const BoardLayout& layout) {
  cfg.user.validate();
  cfg.predictor.validate();
  cfg.controller.validate();
  if (!(cfg.tick > 0.0)) throw ConfigError("tick must be positive");

  std::vector<BoardOutcome> outcomes(boards);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(boards); ++b) {
    auto ub = static_cast<std::uint64_t>(b);
    outcomes[static_cast<std::size_t>(b)] =
        run_board(models, modes, corpus_board_seed(seed, ub), corpus_stream_seed(seed, ub), cfg, layout);
  }

  SimulationReport report;
  report.boards = boards;
  report.seed = seed;
  for (const auto& o : outcomes) report.mean_completion_time += o.completion_time;
  if (boards) report.mean_completion_time /= static_cast<double>(boards);
  for (std::size_t m = 0; m < modes.size(); ++m) {
    ModeReport r;
    r.mode = modes[m];
    double rate_sum = 0.0;
    std::size_t rated = 0;
    double commit_sum = 0.0;
    std::size_t commits = 0;
    for (const auto& o : outcomes) {
      std::size_t committed = 0;
      std::size_t matches = 0;
      for (const auto& a : o.records[m]) {
        ++r.actions;
        if (a.committed < 0) continue;
        ++committed;
        if (a.committed == a.executed) ++matches;
      }
      r.committed += committed;
      r.matches += matches;
      r.corrective_moves += corrective_move_count(o.records[m]);
      if (committed) {
        rate_sum += static_cast<double>(matches) / static_cast<double>(committed);
        ++rated;
      }
      for (double ct : o.commit_times[m]) {
        commit_sum += ct;
        r.max_time_to_commit = std::max(r.max_time_to_commit, ct);
        ++commits;
      }
    }
    r.match_rate = rated ? rate_sum / static_cast<double>(rated) : 0.0;
    r.mean_time_to_commit = commits ? commit_sum / static_cast<double>(commits) : 0.0;
    report.modes.push_back(r);
  }
  return report;
}

std::vector<ActionRecord> simulate_board(const PredictorModels& models, Mode mode, std::uint64_t board_seed,
                                         std::uint64_t stream_seed, const SimulationConfig& cfg,
                                         const BoardLayout& layout) {
  const std::array<Mode, 1> one{mode};
  return run_board(models, one, board_seed, stream_seed, cfg, layout).records.front();
}

nlohmann::json simulation_to_json(const SimulationReport& r) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : r.modes) {
    modes.push_back({{"mode", to_string(m.mode)},
                     {"actions", m.actions},
                     {"committed", m.committed},
                     {"matches", m.matches},
                     {"match_rate", m.match_rate},
                     {"corrective_moves", m.corrective_moves},
                     {"mean_time_to_commit", m.mean_time_to_commit},
                     {"max_time_to_commit", m.max_time_to_commit}});
  }
  return {{"boards", r.boards}, {"seed", r.seed}, {"mean_completion_time", r.mean_completion_time}, {"modes", modes}};
}

}  // namespace gazeintent
