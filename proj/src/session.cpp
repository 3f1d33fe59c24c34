#include "gazeintent/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "gazeintent/errors.hpp"
#include "gazeintent/rng.hpp"

namespace gazeintent {

namespace {

using nlohmann::json;

constexpr std::uint64_t kControllerStream = 0x63746c;

double required_time(const json& msg) {
  auto it = msg.find("t");
  if (it == msg.end() || !it->is_number()) throw ProtocolError("message lacks a numeric 't'");
  double t = it->get<double>();
  if (!std::isfinite(t)) throw ProtocolError("message time must be finite");
  return t;
}

double number(const json& msg, const char* key) {
  auto it = msg.find(key);
  if (it == msg.end() || !it->is_number()) throw ProtocolError(std::string("message lacks a numeric '") + key + "'");
  return it->get<double>();
}

json error_message(double t, const std::string& code, const std::string& text) {
  return {{"type", "error"}, {"t", t}, {"code", code}, {"message", text}};
}

json layout_json(const BoardLayout& layout) {
  json stock = json::array();
  for (const auto& p : layout.stock_slots) stock.push_back({p.x, p.y});
  json cells = json::array();
  for (const auto& p : layout.pattern_cells) cells.push_back({p.x, p.y});
  return {{"stock_slots", stock}, {"pattern_cells", cells}, {"cell_size", layout.cell_size}};
}

// Nearest object of `ids` to `at` within `radius`, or -1.
ObjectId nearest_within(const BoardLayout& layout, const std::vector<ObjectId>& ids, Vec2 at, double radius) {
  ObjectId best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (ObjectId id : ids) {
    double d = distance(object_position(layout, id), at);
    if (d <= radius && d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

std::string board_hash(const BoardState& b) { return fnv1a_hex(board_to_json(b).dump()); }

}  // namespace

void SessionConfig::validate() const {
  predictor.validate();
  controller.validate();
  if (!(gripper_latency >= 0.0) || !std::isfinite(gripper_latency)) throw ConfigError("gripper_latency must be >= 0");
  if (trigger_radius && !(*trigger_radius > 0.0)) throw ConfigError("trigger_radius must be positive");
  if (!(trace_seconds >= predictor.attention.window)) throw ConfigError("trace_seconds must cover one window");
}

json session_config_to_json(const SessionConfig& c) {
  json j{{"attention", attention_config_to_json(c.predictor.attention)},
         {"threshold", c.predictor.threshold},
         {"controller", controller_config_to_json(c.controller)},
         {"gripper_latency", c.gripper_latency},
         {"trace_seconds", c.trace_seconds}};
  if (c.trigger_radius) j["trigger_radius"] = *c.trigger_radius;
  return j;
}

SessionConfig session_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("session settings must be an object");
  SessionConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "attention") c.predictor.attention = attention_config_from_json(v);
      else if (key == "threshold") c.predictor.threshold = v.get<double>();
      else if (key == "controller") c.controller = controller_config_from_json(v);
      else if (key == "gripper_latency") c.gripper_latency = v.get<double>();
      else if (key == "trigger_radius") c.trigger_radius = v.get<double>();
      else if (key == "trace_seconds") c.trace_seconds = v.get<double>();
      else throw ConfigError("unknown session setting '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed session settings: ") + e.what());
  }
  c.validate();
  return c;
}

json summary_to_json(const SessionSummary& s) {
  return {{"type", "summary"},
          {"t", s.t},
          {"seed", s.seed},
          {"mode", to_string(s.mode)},
          {"blocks_completed", s.blocks_completed},
          {"picks", s.picks},
          {"places", s.places},
          {"mismatches", s.mismatches},
          {"elapsed", s.elapsed},
          {"blocks_per_minute", s.blocks_per_minute},
          {"corrective_moves", s.corrective_moves},
          {"complete", s.complete},
          {"board_hash", s.board_hash},
          {"telemetry_hash", s.telemetry_hash}};
}

Session::Session(std::uint64_t seed, Mode mode, std::shared_ptr<const PredictorModels> models, SessionConfig cfg,
                 BoardLayout layout)
    : seed_(seed),
      mode_(mode),
      models_(std::move(models)),
      cfg_(std::move(cfg)),
      layout_(std::move(layout)),
      trace_(trace_capacity_for(cfg_.trace_seconds, cfg_.predictor.attention)),
      rng_(derive_seed(seed, {kControllerStream})) {
  if (!models_) throw ModelLoadError("session needs trained models");
  cfg_.validate();
  validate_layout(layout_);
  model_hash_ = models_hash(*models_);
  board_ = new_board(seed, layout_);
  controller_ = initial_controller(layout_);
  log_.push_back({{"version", kSessionLogVersion},
                  {"seed", seed_},
                  {"mode", to_string(mode_)},
                  {"model_hash", model_hash_},
                  {"config", session_config_to_json(cfg_)}});
}

void Session::emit(std::vector<json>& out, json msg) {
  const auto& type = msg.at("type").get_ref<const std::string&>();
  if (type == "probs" || type == "tip") telemetry_hash_.update(msg.dump());
  out.push_back(std::move(msg));
}

std::vector<json> Session::start_responses() {
  std::vector<json> out;
  emit(out, {{"type", "hello"},
             {"t", clock_},
             {"seed", seed_},
             {"mode", to_string(mode_)},
             {"model_hash", model_hash_},
             {"gripper_latency", cfg_.gripper_latency},
             {"layout", layout_json(layout_)}});
  emit(out, state_message(clock_, {}));
  return out;
}

json Session::state_message(double t, const std::vector<int>& changed) const {
  json held = board_.held ? json{{"type", board_.held->type.id}, {"orient", board_.held->orientation.quarter_turns}}
                          : json(nullptr);
  return {{"type", "state"},
          {"t", t},
          {"board", board_to_json(board_)},
          {"changed", changed},
          {"held", held},
          {"next", is_complete(board_) ? "done" : to_string(next_action_kind(board_))},
          {"busy", pending_.has_value()}};
}

std::vector<json> Session::ingest(const json& msg) {
  if (!msg.is_object()) throw ProtocolError("message must be a JSON object");
  auto type_it = msg.find("type");
  if (type_it == msg.end() || !type_it->is_string()) throw ProtocolError("message lacks a string 'type'");
  const std::string type = type_it->get<std::string>();
  const double t = required_time(msg);
  if (first_t_ >= 0.0 && t < clock_) {
    throw OutOfOrderError("message at t=" + std::to_string(t) + " precedes session clock " + std::to_string(clock_));
  }
  if (ended_) throw ProtocolError("session has ended");
  if (first_t_ < 0.0 && type != "start") throw ProtocolError("first message must be 'start'");

  log_.push_back({{"in", msg}});
  std::vector<json> out;
  try {
    out = dispatch(msg, type, t);
  } catch (...) {
    log_.pop_back();
    throw;
  }
  for (const auto& r : out) log_.push_back({{"out", r}});
  return out;
}

std::vector<json> Session::handle(const json& msg) {
  try {
    return ingest(msg);
  } catch (const OutOfOrderError& e) {
    return {error_message(clock_, "out_of_order", e.what())};
  } catch (const ProtocolError& e) {
    return {error_message(clock_, "protocol", e.what())};
  } catch (const Error& e) {
    return {error_message(clock_, "rejected", e.what())};
  } catch (const json::exception& e) {
    return {error_message(clock_, "protocol", e.what())};
  }
}

std::vector<json> Session::dispatch(const json& msg, const std::string& type, double t) {
  std::vector<json> out;
  if (type == "start") {
    if (first_t_ >= 0.0) throw ProtocolError("session already started");
    if (msg.contains("seed") && msg.at("seed").get<std::uint64_t>() != seed_) throw ProtocolError("seed does not match session");
    if (msg.contains("mode") && mode_from_string(msg.at("mode").get<std::string>()) != mode_) {
      throw ProtocolError("mode does not match session");
    }
    first_t_ = t;
    clock_ = t;
    return start_responses();
  }
  // Validate the message shape before changing any state.
  if (type == "gaze") {
    bool valid = msg.value("valid", true);
    if (valid) {
      number(msg, "x");
      number(msg, "y");
    }
  } else if (type == "set_mode") {
    auto it = msg.find("mode");
    if (it == msg.end() || !it->is_string()) throw ProtocolError("set_mode lacks a string 'mode'");
    try {
      (void)mode_from_string(it->get<std::string>());
    } catch (const ConfigError& e) {
      throw ProtocolError(e.what());
    }
  } else if (type == "trigger") {
    if (msg.contains("x") != msg.contains("y")) throw ProtocolError("trigger needs both 'x' and 'y' or neither");
    if (msg.contains("x")) {
      number(msg, "x");
      number(msg, "y");
    }
  } else if (type != "rotate" && type != "end") {
    throw ProtocolError("unknown message type '" + type + "'");
  }

  clock_ = t;
  resolve_pending(t, out);
  if (type == "gaze") {
    on_gaze(msg, t, out);
  } else if (type == "trigger") {
    on_trigger(msg, t, out);
  } else if (type == "rotate") {
    if (!board_.held) {
      emit(out, error_message(t, "no_held_piece", "nothing to rotate"));
    } else {
      board_ = rotate_held(board_);
      emit(out, state_message(t, {}));
    }
  } else if (type == "set_mode") {
    mode_ = mode_from_string(msg.at("mode").get<std::string>());
    emit(out, {{"type", "mode"}, {"t", t}, {"mode", to_string(mode_)}, {"applies", "next_cycle"}});
  } else if (type == "end") {
    ended_ = true;
    auto s = summary();
    emit(out, summary_to_json(s));
  }
  return out;
}

void Session::resolve_pending(double t, std::vector<json>& out) {
  if (!pending_ || t + 1e-9 < pending_->due) return;
  Pending p = *pending_;
  pending_.reset();
  std::string result;
  std::vector<int> changed;
  if (p.kind == ActionKind::Pick) {
    board_ = apply_pick(board_, object_index(p.target));
    result = "Picked";
  } else {
    auto [next, outcome] = apply_place(board_, object_index(p.target));
    board_ = next;
    result = to_string(outcome);
    if (outcome == PlaceOutcome::Completed) {
      ++placed_;
      changed.push_back(object_index(p.target));
    } else {
      ++mismatches_;
    }
  }
  reset_cycle(controller_, layout_);
  emit(out, {{"type", "outcome"}, {"t", t}, {"kind", to_string(p.kind)}, {"target", p.target}, {"result", result}});
  emit(out, state_message(t, changed));
  if (is_complete(board_)) emit(out, summary_to_json(summary()));
}

void Session::on_gaze(const json& msg, double t, std::vector<json>& out) {
  GazeSample s;
  s.t = t;
  s.valid = msg.value("valid", true);
  s.pos = s.valid ? Vec2{msg.at("x").get<double>(), msg.at("y").get<double>()}
                  : Vec2{msg.value("x", std::numeric_limits<double>::quiet_NaN()),
                         msg.value("y", std::numeric_limits<double>::quiet_NaN())};
  trace_.push(s);
  const double dt = last_gaze_t_ < 0.0 ? cfg_.predictor.attention.frame : t - last_gaze_t_;
  last_gaze_t_ = t;

  if (!pending_ && !is_complete(board_)) {
    ActionKind kind = next_action_kind(board_);
    Prediction p = predict(*models_, trace_, board_, kind, t, cfg_.predictor, layout_);
    json probs = prediction_to_json(p);
    probs["type"] = "probs";
    emit(out, std::move(probs));
    if (dt > 0.0) step(controller_, p, mode_, dt, rng_, cfg_.controller, layout_);
  }
  if (dt > 0.0) move_tip(controller_, dt, cfg_.controller, layout_);
  json tip = telemetry_record(t, controller_, mode_);
  tip["type"] = "tip";
  emit(out, std::move(tip));
}

void Session::on_trigger(const json& msg, double t, std::vector<json>& out) {
  if (pending_) {
    emit(out, error_message(t, "busy", "gripper is still moving"));
    return;
  }
  if (is_complete(board_)) {
    emit(out, error_message(t, "complete", "board is complete"));
    return;
  }
  Vec2 at;
  if (msg.contains("x")) {
    at = {msg.at("x").get<double>(), msg.at("y").get<double>()};
  } else {
    bool found = false;
    for (std::size_t i = trace_.size(); i-- > 0;) {
      if (trace_[i].valid && trace_[i].pos.finite()) {
        at = trace_[i].pos;
        found = true;
        break;
      }
    }
    if (!found) {
      emit(out, error_message(t, "no_target", "no position to trigger at"));
      return;
    }
  }
  const double radius = cfg_.trigger_radius.value_or(0.5 * layout_.cell_size);
  const ActionKind kind = next_action_kind(board_);
  std::vector<ObjectId> reachable;
  if (kind == ActionKind::Pick) {
    for (int s = 0; s < kStockSlots; ++s) reachable.push_back(stock_object(s));
  } else {
    for (int c = 0; c < kPatternCells; ++c) reachable.push_back(cell_object(c));
  }
  ObjectId target = nearest_within(layout_, reachable, at, radius);
  if (target < 0) {
    emit(out, error_message(t, "no_target", "nothing within reach of the trigger position"));
    return;
  }
  if (kind == ActionKind::Pick) {
    auto legal = legal_pick_candidates(board_);
    if (std::find(legal.begin(), legal.end(), object_index(target)) == legal.end()) {
      emit(out, error_message(t, "illegal", "that piece has no open cell"));
      return;
    }
  }
  actions_.push_back({t, kind, target, controller_.phase == Phase::Committed ? controller_.committed : -1});
  pending_ = Pending{kind, target, t + cfg_.gripper_latency};
  emit(out, {{"type", "pending"},
             {"t", t},
             {"kind", to_string(kind)},
             {"target", target},
             {"due", pending_->due},
             {"committed", actions_.back().committed}});
  if (cfg_.gripper_latency <= 0.0) resolve_pending(t, out);
}

SessionSummary Session::summary() const {
  SessionSummary s;
  s.t = clock_;
  s.seed = seed_;
  s.mode = mode_;
  s.blocks_completed = placed_;
  for (const auto& a : actions_) (a.kind == ActionKind::Pick ? s.picks : s.places) += 1;
  s.mismatches = mismatches_;
  s.elapsed = first_t_ >= 0.0 ? clock_ - first_t_ : 0.0;
  s.blocks_per_minute = s.elapsed > 0.0 ? 60.0 * placed_ / s.elapsed : 0.0;
  s.corrective_moves = corrective_move_count(actions_);
  s.complete = is_complete(board_);
  s.board_hash = board_hash(board_);
  s.telemetry_hash = telemetry_hash_.hex();
  return s;
}

void Session::write_log(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write session log '" + path + "'");
  for (const auto& line : log_) f << line.dump() << '\n';
  f << json{{"eof", log_.size()}}.dump() << '\n';
  if (!f) throw DataError("failed writing session log '" + path + "'");
}

std::vector<json> read_log(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open session log '" + path + "'");
  std::vector<json> lines;
  std::string line;
  bool closed = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (closed) throw CorruptLogError("content after the end marker");
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw CorruptLogError("unparseable line " + std::to_string(lines.size() + 1));
    }
    if (!j.is_object()) throw CorruptLogError("log lines must be objects");
    if (j.contains("eof")) {
      if (!j.at("eof").is_number_unsigned() || j.at("eof").get<std::size_t>() != lines.size()) {
        throw CorruptLogError("end marker does not match the number of entries");
      }
      closed = true;
      continue;
    }
    if (lines.empty()) {
      if (!j.contains("version") || !j.at("version").is_number_integer()) throw CorruptLogError("missing log header");
      if (j.at("version").get<int>() != kSessionLogVersion) {
        throw VersionError("unsupported session log version " + j.at("version").dump());
      }
      for (const char* k : {"seed", "mode", "model_hash", "config"})
        if (!j.contains(k)) throw CorruptLogError(std::string("log header lacks '") + k + "'");
    } else if (!(j.contains("in") || j.contains("out"))) {
      throw CorruptLogError("log entry is neither 'in' nor 'out'");
    }
    lines.push_back(std::move(j));
  }
  if (lines.empty()) throw CorruptLogError("empty session log");
  if (!closed) throw CorruptLogError("session log is truncated");
  return lines;
}

ReplayResult replay(const std::vector<json>& log, std::shared_ptr<const PredictorModels> models,
                    const BoardLayout& layout) {
  if (log.empty()) throw CorruptLogError("empty session log");
  const json& header = log.front();
  if (!models) throw ModelLoadError("replay needs models");
  if (header.at("model_hash").get<std::string>() != models_hash(*models)) {
    throw RefusedError("models do not match the hash pinned in the log");
  }
  SessionConfig cfg;
  Mode mode;
  std::uint64_t seed;
  try {
    cfg = session_config_from_json(header.at("config"));
    mode = mode_from_string(header.at("mode").get<std::string>());
    seed = header.at("seed").get<std::uint64_t>();
  } catch (const ConfigError& e) {
    throw CorruptLogError(std::string("bad log header: ") + e.what());
  } catch (const json::exception& e) {
    throw CorruptLogError(std::string("bad log header: ") + e.what());
  }
  Session session(seed, mode, std::move(models), cfg, layout);

  ReplayResult r;
  r.identical = true;
  std::size_t out_index = 0;
  std::size_t i = 1;
  while (i < log.size()) {
    if (!log[i].contains("in")) throw CorruptLogError("response without a preceding message");
    auto produced = session.handle(log[i].at("in"));
    ++r.messages;
    ++i;
    std::size_t k = 0;
    for (; i < log.size() && log[i].contains("out"); ++i, ++k) {
      if (k >= produced.size() || produced[k] != log[i].at("out")) {
        if (r.identical) r.first_divergence = out_index + k;
        r.identical = false;
      }
    }
    if (k != produced.size()) {
      if (r.identical) r.first_divergence = out_index + std::min(k, produced.size());
      r.identical = false;
    }
    out_index += k;
  }
  r.summary = session.summary();
  return r;
}

ReplayResult replay_file(const std::string& path, std::shared_ptr<const PredictorModels> models,
                         const BoardLayout& layout) {
  return replay(read_log(path), std::move(models), layout);
}

std::vector<ActionRecord> log_actions(const std::vector<json>& log) {
  std::vector<ActionRecord> out;
  for (const auto& line : log) {
    if (!line.contains("out")) continue;
    const auto& m = line.at("out");
    if (m.value("type", "") != "pending") continue;
    out.push_back({m.at("t").get<double>(), action_kind_from_string(m.at("kind").get<std::string>()),
                   m.at("target").get<ObjectId>(), m.at("committed").get<ObjectId>()});
  }
  return out;
}

}  // namespace gazeintent
