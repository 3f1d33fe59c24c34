#include "gazeintent/synthetic_user.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "gazeintent/errors.hpp"
#include "gazeintent/rng.hpp"

namespace gazeintent {

namespace {

constexpr std::array<const char*, kScenarioCount> kScenarioNames{"OneDominant", "Alternating", "TrendingChoice",
                                                                 "Distractor", "FaultyTracking"};
constexpr int kActionsPerBoard = 2 * (kPatternCells - kPreCompletedCells);
constexpr std::uint64_t kRenderStream = 0x72656e646572ULL;

struct Fixation {
  double start;
  double end;
  Vec2 point;
};

struct Burst {
  double start;
  double end;
};

struct Item {
  ObjectId object;
  double duration;
};

double uniform(std::mt19937_64& rng, Interval r) {
  return r.min + (r.max - r.min) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

template <typename T>
const T& pick_one(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

double quantize(double t, const AttentionConfig& cfg) { return static_cast<double>(frame_index(t, cfg)) * cfg.frame; }

// Fixation schedule and tracking-loss bursts of one continuous timeline.
class Timeline {
 public:
  Timeline(const BoardLayout& layout, const GazeProfileParams& params) : layout_(layout), params_(params) {}

  void fixate(ObjectId id, double start, double end, std::mt19937_64& rng) {
    fixations_.push_back({start, end, object_position(layout_, id)});
    if (chance(rng, params_.dropout_prob)) {
      double len = std::min(uniform(rng, {0.1, 0.3}), end - start);
      double at = start + (end - start - len) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      bursts_.push_back({at, at + len});
    }
  }

  void burst(double start, double end) { bursts_.push_back({start, end}); }

  // Lays `items` out from `start`, each followed by a saccade.
  double lay_out(const std::vector<Item>& items, double start, std::mt19937_64& rng) {
    double t = start;
    for (const auto& it : items) {
      fixate(it.object, t, t + it.duration, rng);
      t += it.duration + params_.saccade_duration;
    }
    return t;
  }

  // Free scanning over every object until `end`.
  void scan(double start, double end, std::mt19937_64& rng) {
    std::uniform_int_distribution<ObjectId> any(0, kStockSlots + kPatternCells - 1);
    double t = start;
    while (t < end) {
      double dur = std::min(uniform(rng, params_.fixation_duration), end - t);
      fixate(any(rng), t, t + dur, rng);
      t += dur + params_.saccade_duration;
    }
  }

  [[nodiscard]] std::vector<GazeSample> render(std::int64_t first_frame, std::int64_t last_frame, std::uint64_t seed,
                                               const AttentionConfig& cfg) {
    std::sort(fixations_.begin(), fixations_.end(), [](const Fixation& a, const Fixation& b) { return a.start < b.start; });
    std::sort(bursts_.begin(), bursts_.end(), [](const Burst& a, const Burst& b) { return a.start < b.start; });
    std::vector<Burst> merged;
    for (const auto& b : bursts_) {
      if (!merged.empty() && b.start <= merged.back().end) {
        merged.back().end = std::max(merged.back().end, b.end);
      } else {
        merged.push_back(b);
      }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, params_.jitter_sigma);
    std::vector<GazeSample> out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, last_frame - first_frame + 1)));
    std::size_t f = 0;
    std::size_t b = 0;
    for (std::int64_t k = first_frame; k <= last_frame; ++k) {
      double t = static_cast<double>(k) * cfg.frame;
      while (f + 1 < fixations_.size() && fixations_[f + 1].start <= t) ++f;
      Vec2 p = fixations_.empty() ? Vec2{} : fixations_[f].point;
      if (!fixations_.empty() && t > fixations_[f].end && f + 1 < fixations_.size()) {
        const auto& a = fixations_[f];
        const auto& n = fixations_[f + 1];
        double u = std::clamp((t - a.end) / std::max(n.start - a.end, 1e-9), 0.0, 1.0);
        p = a.point + u * (n.point - a.point);
      }
      while (b < merged.size() && merged[b].end < t) ++b;
      bool lost = b < merged.size() && merged[b].start <= t && t <= merged[b].end;
      // jitter is drawn for every frame so the stream does not depend on validity
      double jx = jitter(rng);
      double jy = jitter(rng);
      out.push_back({t, {p.x + jx, p.y + jy}, !lost});
    }
    return out;
  }

 private:
  const BoardLayout& layout_;
  const GazeProfileParams& params_;
  std::vector<Fixation> fixations_;
  std::vector<Burst> bursts_;
};

struct EpisodePlan {
  ActionKind kind;
  ObjectId target;
  ObjectId partner;  ///< pick: destination cell; place: source stock slot
  std::vector<ObjectId> candidates;
  Scenario scenario;
};

ObjectId nearest_competitor(const BoardLayout& layout, ObjectId target, const std::vector<ObjectId>& competitors) {
  Vec2 at = object_position(layout, target);
  return *std::min_element(competitors.begin(), competitors.end(), [&](ObjectId a, ObjectId b) {
    return distance(object_position(layout, a), at) < distance(object_position(layout, b), at);
  });
}

// Builds one episode's fixations starting at `start`; returns the action time.
double plan_episode(Timeline& timeline, const EpisodePlan& plan, double start, const GazeProfileParams& params,
                    const BoardLayout& layout, const AttentionConfig& cfg, std::mt19937_64& rng) {
  const bool pick = plan.kind == ActionKind::Pick;
  const NormalDist nd = pick ? params.pick_duration : params.place_duration;
  double duration = std::max(params.min_duration, std::normal_distribution<double>(nd.mean, nd.sd)(rng));
  const double action = quantize(start + duration, cfg);
  const double lead = std::min(uniform(rng, params.final_fixation_lead), 0.8 * (action - start));
  const double body_end = action - lead;
  const double body = body_end - start;
  const double sac = params.saccade_duration;

  std::vector<ObjectId> competitors;
  for (ObjectId c : plan.candidates)
    if (c != plan.target) competitors.push_back(c);
  std::vector<ObjectId> bystanders;
  for (ObjectId id = 0; id < kStockSlots + kPatternCells; ++id) {
    if (std::find(plan.candidates.begin(), plan.candidates.end(), id) == plan.candidates.end()) bystanders.push_back(id);
  }
  auto glance = [&]() -> ObjectId {
    if (!competitors.empty() && (bystanders.empty() || chance(rng, params.distractor_prob))) return pick_one(competitors, rng);
    return pick_one(bystanders, rng);
  };
  auto fix_dur = [&] { return uniform(rng, params.fixation_duration); };

  // Tail: scenario-specific sequence ending at the final fixation.
  std::vector<Item> tail;
  if (plan.scenario == Scenario::Alternating) {
    int rounds = std::uniform_int_distribution<int>(params.alternation_count.min, params.alternation_count.max)(rng) + 1;
    for (int r = 0; r < rounds; ++r) {
      if (pick) {
        ObjectId stock = pick_one(plan.candidates, rng);
        tail.push_back({plan.partner, fix_dur()});
        tail.push_back({stock, fix_dur()});
      } else {
        tail.push_back({plan.partner, fix_dur()});
        tail.push_back({plan.target, fix_dur()});
      }
    }
  }
  double tail_time = 0.0;
  for (const auto& it : tail) tail_time += it.duration + sac;
  while (!tail.empty() && tail_time > body) {
    tail_time -= tail.front().duration + sac;
    tail.erase(tail.begin());
  }

  // Head: free fixations filling the remaining body time. Attention drifts
  // onto the target as the action approaches.
  std::vector<Item> head;
  const double head_time = body - tail_time;
  const bool distract = plan.scenario == Scenario::Distractor && !competitors.empty();
  const double distract_at = uniform(rng, {0.0, 1.0});
  bool distracted = false;
  double t = 0.0;
  for (int i = 0; t < head_time; ++i) {
    double u = head_time > 0.0 ? t / head_time : 1.0;
    ObjectId id;
    double dur = fix_dur();
    if (pick && i == 0 && plan.scenario != Scenario::Alternating && chance(rng, params.planning_prob)) {
      id = plan.partner;
    } else if (distract && !distracted && u >= distract_at) {
      // a neighbouring candidate gets a block as long as two fixations
      id = nearest_competitor(layout, plan.target, competitors);
      dur += fix_dur();
      distracted = true;
    } else if (plan.scenario == Scenario::TrendingChoice) {
      id = (competitors.empty() || chance(rng, 0.15 + 0.75 * u)) ? plan.target : pick_one(competitors, rng);
    } else {
      double p = std::clamp(params.dominance + params.dominance_ramp * (2.0 * u - 1.0), 0.0, 1.0);
      id = chance(rng, p) ? plan.target : glance();
    }
    if (t + dur + sac >= head_time) dur = std::max(head_time - t - sac, 0.0);
    head.push_back({id, dur});
    t += dur + sac;
  }

  // OneDominant holds the target for at least 60% of the in-episode window.
  if (plan.scenario == Scenario::OneDominant) {
    const double from = std::max(start, action - cfg.window);
    auto share = [&] {
      double on = action - body_end;
      double s = start;
      for (const auto& it : head) {
        if (it.object == plan.target) on += std::max(0.0, s + it.duration - std::max(s, from));
        s += it.duration + sac;
      }
      return on / (action - from);
    };
    for (std::size_t k = head.size(); k-- > 0 && share() < 0.6;) head[k].object = plan.target;
  }

  double at = timeline.lay_out(head, start, rng);
  timeline.lay_out(tail, at, rng);
  // Final fixation runs through the gripper latency (eyes follow the effector),
  // unless on a pick the eyes move ahead to the destination before the trigger.
  const bool look_ahead = pick && (plan.scenario == Scenario::Alternating || chance(rng, params.lookahead_prob));
  if (look_ahead && lead > sac + 0.1) {
    double on_target = std::min(fix_dur(), lead - sac - 0.05);
    timeline.fixate(plan.target, body_end, body_end + on_target, rng);
    timeline.fixate(plan.partner, body_end + on_target + sac, action + params.gripper_latency - sac, rng);
  } else {
    timeline.fixate(plan.target, body_end, action + params.gripper_latency - sac, rng);
  }

  if (plan.scenario == Scenario::FaultyTracking) {
    double len = uniform(rng, {0.4, 1.2});
    double lo = std::max(start, action - 2.0);
    double from = lo + std::max(0.0, action - len - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    timeline.burst(from, std::min(from + len, action));
  }
  return action;
}

Scenario draw_scenario(const GazeProfileParams& params, std::mt19937_64& rng) {
  std::discrete_distribution<int> d(params.mix.begin(), params.mix.end());
  return static_cast<Scenario>(d(rng));
}

std::vector<GazeSample> slice(const std::vector<GazeSample>& gaze, double from, double to) {
  auto lo = std::lower_bound(gaze.begin(), gaze.end(), from - 1e-9,
                             [](const GazeSample& s, double t) { return s.t < t; });
  auto hi = std::upper_bound(gaze.begin(), gaze.end(), to + 1e-9,
                             [](double t, const GazeSample& s) { return t < s.t; });
  return {lo, hi};
}

GazeTrace to_trace(const std::vector<GazeSample>& samples) {
  GazeTrace trace(std::max<std::size_t>(samples.size(), 1));
  for (const auto& s : samples) trace.push(s);
  return trace;
}

void check_range(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0,1]");
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

const char* to_string(Scenario s) { return kScenarioNames.at(static_cast<std::size_t>(s)); }

Scenario scenario_from_string(const std::string& text) {
  for (int i = 0; i < kScenarioCount; ++i)
    if (text == kScenarioNames[static_cast<std::size_t>(i)]) return static_cast<Scenario>(i);
  throw DataError("unknown scenario '" + text + "'");
}

void GazeProfileParams::validate() const {
  check_positive(fixation_duration.min, "fixation_duration.min");
  if (fixation_duration.max < fixation_duration.min) throw ConfigError("fixation_duration max < min");
  if (!(jitter_sigma >= 0.0)) throw ConfigError("jitter_sigma must be non-negative");
  check_positive(saccade_duration, "saccade_duration");
  if (alternation_count.min < 1 || alternation_count.max < alternation_count.min)
    throw ConfigError("alternation_count must be a range of positive integers");
  check_range(distractor_prob, "distractor_prob");
  check_range(dropout_prob, "dropout_prob");
  check_range(dominance, "dominance");
  check_range(dominance_ramp, "dominance_ramp");
  check_range(planning_prob, "planning_prob");
  check_range(lookahead_prob, "lookahead_prob");
  check_positive(pick_duration.mean, "pick_duration.mean");
  check_positive(place_duration.mean, "place_duration.mean");
  if (pick_duration.sd < 0.0 || place_duration.sd < 0.0) throw ConfigError("duration sd must be non-negative");
  check_positive(min_duration, "min_duration");
  check_positive(final_fixation_lead.min, "final_fixation_lead.min");
  if (final_fixation_lead.max < final_fixation_lead.min) throw ConfigError("final_fixation_lead max < min");
  check_positive(gripper_latency, "gripper_latency");
  check_positive(initial_scan, "initial_scan");
  check_positive(history, "history");
  double total = 0.0;
  for (double w : mix) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("scenario weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("scenario mix must have positive total weight");
}

nlohmann::json params_to_json(const GazeProfileParams& p) {
  nlohmann::json mix = nlohmann::json::object();
  for (int i = 0; i < kScenarioCount; ++i) mix[kScenarioNames[static_cast<std::size_t>(i)]] = p.mix[static_cast<std::size_t>(i)];
  return {{"fixation_duration", {p.fixation_duration.min, p.fixation_duration.max}},
          {"jitter_sigma", p.jitter_sigma},
          {"saccade_duration", p.saccade_duration},
          {"alternation_count", {p.alternation_count.min, p.alternation_count.max}},
          {"distractor_prob", p.distractor_prob},
          {"dropout_prob", p.dropout_prob},
          {"pick_duration", {{"mean", p.pick_duration.mean}, {"sd", p.pick_duration.sd}}},
          {"place_duration", {{"mean", p.place_duration.mean}, {"sd", p.place_duration.sd}}},
          {"min_duration", p.min_duration},
          {"final_fixation_lead", {p.final_fixation_lead.min, p.final_fixation_lead.max}},
          {"dominance", p.dominance},
          {"dominance_ramp", p.dominance_ramp},
          {"planning_prob", p.planning_prob},
          {"lookahead_prob", p.lookahead_prob},
          {"gripper_latency", p.gripper_latency},
          {"initial_scan", p.initial_scan},
          {"history", p.history},
          {"mix", mix}};
}

GazeProfileParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synthetic user parameters must be an object");
  GazeProfileParams p;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "fixation_duration") p.fixation_duration = {v.at(0).get<double>(), v.at(1).get<double>()};
      else if (key == "jitter_sigma") p.jitter_sigma = v.get<double>();
      else if (key == "saccade_duration") p.saccade_duration = v.get<double>();
      else if (key == "alternation_count") p.alternation_count = {v.at(0).get<int>(), v.at(1).get<int>()};
      else if (key == "distractor_prob") p.distractor_prob = v.get<double>();
      else if (key == "dropout_prob") p.dropout_prob = v.get<double>();
      else if (key == "pick_duration") p.pick_duration = {v.at("mean").get<double>(), v.at("sd").get<double>()};
      else if (key == "place_duration") p.place_duration = {v.at("mean").get<double>(), v.at("sd").get<double>()};
      else if (key == "min_duration") p.min_duration = v.get<double>();
      else if (key == "final_fixation_lead") p.final_fixation_lead = {v.at(0).get<double>(), v.at(1).get<double>()};
      else if (key == "dominance") p.dominance = v.get<double>();
      else if (key == "dominance_ramp") p.dominance_ramp = v.get<double>();
      else if (key == "planning_prob") p.planning_prob = v.get<double>();
      else if (key == "lookahead_prob") p.lookahead_prob = v.get<double>();
      else if (key == "gripper_latency") p.gripper_latency = v.get<double>();
      else if (key == "initial_scan") p.initial_scan = v.get<double>();
      else if (key == "history") p.history = v.get<double>();
      else if (key == "mix") {
        p.mix.fill(0.0);
        for (const auto& [name, w] : v.items()) {
          Scenario s;
          try {
            s = scenario_from_string(name);
          } catch (const DataError&) {
            throw ConfigError("unknown scenario '" + name + "' in mix");
          }
          p.mix[static_cast<std::size_t>(s)] = w.get<double>();
        }
      } else {
        throw ConfigError("unknown synthetic user parameter '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed synthetic user parameters: ") + e.what());
  }
  p.validate();
  return p;
}

Episode sample_episode(const BoardState& board, ActionKind kind, ObjectId true_target, Scenario scenario,
                       const GazeProfileParams& params, std::mt19937_64& rng, const BoardLayout& layout,
                       const AttentionConfig& cfg) {
  params.validate();
  if (next_action_kind(board) != kind) throw IllegalTargetError("board is not waiting for this action kind");
  auto candidates = candidate_objects(board, kind);
  if (std::find(candidates.begin(), candidates.end(), true_target) == candidates.end()) {
    throw IllegalTargetError("object " + std::to_string(true_target) + " is not a legal candidate");
  }
  EpisodePlan plan{kind, true_target, -1, candidates, scenario};
  if (kind == ActionKind::Pick) {
    plan.partner = cell_object(pick_one(incomplete_cells_of(board, board.stock[static_cast<std::size_t>(true_target)]), rng));
  } else {
    plan.partner = stock_object(stock_slot_of(board, board.held->type));
  }
  Timeline timeline(layout, params);
  double start = quantize(params.history, cfg);
  timeline.scan(0.0, start, rng);
  double action = plan_episode(timeline, plan, start, params, layout, cfg, rng);
  auto gaze = timeline.render(frame_index(action - params.history, cfg), frame_index(action, cfg), rng(), cfg);

  Episode e;
  e.kind = kind;
  e.board = board;
  e.candidates = candidates;
  e.true_target = true_target;
  e.trace = to_trace(gaze);
  e.start_time = start;
  e.action_time = action;
  e.scenario = scenario;
  return e;
}

BoardRun play_board(std::uint64_t board_seed, std::uint64_t stream_seed, const GazeProfileParams& params,
                    const BoardLayout& layout, const AttentionConfig& cfg) {
  params.validate();
  BoardRun run;
  run.initial = new_board(board_seed, layout);
  Timeline timeline(layout, params);
  {
    std::mt19937_64 scan_rng(derive_seed(stream_seed, {0xffffffffULL}));
    timeline.scan(0.0, params.initial_scan, scan_rng);
  }
  BoardState board = run.initial;
  double start = quantize(params.initial_scan, cfg);
  std::uint64_t index = 0;
  ObjectId destination = -1;
  while (!is_complete(board)) {
    std::mt19937_64 rng(derive_seed(stream_seed, {index++}));
    ActionKind kind = next_action_kind(board);
    EpisodePlan plan{kind, -1, -1, candidate_objects(board, kind), draw_scenario(params, rng)};
    if (kind == ActionKind::Pick) {
      plan.target = pick_one(plan.candidates, rng);
      PieceType type = board.stock[static_cast<std::size_t>(plan.target)];
      destination = cell_object(pick_one(incomplete_cells_of(board, type), rng));
      plan.partner = destination;
    } else {
      plan.target = destination;
      plan.partner = stock_object(stock_slot_of(board, board.held->type));
    }
    double action = plan_episode(timeline, plan, start, params, layout, cfg, rng);
    run.actions.push_back({kind, plan.target, start, action, plan.scenario, board});
    if (kind == ActionKind::Pick) {
      board = apply_pick(board, object_index(plan.target));
      // rotation happens off-screen
      const auto& model = board.cells[static_cast<std::size_t>(object_index(destination))].model;
      while (!(board.held->orientation == model.orientation)) board = rotate_held(board);
    } else {
      board = apply_place(board, object_index(plan.target)).first;
    }
    start = quantize(action + params.gripper_latency, cfg);
  }
  run.gaze = timeline.render(0, frame_index(start, cfg) - 1, derive_seed(stream_seed, {kRenderStream}), cfg);
  return run;
}

std::vector<Episode> episodes_from_run(const BoardRun& run, const GazeProfileParams& params,
                                       const AttentionConfig& cfg) {
  std::vector<Episode> out;
  out.reserve(run.actions.size());
  for (const auto& a : run.actions) {
    Episode e;
    e.kind = a.kind;
    e.board = a.before;
    e.candidates = candidate_objects(a.before, a.kind);
    e.true_target = a.target;
    double from = std::max(0.0, quantize(a.action_time - params.history, cfg));
    e.trace = to_trace(slice(run.gaze, from, a.action_time));
    e.start_time = a.start_time;
    e.action_time = a.action_time;
    e.scenario = a.scenario;
    out.push_back(std::move(e));
  }
  return out;
}

std::uint64_t corpus_board_seed(std::uint64_t seed, std::uint64_t index) { return derive_seed(seed, {1, index}); }
std::uint64_t corpus_stream_seed(std::uint64_t seed, std::uint64_t index) { return derive_seed(seed, {2, index}); }

Corpus generate_corpus(const GazeProfileParams& params, std::size_t n_episodes, std::uint64_t seed,
                       const BoardLayout& layout, const AttentionConfig& cfg) {
  if (n_episodes == 0) throw ConfigError("n_episodes must be positive");
  params.validate();
  const auto boards = static_cast<std::int64_t>((n_episodes + kActionsPerBoard - 1) / kActionsPerBoard);
  std::vector<std::vector<Episode>> per_board(static_cast<std::size_t>(boards));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < boards; ++b) {
    auto ub = static_cast<std::uint64_t>(b);
    auto run = play_board(corpus_board_seed(seed, ub), corpus_stream_seed(seed, ub), params, layout, cfg);
    per_board[static_cast<std::size_t>(b)] = episodes_from_run(run, params, cfg);
  }
  Corpus corpus;
  corpus.seed = seed;
  corpus.params = params;
  for (auto& eps : per_board) {
    for (auto& e : eps) {
      if (corpus.episodes.size() == n_episodes) break;
      corpus.episodes.push_back(std::move(e));
    }
  }
  return corpus;
}

nlohmann::json episode_to_json(const Episode& e) {
  nlohmann::json gaze = nlohmann::json::array();
  for (std::size_t i = 0; i < e.trace.size(); ++i) gaze.push_back(gaze_to_json(e.trace[i]));
  return {{"kind", to_string(e.kind)},
          {"scenario", to_string(e.scenario)},
          {"board", board_to_json(e.board)},
          {"candidates", e.candidates},
          {"true_target", e.true_target},
          {"start_time", e.start_time},
          {"action_time", e.action_time},
          {"gaze", gaze}};
}

Episode episode_from_json(const nlohmann::json& j) {
  try {
    Episode e;
    e.kind = action_kind_from_string(j.at("kind").get<std::string>());
    e.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    e.board = board_from_json(j.at("board"));
    e.candidates = j.at("candidates").get<std::vector<ObjectId>>();
    e.true_target = j.at("true_target").get<ObjectId>();
    e.start_time = j.at("start_time").get<double>();
    e.action_time = j.at("action_time").get<double>();
    const auto& gaze = j.at("gaze");
    e.trace = GazeTrace(std::max<std::size_t>(gaze.size(), 1));
    for (const auto& g : gaze) e.trace.push(gaze_from_json(g));
    if (std::find(e.candidates.begin(), e.candidates.end(), e.true_target) == e.candidates.end())
      throw DataError("episode target is not among its candidates");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed episode: ") + ex.what());
  } catch (const OutOfOrderError& ex) {
    throw DataError(std::string("episode gaze out of order: ") + ex.what());
  }
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file '" + path + "'");
  nlohmann::json header{{"version", kCorpusFormatVersion},
                        {"seed", corpus.seed},
                        {"params", params_to_json(corpus.params)},
                        {"n_episodes", corpus.episodes.size()}};
  out << header.dump() << '\n';
  for (const auto& e : corpus.episodes) out << episode_to_json(e).dump() << '\n';
  if (!out) throw DataError("failed writing corpus file '" + path + "'");
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("corpus file '" + path + "' is empty");
  Corpus corpus;
  std::size_t expected = 0;
  try {
    auto header = nlohmann::json::parse(line);
    if (header.at("version").get<int>() != kCorpusFormatVersion) {
      throw VersionError("unsupported corpus version " + header.at("version").dump());
    }
    corpus.seed = header.at("seed").get<std::uint64_t>();
    try {
      corpus.params = params_from_json(header.at("params"));
    } catch (const ConfigError& e) {
      throw DataError(std::string("corpus header: ") + e.what());
    }
    expected = header.at("n_episodes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed corpus header: ") + e.what());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      corpus.episodes.push_back(episode_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("malformed corpus line: ") + e.what());
    }
  }
  if (corpus.episodes.size() != expected) {
    throw DataError("corpus declares " + std::to_string(expected) + " episodes but holds " +
                    std::to_string(corpus.episodes.size()));
  }
  return corpus;
}

}  // namespace gazeintent
