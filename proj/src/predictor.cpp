#include "gazeintent/predictor.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "gazeintent/errors.hpp"
#include "gazeintent/hash.hpp"

namespace gazeintent {

namespace {

constexpr std::size_t kWindow = 300;

// Profiles of the required objects of one prediction, computed from a trace.
class TraceProfiles {
 public:
  TraceProfiles(const GazeTrace& trace, std::span<const ObjectId> ids, const BoardLayout& layout, double window_end,
                const AttentionConfig& cfg) {
    for (auto& vap : compute_vaps(trace, ids, layout, window_end, cfg)) by_id_[vap.object_id] = std::move(vap.values);
  }

  [[nodiscard]] ProfileSource source() const {
    return [this](ObjectId id) -> std::span<const double> {
      auto it = by_id_.find(id);
      if (it == by_id_.end()) throw DataError("no profile for object " + std::to_string(id));
      return it->second;
    };
  }

 private:
  std::map<ObjectId, std::vector<double>> by_id_;
};

bool pick_is_f1_only(const PredictorModels& models) { return models.pick.dim() == kWindow; }

void check_model_dims(const PredictorModels& models, ActionKind kind) {
  if (kind == ActionKind::Pick && models.pick.dim() != 2 * kWindow && models.pick.dim() != kWindow)
    throw DimensionMismatchError("pick model must take 600 (F1+F2) or 300 (F1) features");
  if (kind == ActionKind::Place && models.place.dim() != kWindow)
    throw DimensionMismatchError("place model must take 300 features");
}

}  // namespace

void PredictorConfig::validate() const {
  attention.validate();
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("decision threshold must lie in (0,1)");
}

double window_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

ObjectId matching_cell(const ProfileSource& profiles, const BoardState& board, int slot) {
  ObjectId best = -1;
  double best_mean = -1.0;
  for (int cell : incomplete_cells_of(board, board.stock[static_cast<std::size_t>(slot)])) {
    double m = window_mean(profiles(cell_object(cell)));
    if (m > best_mean) {
      best_mean = m;
      best = cell_object(cell);
    }
  }
  return best;
}

FeatureVector pick_features(const ProfileSource& profiles, const BoardState& board, int slot, bool f1_only) {
  if (slot < 0 || slot >= kStockSlots) throw EmptySlotError("stock slot " + std::to_string(slot) + " does not exist");
  FeatureVector fv{ActionKind::Pick, {}};
  auto f1 = profiles(stock_object(slot));
  fv.values.assign(f1.begin(), f1.end());
  if (f1_only) return fv;
  ObjectId cell = matching_cell(profiles, board, slot);
  if (cell < 0) {
    fv.values.resize(2 * f1.size(), 0.0);
  } else {
    auto f2 = profiles(cell);
    fv.values.insert(fv.values.end(), f2.begin(), f2.end());
  }
  return fv;
}

FeatureVector pick_features(const GazeTrace& trace, const BoardState& board, int candidate_slot, double window_end,
                            const AttentionConfig& cfg, const BoardLayout& layout) {
  if (candidate_slot < 0 || candidate_slot >= kStockSlots)
    throw EmptySlotError("stock slot " + std::to_string(candidate_slot) + " does not exist");
  std::vector<ObjectId> ids{stock_object(candidate_slot)};
  for (int c : incomplete_cells_of(board, board.stock[static_cast<std::size_t>(candidate_slot)])) ids.push_back(cell_object(c));
  TraceProfiles p(trace, ids, layout, window_end, cfg);
  return pick_features(p.source(), board, candidate_slot);
}

FeatureVector place_features(const ProfileSource& profiles, const BoardState& board, int cell) {
  if (cell < 0 || cell >= kPatternCells) throw IllegalCandidateError("cell " + std::to_string(cell) + " does not exist");
  if (!board.held) throw IllegalCandidateError("no piece is held");
  const auto& pc = board.cells[static_cast<std::size_t>(cell)];
  if (pc.completed || pc.model.type != board.held->type) {
    throw IllegalCandidateError("cell " + std::to_string(cell) + " is not a place candidate");
  }
  auto f1 = profiles(cell_object(cell));
  return {ActionKind::Place, {f1.begin(), f1.end()}};
}

FeatureVector place_features(const GazeTrace& trace, const BoardState& board, int candidate_cell, double window_end,
                             const AttentionConfig& cfg, const BoardLayout& layout) {
  if (candidate_cell < 0 || candidate_cell >= kPatternCells)
    throw IllegalCandidateError("cell " + std::to_string(candidate_cell) + " does not exist");
  std::vector<ObjectId> ids{cell_object(candidate_cell)};
  TraceProfiles p(trace, ids, layout, window_end, cfg);
  return place_features(p.source(), board, candidate_cell);
}

std::vector<ObjectId> required_objects(const BoardState& board, ActionKind kind) {
  auto ids = candidate_objects(board, kind);
  if (kind == ActionKind::Pick) {
    auto n = ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (int c : incomplete_cells_of(board, board.stock[static_cast<std::size_t>(ids[i])])) ids.push_back(cell_object(c));
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<TrainingExample> episode_examples(const Episode& episode, const ProfileSource& profiles, bool f1_only) {
  std::vector<TrainingExample> out;
  for (ObjectId c : episode.candidates) {
    FeatureVector fv = episode.kind == ActionKind::Pick ? pick_features(profiles, episode.board, object_index(c), f1_only)
                                                        : place_features(profiles, episode.board, object_index(c));
    out.push_back({std::move(fv.values), c == episode.true_target ? 1 : 0});
  }
  return out;
}

std::vector<TrainingExample> build_dataset(std::span<const Episode> episodes, ActionKind kind, double t_prior,
                                           const AttentionConfig& cfg, bool f1_only, const BoardLayout& layout) {
  std::vector<const Episode*> chosen;
  for (const auto& e : episodes)
    if (e.kind == kind) chosen.push_back(&e);
  std::vector<std::vector<TrainingExample>> parts(chosen.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(chosen.size()); ++i) {
    const Episode& e = *chosen[static_cast<std::size_t>(i)];
    auto ids = required_objects(e.board, kind);
    TraceProfiles p(e.trace, ids, layout, e.action_time - t_prior, cfg);
    parts[static_cast<std::size_t>(i)] = episode_examples(e, p.source(), f1_only);
  }
  std::vector<TrainingExample> out;
  for (auto& part : parts) std::move(part.begin(), part.end(), std::back_inserter(out));
  return out;
}

PredictorModels train_predictors(std::span<const Episode> episodes, const SvmParams& params, std::uint64_t seed,
                                 const AttentionConfig& cfg, const BoardLayout& layout) {
  auto pick = build_dataset(episodes, ActionKind::Pick, 0.0, cfg, false, layout);
  auto place = build_dataset(episodes, ActionKind::Place, 0.0, cfg, false, layout);
  if (pick.empty()) throw DegenerateDataError("corpus has no pick episodes");
  if (place.empty()) throw DegenerateDataError("corpus has no place episodes");
  return {train_calibrated(pick, params, seed), train_calibrated(place, params, seed + 1)};
}

void resolve(Prediction& p, double threshold) {
  if (p.per_candidate.empty()) throw NoCandidatesError("prediction has no candidates");
  p.chosen = p.per_candidate.begin()->first;
  double best = p.per_candidate.begin()->second;
  for (const auto& [id, prob] : p.per_candidate) {
    if (prob > best) {
      best = prob;
      p.chosen = id;
    }
  }
  p.decided = best >= threshold;
}

Prediction predict(const PredictorModels& models, const ProfileSource& profiles, const BoardState& board,
                   ActionKind kind, double t, double threshold) {
  check_model_dims(models, kind);
  auto candidates = candidate_objects(board, kind);
  if (candidates.empty()) throw NoCandidatesError(std::string("no ") + to_string(kind) + " candidates");
  Prediction p;
  p.t = t;
  p.kind = kind;
  const bool f1_only = pick_is_f1_only(models);
  for (ObjectId c : candidates) {
    if (kind == ActionKind::Pick) {
      p.per_candidate[c] = predict_proba(models.pick, pick_features(profiles, board, object_index(c), f1_only).values);
    } else {
      p.per_candidate[c] = predict_proba(models.place, place_features(profiles, board, object_index(c)).values);
    }
  }
  resolve(p, threshold);
  return p;
}

Prediction predict(const PredictorModels& models, const GazeTrace& trace, const BoardState& board, ActionKind kind,
                   double window_end, const PredictorConfig& cfg, const BoardLayout& layout) {
  auto ids = required_objects(board, kind);
  if (ids.empty()) throw NoCandidatesError(std::string("no ") + to_string(kind) + " candidates");
  TraceProfiles p(trace, ids, layout, window_end, cfg.attention);
  return predict(models, p.source(), board, kind, window_end, cfg.threshold);
}

nlohmann::json prediction_to_json(const Prediction& p) {
  nlohmann::json probs = nlohmann::json::object();
  for (const auto& [id, prob] : p.per_candidate) probs[std::to_string(id)] = prob;
  return {{"t", p.t}, {"kind", to_string(p.kind)}, {"probs", probs}, {"chosen", p.chosen}, {"decided", p.decided}};
}

void save_models(const PredictorModels& models, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create model directory '" + dir + "': " + ec.message());
  save_model(models.pick, (std::filesystem::path(dir) / "pick.json").string());
  save_model(models.place, (std::filesystem::path(dir) / "place.json").string());
}

PredictorModels load_models(const std::string& dir) {
  PredictorModels m{load_model((std::filesystem::path(dir) / "pick.json").string()),
                    load_model((std::filesystem::path(dir) / "place.json").string())};
  try {
    check_model_dims(m, ActionKind::Pick);
    check_model_dims(m, ActionKind::Place);
  } catch (const DimensionMismatchError& e) {
    throw ModelLoadError(e.what());
  }
  if (!m.pick.calibrated || !m.place.calibrated) throw ModelLoadError("models must be probability-calibrated");
  return m;
}

std::string models_hash(const PredictorModels& models) {
  Fnv1a h;
  h.update(model_to_json(models.pick).dump());
  h.update("\n");
  h.update(model_to_json(models.place).dump());
  return h.hex();
}

}  // namespace gazeintent
