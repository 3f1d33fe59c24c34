#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

#include "doctest.h"

#include "fixtures.hpp"
#include "gazeintent/errors.hpp"
#include "gazeintent/predictor.hpp"

using namespace gazeintent;

namespace {

constexpr std::size_t kW = 300;

// Profiles given as constant levels per object; unspecified objects are zero.
struct ConstProfiles {
  std::map<ObjectId, std::vector<double>> values;

  void set(ObjectId id, double level) { values[id] = std::vector<double>(kW, level); }
  ProfileSource source() {
    return [this](ObjectId id) -> std::span<const double> {
      auto it = values.find(id);
      if (it == values.end()) it = values.emplace(id, std::vector<double>(kW, 0.0)).first;
      return it->second;
    };
  }
};

// Fixation on `at` for `seconds` ending at `end`, on the frame grid.
GazeTrace steady_gaze(Vec2 at, double end, double seconds = 5.0) {
  AttentionConfig cfg;
  GazeTrace trace(1024);
  auto last = frame_index(end, cfg);
  auto first = last - static_cast<std::int64_t>(seconds / cfg.frame);
  for (auto k = first; k <= last; ++k) trace.push({static_cast<double>(k) * cfg.frame, at, true});
  return trace;
}

BoardState board_with_type_completed(int type_id) {
  auto b = new_board(3, standard_layout());
  for (auto& c : b.cells)
    if (c.model.type.id == type_id) c.completed = true;
  return b;
}

}  // namespace

TEST_CASE("pick features are F1 then F2 of the most attended matching cell") {
  auto board = new_board(5, standard_layout());
  const int slot = 0;
  auto cells = incomplete_cells_of(board, board.stock[slot]);
  REQUIRE(cells.size() >= 2);
  ConstProfiles p;
  p.set(stock_object(slot), 0.9);
  p.set(cell_object(cells[0]), 0.2);
  p.set(cell_object(cells[1]), 0.4);
  auto fv = pick_features(p.source(), board, slot);
  REQUIRE(fv.values.size() == 2 * kW);
  CHECK(fv.values.front() == 0.9);
  CHECK(fv.values[kW] == 0.4);
  CHECK(matching_cell(p.source(), board, slot) == cell_object(cells[1]));
  CHECK(pick_features(p.source(), board, slot, true).values.size() == kW);
}

TEST_CASE("matching cell ties go to the lowest id") {
  auto board = new_board(5, standard_layout());
  auto cells = incomplete_cells_of(board, board.stock[1]);
  ConstProfiles p;
  for (int c : cells) p.set(cell_object(c), 0.3);
  CHECK(matching_cell(p.source(), board, 1) == cell_object(*std::min_element(cells.begin(), cells.end())));
}

TEST_CASE("F2 is all zeros when the slot's type has no incomplete cell") {
  auto board = board_with_type_completed(2);
  int slot = stock_slot_of(board, PieceType{2});
  ConstProfiles p;
  for (ObjectId id = 0; id < kStockSlots + kPatternCells; ++id) p.set(id, 0.7);
  auto fv = pick_features(p.source(), board, slot);
  REQUIRE(fv.values.size() == 2 * kW);
  CHECK(std::all_of(fv.values.begin() + kW, fv.values.end(), [](double v) { return v == 0.0; }));
  CHECK(matching_cell(p.source(), board, slot) == -1);
}

TEST_CASE("place features of a never-approached cell stay below exp(-4.5)") {
  auto board = apply_pick(new_board(8, standard_layout()), 0);
  auto cells = legal_place_candidates(board);
  REQUIRE(!cells.empty());
  Vec2 at = object_position(standard_layout(), cell_object(cells.front())) + Vec2{181.0, 0.0};
  auto trace = steady_gaze(at, 10.0);
  auto fv = place_features(trace, board, cells.front(), 10.0, AttentionConfig{});
  REQUIRE(fv.values.size() == kW);
  CHECK(*std::max_element(fv.values.begin(), fv.values.end()) < 0.012);
}

TEST_CASE("feature extraction rejects bad candidates") {
  auto board = new_board(8, standard_layout());
  ConstProfiles p;
  CHECK_THROWS_AS((void)pick_features(p.source(), board, kStockSlots), EmptySlotError);
  CHECK_THROWS_AS((void)pick_features(p.source(), board, -1), EmptySlotError);
  CHECK_THROWS_AS((void)place_features(p.source(), board, 0), IllegalCandidateError);
  auto held = apply_pick(board, 0);
  int wrong = -1;
  for (int c = 0; c < kPatternCells; ++c)
    if (held.cells[c].model.type != held.held->type) wrong = c;
  CHECK_THROWS_AS((void)place_features(p.source(), held, wrong), IllegalCandidateError);
  CHECK_THROWS_AS((void)place_features(p.source(), held, kPatternCells), IllegalCandidateError);
}

TEST_CASE("every episode yields one positive example per candidate set") {
  const auto& eps = fixtures::corpus().episodes;
  for (std::size_t i = 0; i < 40; ++i) {
    const auto& e = eps[i];
    auto ds = build_dataset(std::span(&e, 1), e.kind, 0.0, AttentionConfig{});
    REQUIRE(ds.size() == e.candidates.size());
    CHECK(std::count_if(ds.begin(), ds.end(), [](const TrainingExample& x) { return x.label == 1; }) == 1);
    for (std::size_t k = 0; k < ds.size(); ++k) {
      CHECK(ds[k].label == (e.candidates[k] == e.true_target ? 1 : 0));
      CHECK(ds[k].features.size() == (e.kind == ActionKind::Pick ? 2 * kW : kW));
    }
  }
  auto f1 = build_dataset(eps, ActionKind::Pick, 0.5, AttentionConfig{}, true);
  CHECK(std::all_of(f1.begin(), f1.end(), [](const TrainingExample& x) { return x.features.size() == kW; }));
}

TEST_CASE("resolve takes the argmax with lowest-id ties and applies the threshold") {
  Prediction p;
  p.per_candidate = {{3, 0.6}, {1, 0.3}, {2, 0.1}};
  resolve(p, 0.55);
  CHECK(p.chosen == 3);
  CHECK(p.decided);
  p.per_candidate = {{2, 0.4}, {1, 0.4}, {0, 0.2}};
  resolve(p, 0.55);
  CHECK(p.chosen == 1);
  CHECK_FALSE(p.decided);
  p.per_candidate.clear();
  CHECK_THROWS_AS(resolve(p, 0.55), NoCandidatesError);
}

TEST_CASE("identical features give identical probabilities and the lowest id wins") {
  const auto& models = *fixtures::models();
  auto board = new_board(12, standard_layout());
  ConstProfiles p;  // all zeros
  auto pred = predict(models, p.source(), board, ActionKind::Pick, 0.0, 0.55);
  REQUIRE(pred.per_candidate.size() == candidate_objects(board, ActionKind::Pick).size());
  double first = pred.per_candidate.begin()->second;
  for (const auto& kv : pred.per_candidate) CHECK(kv.second == first);
  CHECK(pred.chosen == pred.per_candidate.begin()->first);
}

TEST_CASE("trace prediction equals prediction from precomputed profiles") {
  const auto& models = *fixtures::models();
  const auto& eps = fixtures::corpus().episodes;
  PredictorConfig cfg;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& e = eps[i];
    double end = e.action_time - 0.4;
    auto direct = predict(models, e.trace, e.board, e.kind, end, cfg);
    auto ids = required_objects(e.board, e.kind);
    auto vaps = compute_vaps_serial(e.trace, ids, standard_layout(), end, cfg.attention);
    std::map<ObjectId, std::vector<double>> by_id;
    for (auto& v : vaps) by_id[v.object_id] = v.values;
    ProfileSource src = [&](ObjectId id) -> std::span<const double> { return by_id.at(id); };
    auto via = predict(models, src, e.board, e.kind, end, cfg.threshold);
    CHECK(direct.per_candidate == via.per_candidate);
    CHECK(direct.chosen == via.chosen);
  }
}

TEST_CASE("a steady look at one stock piece makes it the most probable pick") {
  const auto& models = *fixtures::models();
  auto board = new_board(6, standard_layout());
  auto candidates = candidate_objects(board, ActionKind::Pick);
  for (ObjectId target : candidates) {
    auto trace = steady_gaze(object_position(standard_layout(), target), 20.0);
    auto p = predict(models, trace, board, ActionKind::Pick, 20.0, PredictorConfig{});
    CHECK(p.chosen == target);
    for (const auto& [id, prob] : p.per_candidate)
      if (id != target) CHECK(prob < p.per_candidate.at(target));
  }
}

TEST_CASE("prediction errors") {
  const auto& models = *fixtures::models();
  ConstProfiles p;
  auto done = new_board(6, standard_layout());
  for (auto& c : done.cells) c.completed = true;
  CHECK_THROWS_AS((void)predict(models, p.source(), done, ActionKind::Pick, 0.0, 0.55), NoCandidatesError);
  PredictorModels swapped{models.place, models.pick};
  auto board = new_board(6, standard_layout());
  CHECK_THROWS_AS((void)predict(swapped, p.source(), apply_pick(board, 0), ActionKind::Place, 0.0, 0.55),
                  DimensionMismatchError);
}

TEST_CASE("an F1-only pick model predicts from 300-wide vectors") {
  const auto& eps = fixtures::corpus().episodes;
  auto ds = build_dataset(std::span(eps).first(200), ActionKind::Pick, 0.0, AttentionConfig{}, true);
  PredictorModels m{train_calibrated(ds, SvmParams{}, 1), fixtures::models()->place};
  const auto& e = *std::find_if(eps.begin(), eps.end(), [](const Episode& x) { return x.kind == ActionKind::Pick; });
  auto p = predict(m, e.trace, e.board, e.kind, e.action_time, PredictorConfig{});
  CHECK(p.per_candidate.size() == e.candidates.size());
}

TEST_CASE("models round-trip through a directory with a stable hash") {
  const auto& models = *fixtures::models();
  fixtures::TempPath dir("models");
  save_models(models, dir.str());
  auto back = load_models(dir.str());
  CHECK(models_hash(back) == models_hash(models));
  CHECK(back.pick == models.pick);
  CHECK_THROWS_AS((void)load_models(dir.str() + "/missing"), ModelLoadError);

  auto raw = models.pick;
  raw.calibrated = false;
  save_model(raw, (std::filesystem::path(dir.str()) / "pick.json").string());
  CHECK_THROWS_AS((void)load_models(dir.str()), ModelLoadError);
}

TEST_CASE("predictor config validation") {
  PredictorConfig c;
  c.threshold = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.threshold = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.threshold = 0.55;
  CHECK_NOTHROW(c.validate());
}
