#include "gazeintent/task_world.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "gazeintent/errors.hpp"

namespace gazeintent {

const char* to_string(ActionKind kind) { return kind == ActionKind::Pick ? "pick" : "place"; }

ActionKind action_kind_from_string(const std::string& text) {
  if (text == "pick") return ActionKind::Pick;
  if (text == "place") return ActionKind::Place;
  throw ConfigError("unknown action kind '" + text + "' (expected pick|place)");
}

const char* to_string(PlaceOutcome outcome) {
  return outcome == PlaceOutcome::Completed ? "completed" : "mismatch_returned_to_stock";
}

BoardLayout standard_layout() {
  constexpr double cell = 80.0;
  constexpr double gutter = 10.0;
  constexpr double pitch = cell + gutter;
  constexpr int cols = 6;
  constexpr int rows = 4;

  BoardLayout layout;
  layout.cell_size = cell;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      layout.pattern_cells.push_back({c * pitch + cell / 2, r * pitch + cell / 2});
    }
  }
  for (int s = 0; s < kStockSlots; ++s) {
    layout.stock_slots.push_back({-120.0, s * pitch + cell / 2});
  }
  return layout;
}

void validate_layout(const BoardLayout& layout) {
  if (layout.pattern_cells.size() != kPatternCells) throw LayoutError("layout needs 24 pattern cells");
  if (layout.stock_slots.size() != kStockSlots) throw LayoutError("layout needs 4 stock slots");
  if (!(layout.cell_size > 0.0)) throw LayoutError("cell_size must be positive");

  std::vector<Vec2> all = layout.pattern_cells;
  all.insert(all.end(), layout.stock_slots.begin(), layout.stock_slots.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!all[i].finite()) throw LayoutError("layout position is not finite");
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (all[i] == all[j]) throw LayoutError("layout positions must be pairwise distinct");
    }
  }

  // Regions are the bounding boxes of the cell footprints; they must not overlap.
  auto bbox = [&](const std::vector<Vec2>& pts) {
    double h = layout.cell_size / 2;
    std::array<double, 4> b{pts[0].x - h, pts[0].x + h, pts[0].y - h, pts[0].y + h};
    for (const auto& p : pts) {
      b[0] = std::min(b[0], p.x - h);
      b[1] = std::max(b[1], p.x + h);
      b[2] = std::min(b[2], p.y - h);
      b[3] = std::max(b[3], p.y + h);
    }
    return b;
  };
  auto s = bbox(layout.stock_slots);
  auto w = bbox(layout.pattern_cells);
  bool overlap = s[0] < w[1] && w[0] < s[1] && s[2] < w[3] && w[2] < s[3];
  if (overlap) throw LayoutError("stock and workspace regions overlap");
}

Vec2 object_position(const BoardLayout& layout, ObjectId id) {
  if (is_stock_object(id)) return layout.stock_slots.at(static_cast<std::size_t>(id));
  if (is_cell_object(id)) return layout.pattern_cells.at(static_cast<std::size_t>(object_index(id)));
  throw DataError("unknown object id " + std::to_string(id));
}

int BoardState::completed_count() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.completed; }));
}

BoardState new_board(std::uint64_t seed, const BoardLayout& layout) {
  (void)layout;  // geometry does not influence the pattern draw
  std::mt19937_64 rng(seed);

  std::array<int, kPatternCells> types{};
  for (int i = 0; i < kPatternCells; ++i) types[i] = 1 + i / kCellsPerType;
  std::shuffle(types.begin(), types.end(), rng);

  BoardState board;
  board.seed = seed;
  std::uniform_int_distribution<int> orient(0, 3);
  for (int i = 0; i < kPatternCells; ++i) {
    board.cells[i].model = {PieceType{types[i]}, Orientation{orient(rng)}};
  }

  std::array<int, kPatternCells> order{};
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < kPreCompletedCells; ++i) board.cells[order[i]].completed = true;

  std::array<int, kStockSlots> stock{1, 2, 3, 4};
  std::shuffle(stock.begin(), stock.end(), rng);
  for (int s = 0; s < kStockSlots; ++s) board.stock[s] = PieceType{stock[s]};
  return board;
}

std::vector<int> incomplete_cells_of(const BoardState& board, PieceType type) {
  std::vector<int> out;
  for (int c = 0; c < kPatternCells; ++c) {
    if (!board.cells[c].completed && board.cells[c].model.type == type) out.push_back(c);
  }
  return out;
}

int stock_slot_of(const BoardState& board, PieceType type) {
  for (int s = 0; s < kStockSlots; ++s) {
    if (board.stock[s] == type) return s;
  }
  return -1;
}

std::vector<int> legal_pick_candidates(const BoardState& board) {
  if (board.held) throw HeldPieceError("a piece is already held");
  std::vector<int> out;
  for (int s = 0; s < kStockSlots; ++s) {
    if (!incomplete_cells_of(board, board.stock[s]).empty()) out.push_back(s);
  }
  return out;
}

std::vector<int> legal_place_candidates(const BoardState& board) {
  if (!board.held) throw NoHeldPieceError("no piece is held");
  return incomplete_cells_of(board, board.held->type);
}

ActionKind next_action_kind(const BoardState& board) {
  return board.held ? ActionKind::Place : ActionKind::Pick;
}

std::vector<ObjectId> candidate_objects(const BoardState& board, ActionKind kind) {
  std::vector<ObjectId> out;
  if (kind == ActionKind::Pick) {
    for (int s : legal_pick_candidates(board)) out.push_back(stock_object(s));
  } else {
    for (int c : legal_place_candidates(board)) out.push_back(cell_object(c));
  }
  return out;
}

BoardState apply_pick(const BoardState& board, int slot) {
  if (board.held) throw IllegalPickError("cannot pick while holding a piece");
  auto legal = legal_pick_candidates(board);
  if (std::find(legal.begin(), legal.end(), slot) == legal.end()) {
    throw IllegalPickError("stock slot " + std::to_string(slot) + " is not a legal pick");
  }
  BoardState next = board;
  // The slot is replenished with the same type, so stock does not change.
  next.held = Piece{board.stock[slot], Orientation{0}};
  return next;
}

BoardState rotate_held(const BoardState& board) {
  if (!board.held) throw NoHeldPieceError("no piece to rotate");
  BoardState next = board;
  next.held->orientation = board.held->orientation.rotated();
  return next;
}

std::pair<BoardState, PlaceOutcome> apply_place(const BoardState& board, int cell) {
  if (!board.held) throw NoHeldPieceError("no piece to place");
  if (cell < 0 || cell >= kPatternCells) throw DataError("cell id out of range: " + std::to_string(cell));
  BoardState next = board;
  const auto& target = board.cells[cell];
  bool match = !target.completed && target.model == *board.held;
  next.held.reset();
  if (match) {
    next.cells[cell].completed = true;
    return {next, PlaceOutcome::Completed};
  }
  return {next, PlaceOutcome::MismatchReturnedToStock};
}

bool is_complete(const BoardState& board) { return board.completed_count() == kPatternCells; }

nlohmann::json board_to_json(const BoardState& board) {
  nlohmann::json cells = nlohmann::json::array();
  for (int c = 0; c < kPatternCells; ++c) {
    const auto& cell = board.cells[c];
    cells.push_back({{"cell_id", c},
                     {"type", cell.model.type.id},
                     {"orient", cell.model.orientation.quarter_turns},
                     {"completed", cell.completed}});
  }
  nlohmann::json stock = nlohmann::json::array();
  for (auto t : board.stock) stock.push_back(t.id);
  nlohmann::json held = nullptr;
  if (board.held) held = {{"type", board.held->type.id}, {"orient", board.held->orientation.quarter_turns}};
  return {{"version", kBoardFormatVersion}, {"seed", board.seed}, {"cells", cells}, {"stock", stock}, {"held", held}};
}

namespace {

int checked_int(const nlohmann::json& j, const char* key, int lo, int hi) {
  int v = j.at(key).get<int>();
  if (v < lo || v > hi) throw DataError(std::string("board field '") + key + "' out of range");
  return v;
}

}  // namespace

BoardState board_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kBoardFormatVersion) throw VersionError("unsupported board version");
    BoardState board;
    board.seed = j.at("seed").get<std::uint64_t>();
    const auto& cells = j.at("cells");
    if (!cells.is_array() || cells.size() != kPatternCells) throw DataError("board needs 24 cells");
    for (const auto& cj : cells) {
      int id = checked_int(cj, "cell_id", 0, kPatternCells - 1);
      board.cells[id].model = {PieceType{checked_int(cj, "type", 1, kPieceTypes)},
                               Orientation{checked_int(cj, "orient", 0, 3)}};
      board.cells[id].completed = cj.at("completed").get<bool>();
    }
    const auto& stock = j.at("stock");
    if (!stock.is_array() || stock.size() != kStockSlots) throw DataError("board needs 4 stock slots");
    for (int s = 0; s < kStockSlots; ++s) {
      int t = stock[s].get<int>();
      if (t < 1 || t > kPieceTypes) throw DataError("stock type out of range");
      board.stock[s] = PieceType{t};
    }
    const auto& held = j.at("held");
    if (!held.is_null()) {
      board.held = Piece{PieceType{checked_int(held, "type", 1, kPieceTypes)},
                         Orientation{checked_int(held, "orient", 0, 3)}};
    }
    return board;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed board json: ") + e.what());
  }
}

}  // namespace gazeintent
