#pragma once

// Block-copy task model: a 6x4 pattern of shaded pieces is copied by picking
// pieces from a four-slot stock and dropping them, correctly rotated, onto
// the matching pattern cells.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gazeintent/geometry.hpp"

namespace gazeintent {

inline constexpr int kPieceTypes = 4;
inline constexpr int kPatternCells = 24;
inline constexpr int kStockSlots = 4;
inline constexpr int kCellsPerType = kPatternCells / kPieceTypes;
inline constexpr int kPreCompletedCells = 5;
inline constexpr int kBoardFormatVersion = 1;

enum class ActionKind { Pick, Place };

[[nodiscard]] const char* to_string(ActionKind kind);
[[nodiscard]] ActionKind action_kind_from_string(const std::string& text);

/// One of the four black/white block patterns, 1..4.
struct PieceType {
  int id = 1;
  friend constexpr bool operator==(PieceType, PieceType) = default;
  friend constexpr auto operator<=>(PieceType, PieceType) = default;
};

/// Rotation in quarter turns, 0..3.
struct Orientation {
  int quarter_turns = 0;

  [[nodiscard]] constexpr Orientation rotated() const { return {(quarter_turns + 1) % 4}; }
  friend constexpr bool operator==(Orientation, Orientation) = default;
};

struct Piece {
  PieceType type;
  Orientation orientation;
  friend constexpr bool operator==(const Piece&, const Piece&) = default;
};

struct BoardLayout {
  std::vector<Vec2> stock_slots;
  std::vector<Vec2> pattern_cells;
  double cell_size = 80.0;
};

/// 80 mm cells on a 6x4 grid with 10 mm gutters; stock column 120 mm left of the workspace.
[[nodiscard]] BoardLayout standard_layout();

/// Throws LayoutError unless counts, distinctness and stock/workspace separation hold.
void validate_layout(const BoardLayout& layout);

struct PatternCell {
  Piece model;
  bool completed = false;
  friend constexpr bool operator==(const PatternCell&, const PatternCell&) = default;
};

struct BoardState {
  std::uint64_t seed = 0;
  std::array<PatternCell, kPatternCells> cells{};
  std::array<PieceType, kStockSlots> stock{};
  std::optional<Piece> held;

  [[nodiscard]] int completed_count() const;
  friend bool operator==(const BoardState&, const BoardState&) = default;
};

enum class PlaceOutcome { Completed, MismatchReturnedToStock };

[[nodiscard]] const char* to_string(PlaceOutcome outcome);

/// Objects live in one id space: stock slots first, then pattern cells.
using ObjectId = int;

[[nodiscard]] constexpr ObjectId stock_object(int slot) { return slot; }
[[nodiscard]] constexpr ObjectId cell_object(int cell) { return kStockSlots + cell; }
[[nodiscard]] constexpr bool is_stock_object(ObjectId id) { return id >= 0 && id < kStockSlots; }
[[nodiscard]] constexpr bool is_cell_object(ObjectId id) {
  return id >= kStockSlots && id < kStockSlots + kPatternCells;
}
[[nodiscard]] constexpr int object_index(ObjectId id) { return is_stock_object(id) ? id : id - kStockSlots; }
[[nodiscard]] Vec2 object_position(const BoardLayout& layout, ObjectId id);

/// Pure function of (seed, layout): 6 cells per type, random orientations,
/// 5 pre-completed cells, one stock slot per type.
[[nodiscard]] BoardState new_board(std::uint64_t seed, const BoardLayout& layout);

/// Stock slots whose type still has an incomplete pattern cell, ascending.
[[nodiscard]] std::vector<int> legal_pick_candidates(const BoardState& board);
/// Incomplete cells whose model type equals the held piece's type, ascending.
[[nodiscard]] std::vector<int> legal_place_candidates(const BoardState& board);

/// Object-id form of the candidate set for the next action of `kind`.
[[nodiscard]] std::vector<ObjectId> candidate_objects(const BoardState& board, ActionKind kind);
/// Pick while the hand is empty, place while holding.
[[nodiscard]] ActionKind next_action_kind(const BoardState& board);

/// The stock slot holding `type`, or -1.
[[nodiscard]] int stock_slot_of(const BoardState& board, PieceType type);
/// Incomplete cells of `type`, ascending.
[[nodiscard]] std::vector<int> incomplete_cells_of(const BoardState& board, PieceType type);

[[nodiscard]] BoardState apply_pick(const BoardState& board, int slot);
[[nodiscard]] BoardState rotate_held(const BoardState& board);
[[nodiscard]] std::pair<BoardState, PlaceOutcome> apply_place(const BoardState& board, int cell);
[[nodiscard]] bool is_complete(const BoardState& board);

[[nodiscard]] nlohmann::json board_to_json(const BoardState& board);
/// Throws VersionError / DataError on schema violations.
[[nodiscard]] BoardState board_from_json(const nlohmann::json& j);

}  // namespace gazeintent
