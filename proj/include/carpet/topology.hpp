#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "carpet/ident.hpp"

namespace carpet {

/// Largest level whose side 3^m still fits comfortably in 64-bit arithmetic.
inline constexpr int kMaxLevel = 39;

constexpr std::int64_t pow3(int k) {
  std::int64_t p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

enum class Direction : std::uint8_t { Left = 0, Right = 1, Up = 2, Down = 3 };
inline constexpr std::array<Direction, 4> kDirections{Direction::Left, Direction::Right, Direction::Up,
                                                      Direction::Down};
constexpr int dx(Direction d) { return d == Direction::Left ? -1 : d == Direction::Right ? 1 : 0; }
constexpr int dy(Direction d) { return d == Direction::Down ? -1 : d == Direction::Up ? 1 : 0; }
constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::Left: return Direction::Right;
    case Direction::Right: return Direction::Left;
    case Direction::Up: return Direction::Down;
    case Direction::Down: return Direction::Up;
  }
  return d;
}

/// Level-m cell: column i and row j in [0, 3^m); row 0 is the bottom row.
struct CellAddr {
  int m = 0;
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend bool operator==(const CellAddr&, const CellAddr&) = default;
};

/// Base-3 digits of v, most significant first, zero padded to width m.
std::string base3(std::int64_t v, int m);
/// "(1000,0222)" style label.
std::string format_addr(const CellAddr& a);
/// Parses "(1000,0222)"; the level is the digit count.
CellAddr parse_addr(std::string_view text);

/// True iff no base-3 digit position has a 1 in both i and j.
bool cell_exists(std::int64_t i, std::int64_t j, int m);

/// Outcome of one lattice step inside a 3^m window.
struct StepResult {
  enum class Kind : std::uint8_t { Cell, Exit } kind = Kind::Cell;
  std::int64_t i = 0;
  std::int64_t j = 0;
  bool stitched = false;  ///< crossed a vacant square
  bool reversed = false;  ///< the stitch reverses the offset along the entry edge
};

/// Steps from an existing cell of a level-m window. A step into a vacant square
/// of side 3^k is carried across it according to hole_type(k). A step leaving
/// the window reports Exit with the naive out-of-range coordinates.
template <class HoleType>
StepResult step_in_window(std::int64_t i, std::int64_t j, Direction d, int m, HoleType&& hole_type);

enum class GraphKind : std::uint8_t { Glued, Unglued };

inline constexpr std::int32_t kMissing = -1;

/// Finite cell graph of a level-m carpet. Cells are ordered row-major by (j, i).
class CarpetGraph {
 public:
  int level() const { return m_; }
  const IdentSequence& sequence() const { return seq_; }
  GraphKind kind() const { return kind_; }
  std::int64_t side() const { return side_; }

  std::size_t cell_count() const { return cells_.size(); }
  const CellAddr& cell(std::size_t k) const { return cells_[k]; }
  const std::vector<CellAddr>& cells() const { return cells_; }

  /// Neighbor slot of cell k in direction d, or kMissing.
  std::int32_t slot(std::size_t k, Direction d) const { return slots_[k][static_cast<int>(d)]; }
  const std::array<std::int32_t, 4>& slots(std::size_t k) const { return slots_[k]; }
  bool is_boundary(std::size_t k) const { return boundary_[k] != 0; }
  std::size_t boundary_count() const;

  /// Cell index of (i, j), or nullopt if the square is vacant or out of range.
  std::optional<std::size_t> index_of(std::int64_t i, std::int64_t j) const;

  /// Number of filled slots of cell k (counted with multiplicity).
  int degree(std::size_t k) const;

  void write_csv(std::ostream& os) const;

 private:
  friend CarpetGraph build_graph(int m, const IdentSequence& seq, GraphKind kind);

  int m_ = 0;
  std::int64_t side_ = 1;
  IdentSequence seq_;
  GraphKind kind_ = GraphKind::Glued;
  std::vector<CellAddr> cells_;
  std::vector<std::array<std::int32_t, 4>> slots_;
  std::vector<std::uint8_t> boundary_;
  std::vector<std::int32_t> grid_;  // side*side, kMissing for vacant squares
};

/// One step on a finite level-m carpet. Crossing the outer square wraps per
/// seq[0] for Glued graphs and yields nullopt for Unglued graphs.
std::optional<CellAddr> resolve_step(const CellAddr& addr, Direction d, const IdentSequence& seq, GraphKind kind);

CarpetGraph build_graph(int m, const IdentSequence& seq, GraphKind kind);
inline CarpetGraph build_glued(int m, const IdentSequence& seq) { return build_graph(m, seq, GraphKind::Glued); }
inline CarpetGraph build_unglued(int m, const IdentSequence& seq) {
  return build_graph(m, seq, GraphKind::Unglued);
}

// ---------------------------------------------------------------------------

namespace detail {
struct Digits {
  bool exists = true;
  int hole_level = -1;  // digit position of the largest vacant square containing the cell
};

inline Digits classify(std::int64_t i, std::int64_t j, int m) {
  Digits out;
  for (int k = 0; k < m; ++k) {
    std::int64_t di = i % 3, dj = j % 3;
    i /= 3;
    j /= 3;
    if (di == 1 && dj == 1) {
      out.exists = false;
      out.hole_level = k;
    }
  }
  return out;
}
}  // namespace detail

template <class HoleType>
StepResult step_in_window(std::int64_t i, std::int64_t j, Direction d, int m, HoleType&& hole_type) {
  const std::int64_t side = pow3(m);
  StepResult r;
  r.i = i + dx(d);
  r.j = j + dy(d);
  if (r.i < 0 || r.j < 0 || r.i >= side || r.j >= side) {
    r.kind = StepResult::Kind::Exit;
    return r;
  }
  const auto digits = detail::classify(r.i, r.j, m);
  if (digits.exists) return r;

  const int k = digits.hole_level;
  const std::int64_t s = pow3(k);
  const std::int64_t x0 = (r.i / (3 * s)) * (3 * s) + s;
  const std::int64_t y0 = (r.j / (3 * s)) * (3 * s) + s;
  const IdentType t = hole_type(k);
  r.stitched = true;
  switch (d) {
    case Direction::Up:
    case Direction::Down: {
      r.reversed = reverses_vertical_gluing(t);
      const std::int64_t off = r.i - x0;
      r.i = x0 + (r.reversed ? s - 1 - off : off);
      r.j = d == Direction::Up ? y0 + s : y0 - 1;
      break;
    }
    case Direction::Left:
    case Direction::Right: {
      r.reversed = reverses_horizontal_gluing(t);
      const std::int64_t off = r.j - y0;
      r.j = y0 + (r.reversed ? s - 1 - off : off);
      r.i = d == Direction::Right ? x0 + s : x0 - 1;
      break;
    }
  }
  return r;
}

}  // namespace carpet
