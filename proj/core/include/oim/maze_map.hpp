#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace oim {

/// One grid square. The enumerator values are the characters of the text
/// format.
enum class Cell : char {
  free = '.',
  blocked = '#',
  punishing = 'P',
  start = 'S',
  goal = 'G',
  subgoal = 'g',
  flag = 'F',
};

struct GridPos {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const GridPos&, const GridPos&) = default;
};

/// Rectangular grid with exactly one start and at least one goal.
class MazeMap {
 public:
  MazeMap() = default;
  /// Throws UsageError if the invariants do not hold.
  MazeMap(std::size_t width, std::size_t height, std::vector<Cell> cells);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  Cell at(std::size_t row, std::size_t col) const { return cells_[row * width_ + col]; }
  Cell at(GridPos p) const { return at(p.row, p.col); }
  bool inside(long row, long col) const {
    return row >= 0 && col >= 0 && static_cast<std::size_t>(row) < height_ &&
           static_cast<std::size_t>(col) < width_;
  }

  GridPos start() const;
  /// Row-major positions of every cell of the given kind.
  std::vector<GridPos> find(Cell kind) const;
  std::size_t count(Cell kind) const;

  friend bool operator==(const MazeMap&, const MazeMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Cell> cells_;
};

/// Parses newline-separated rows. Blank trailing lines and '\r' are ignored.
/// Errors are ParseError with a 1-based line and column.
MazeMap parse_maze_map(std::string_view text);

/// Inverse of parse_maze_map; every row ends with '\n'.
std::string render_maze_map(const MazeMap& map);

}  // namespace oim
