#include "oim/maze_map.hpp"

#include <algorithm>

#include "oim/errors.hpp"

namespace oim {

namespace {

bool valid_cell(char c) {
  switch (c) {
    case '.': case '#': case 'P': case 'S': case 'G': case 'g': case 'F': return true;
    default: return false;
  }
}

}  // namespace

MazeMap::MazeMap(std::size_t width, std::size_t height, std::vector<Cell> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  if (width_ == 0 || height_ == 0) throw UsageError("maze map must not be empty");
  if (cells_.size() != width_ * height_) throw UsageError("maze map is not rectangular");
  if (count(Cell::start) != 1) throw UsageError("maze map needs exactly one start cell 'S'");
  if (count(Cell::goal) < 1) throw UsageError("maze map needs at least one goal cell 'G'");
}

GridPos MazeMap::start() const { return find(Cell::start).front(); }

std::vector<GridPos> MazeMap::find(Cell kind) const {
  std::vector<GridPos> out;
  for (std::size_t r = 0; r < height_; ++r)
    for (std::size_t c = 0; c < width_; ++c)
      if (at(r, c) == kind) out.push_back({r, c});
  return out;
}

std::size_t MazeMap::count(Cell kind) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), kind));
}

MazeMap parse_maze_map(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty maze map", 1, 1);

  const std::size_t width = lines.front().size();
  std::vector<Cell> cells;
  cells.reserve(width * lines.size());
  std::size_t starts = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto line = lines[r];
    if (line.size() != width)
      throw ParseError("row has " + std::to_string(line.size()) + " cells, expected " +
                           std::to_string(width),
                       r + 1, std::min(line.size(), width) + 1);
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (!valid_cell(line[c]))
        throw ParseError(std::string("unknown cell character '") + line[c] + "'", r + 1, c + 1);
      if (line[c] == 'S' && ++starts > 1) throw ParseError("second start cell 'S'", r + 1, c + 1);
      cells.push_back(static_cast<Cell>(line[c]));
    }
  }
  if (width == 0) throw ParseError("empty maze row", 1, 1);
  if (starts == 0) throw ParseError("no start cell 'S'", 1, 1);
  if (std::find(cells.begin(), cells.end(), Cell::goal) == cells.end())
    throw ParseError("no goal cell 'G'", 1, 1);
  return MazeMap(width, lines.size(), std::move(cells));
}

std::string render_maze_map(const MazeMap& map) {
  std::string out;
  out.reserve((map.width() + 1) * map.height());
  for (std::size_t r = 0; r < map.height(); ++r) {
    for (std::size_t c = 0; c < map.width(); ++c) out.push_back(static_cast<char>(map.at(r, c)));
    out.push_back('\n');
  }
  return out;
}

}  // namespace oim
