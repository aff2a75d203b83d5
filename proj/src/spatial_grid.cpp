#include "wormsim/spatial_grid.hpp"

#include <algorithm>
#include <cmath>

namespace wormsim::abm {

namespace {
constexpr int kMaxCellsPerSide = 4096;
}

SpatialGrid::SpatialGrid(double side, double min_cell_width, std::size_t expected_points)
    : side_(side) {
  double per_side = min_cell_width > 0.0 ? std::floor(side / min_cell_width) : 1.0;
  per_side = std::min(per_side, static_cast<double>(kMaxCellsPerSide));
  if (expected_points > 0) {
    per_side = std::min(per_side, std::floor(std::sqrt(2.0 * static_cast<double>(expected_points) + 9.0)));
  }
  cells_ = per_side >= 3.0 ? static_cast<int>(per_side) : 1;
  inverse_width_ = cells_ / side_;
  start_.assign(static_cast<std::size_t>(cells_) * cells_ + 1, 0);
}

void SpatialGrid::rebuild(std::span<const Vec2> positions) {
  const std::size_t n = positions.size();
  cell_of_.resize(n);
  items_.resize(n);
  std::fill(start_.begin(), start_.end(), 0u);

  for (std::size_t i = 0; i < n; ++i) {
    const int cx = std::min(static_cast<int>(positions[i].x * inverse_width_), cells_ - 1);
    const int cy = std::min(static_cast<int>(positions[i].y * inverse_width_), cells_ - 1);
    const auto cell = static_cast<std::uint32_t>(cy * cells_ + cx);
    cell_of_[i] = cell;
    ++start_[cell + 1];
  }
  occupied_.clear();
  for (std::size_t c = 1; c < start_.size(); ++c) {
    if (start_[c] != 0) occupied_.push_back(static_cast<std::uint32_t>(c - 1));
    start_[c] += start_[c - 1];
  }

  // Stable fill keeps agents in index order inside each cell.
  cursor_.assign(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) items_[cursor_[cell_of_[i]]++] = static_cast<std::uint32_t>(i);
}

}  // namespace wormsim::abm
