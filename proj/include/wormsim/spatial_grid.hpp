#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wormsim/geometry.hpp"

namespace wormsim::abm {

/// Uniform bucket grid on the periodic square [0, side)^2. Any two points
/// closer than `min_cell_width` (minimum image) sit in the same or adjacent
/// cells. Cells are widened so there are at most about two per point; with
/// fewer than three cells per side the grid degenerates to a single bucket so
/// wrapped neighbourhoods never alias.
class SpatialGrid {
 public:
  SpatialGrid(double side, double min_cell_width, std::size_t expected_points = 0);

  void rebuild(std::span<const Vec2> positions);

  int cells_per_side() const { return cells_; }

  /// Calls f(i, j) once for every unordered pair sharing a cell or adjacent
  /// cells. Requires a prior rebuild().
  template <class F>
  void for_each_candidate_pair(F&& f) const {
    static constexpr int kForward[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};
    for (const std::uint32_t cell : occupied_) {
      const std::uint32_t begin = start_[cell];
      const std::uint32_t end = start_[cell + 1];
      for (std::uint32_t a = begin; a < end; ++a) {
        for (std::uint32_t b = a + 1; b < end; ++b) f(items_[a], items_[b]);
      }
      if (cells_ == 1) continue;
      const int cx = static_cast<int>(cell) % cells_;
      const int cy = static_cast<int>(cell) / cells_;
      for (const auto& off : kForward) {
        const int other = wrap_cell(cx + off[0]) + wrap_cell(cy + off[1]) * cells_;
        const std::uint32_t obegin = start_[other];
        const std::uint32_t oend = start_[other + 1];
        for (std::uint32_t a = begin; a < end; ++a) {
          for (std::uint32_t b = obegin; b < oend; ++b) f(items_[a], items_[b]);
        }
      }
    }
  }

  /// Calls f(j) for every agent in the 3x3 block of cells around agent i's
  /// cell, i itself included.
  template <class F>
  void for_each_near(std::uint32_t i, F&& f) const {
    const int cell = cell_of_[i];
    if (cells_ == 1) {
      for (std::uint32_t k = start_[0]; k < start_[1]; ++k) f(items_[k]);
      return;
    }
    const int cx = cell % cells_;
    const int cy = cell / cells_;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int other = wrap_cell(cx + dx) + wrap_cell(cy + dy) * cells_;
        for (std::uint32_t k = start_[other]; k < start_[other + 1]; ++k) f(items_[k]);
      }
    }
  }

 private:
  int wrap_cell(int c) const { return c < 0 ? c + cells_ : (c >= cells_ ? c - cells_ : c); }

  double side_;
  int cells_;
  double inverse_width_;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> items_;
  std::vector<std::uint32_t> cell_of_;
  std::vector<std::uint32_t> cursor_;
  std::vector<std::uint32_t> occupied_;  ///< nonempty cells, ascending
};

}  // namespace wormsim::abm
