// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <vector>

#include "curaug/core.hpp"

namespace curaug {

struct GridLayout {
  int columns = 1;
  int cell_padding = 0;
  Rgb background{0, 0, 0};
};

/**
 * Paste equally sized cells into a row-major grid. Output size is
 * columns*(cell_w + 2*padding) by rows*(cell_h + 2*padding); each cell is a
 * bit-exact copy of its input.
 */
inline Image compose_grid(const std::vector<Image>& cells, const GridLayout& layout) {
  if (cells.empty()) {
    throw InvalidParameter("compose_grid: no cells");
  }
  if (layout.columns < 1 || layout.cell_padding < 0) {
    throw InvalidParameter("compose_grid: bad layout");
  }
  const int cell_w = cells.front().width();
  const int cell_h = cells.front().height();
  for (const Image& cell : cells) {
    if (cell.width() != cell_w || cell.height() != cell_h) {
      throw ShapeMismatch("compose_grid: cells differ in size");
    }
  }
  const int columns = layout.columns;
  const int rows = static_cast<int>((cells.size() + columns - 1) / columns);
  const int pitch_x = cell_w + 2 * layout.cell_padding;
  const int pitch_y = cell_h + 2 * layout.cell_padding;
  Image out(columns * pitch_x, rows * pitch_y, layout.background);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const int cx = static_cast<int>(i) % columns * pitch_x + layout.cell_padding;
    const int cy = static_cast<int>(i) / columns * pitch_y + layout.cell_padding;
    for (int y = 0; y < cell_h; ++y) {
      for (int x = 0; x < cell_w; ++x) {
        out.at(cx + x, cy + y) = cells[i].at(x, y);
      }
    }
  }
  return out;
}

}  // namespace curaug
