#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "strokegen/geometry.hpp"
#include "strokegen/training.hpp"

namespace strokegen {

struct GridLayout {
  std::size_t columns = 4;
  double cell_size = kDefaultBoundary;  ///< side of each cell's viewBox in canvas units
  double gap = 10.0;
  bool random_colors = false;
  std::uint64_t color_seed = 0;
};

struct CellRect {
  double x = 0.0;
  double y = 0.0;
  double size = 0.0;
};

/// Position of cell `index` on the grid.
CellRect grid_cell(const GridLayout& layout, std::size_t index);

/// Each image becomes one nested <svg> cell holding one <path> per polyline
/// ("M x y L x y ..."), stroke width 1.
std::string render_svg(std::span<const std::vector<Polyline>> images, const GridLayout& layout);

/// Same grid with the Bezier paths drawn as "C" segments.
std::string render_path_images(std::span<const StrokeImage> images, const GridLayout& layout);

/// Line chart of train and held-out loss per epoch.
std::string render_loss_plot(std::span<const EpochLoss> history, double width = 640.0, double height = 400.0);

/// "M 0 0 L 10 0" for a polyline.
std::string polyline_path_data(const Polyline& line);

}  // namespace strokegen
