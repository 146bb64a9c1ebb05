#include "strokegen/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "strokegen/rng.hpp"

namespace strokegen {

namespace {

std::string num(double v) {
  if (v == 0.0) return "0";  // no "-0"
  return fmt::format("{}", v);
}

std::string color_for(Rng& rng) {
  // Mid-brightness hues so strokes stay visible on white.
  const auto r = 40 + uniform_index(rng, 176);
  const auto g = 40 + uniform_index(rng, 176);
  const auto b = 40 + uniform_index(rng, 176);
  return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
}

std::string document(double width, double height, const std::string& body) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n{2}</svg>\n",
      num(width), num(height), body);
}

std::size_t row_count(std::size_t n, std::size_t columns) { return (n + columns - 1) / columns; }

template <class Image, class Emit>
std::string grid(std::span<const Image> images, const GridLayout& layout, Emit&& emit) {
  const std::size_t cols = std::max<std::size_t>(1, layout.columns);
  const std::size_t used_cols = images.empty() ? 1 : std::min(cols, images.size());
  const std::size_t rows = std::max<std::size_t>(1, row_count(images.size(), cols));
  GridLayout l = layout;
  l.columns = cols;
  const double width = layout.gap + static_cast<double>(used_cols) * (layout.cell_size + layout.gap);
  const double height = layout.gap + static_cast<double>(rows) * (layout.cell_size + layout.gap);
  Rng colors(layout.color_seed);
  std::string body;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const CellRect cell = grid_cell(l, i);
    body += fmt::format(
        "<svg x=\"{0}\" y=\"{1}\" width=\"{2}\" height=\"{2}\" viewBox=\"0 0 {2} {2}\">\n"
        "<rect width=\"{2}\" height=\"{2}\" fill=\"none\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n<g>\n",
        num(cell.x), num(cell.y), num(cell.size));
    emit(images[i], [&]() { return layout.random_colors ? color_for(colors) : std::string("black"); }, body);
    body += "</g>\n</svg>\n";
  }
  return document(width, height, body);
}

}  // namespace

CellRect grid_cell(const GridLayout& layout, std::size_t index) {
  const std::size_t cols = std::max<std::size_t>(1, layout.columns);
  const double pitch = layout.cell_size + layout.gap;
  return {layout.gap + static_cast<double>(index % cols) * pitch, layout.gap + static_cast<double>(index / cols) * pitch,
          layout.cell_size};
}

std::string polyline_path_data(const Polyline& line) {
  std::string d;
  for (std::size_t i = 0; i < line.points.size(); ++i) {
    if (i) d += ' ';
    d += fmt::format("{} {} {}", i == 0 ? "M" : "L", num(line.points[i].x), num(line.points[i].y));
  }
  return d;
}

std::string render_svg(std::span<const std::vector<Polyline>> images, const GridLayout& layout) {
  return grid(images, layout, [](const std::vector<Polyline>& lines, auto&& next_color, std::string& body) {
    for (const auto& line : lines) {
      body += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n", polyline_path_data(line),
                          next_color());
    }
  });
}

std::string render_path_images(std::span<const StrokeImage> images, const GridLayout& layout) {
  return grid(images, layout, [](const StrokeImage& image, auto&& next_color, std::string& body) {
    for (const auto& path : image.paths) {
      std::string d = fmt::format("M {} {}", num(path.start().x), num(path.start().y));
      for (const auto& c : path.curves) {
        d += fmt::format(" C {} {} {} {} {} {}", num(c.p1.x), num(c.p1.y), num(c.p2.x), num(c.p2.y), num(c.p3.x),
                         num(c.p3.y));
      }
      body += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n", d, next_color());
    }
  });
}

std::string render_loss_plot(std::span<const EpochLoss> history, double width, double height) {
  const double left = 60, right = 20, top = 20, bottom = 40;
  const double pw = width - left - right, ph = height - top - bottom;
  std::string body = fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888888\"/>\n", num(left), num(top),
      num(pw), num(ph));
  if (!history.empty()) {
    double lo = history.front().heldout_loss, hi = lo;
    for (const auto& e : history) {
      lo = std::min({lo, e.train_loss, e.heldout_loss});
      hi = std::max({hi, e.train_loss, e.heldout_loss});
    }
    if (hi - lo < 1e-12) {
      hi += 0.5;
      lo -= 0.5;
    }
    const double first = static_cast<double>(history.front().epoch);
    const double last = static_cast<double>(history.back().epoch);
    const double span = std::max(1.0, last - first);
    auto px = [&](std::size_t epoch) { return left + (static_cast<double>(epoch) - first) / span * pw; };
    auto py = [&](double loss) { return top + (hi - loss) / (hi - lo) * ph; };
    auto series = [&](auto member, const char* color) {
      std::string d;
      for (std::size_t i = 0; i < history.size(); ++i) {
        d += fmt::format("{}{} {} {}", i ? " " : "", i ? "L" : "M", num(px(history[i].epoch)),
                         num(py(history[i].*member)));
      }
      return fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", d, color);
    };
    body += series(&EpochLoss::train_loss, "#1f77b4");
    body += series(&EpochLoss::heldout_loss, "#d62728");
    body += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">{:.4f}</text>\n", 4, num(top + 12), hi);
    body += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">{:.4f}</text>\n", 4, num(top + ph), lo);
    body += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">epoch {}</text>\n", num(left), num(height - 12),
                        history.front().epoch);
    body += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">epoch {}</text>\n",
                        num(left + pw), num(height - 12), history.back().epoch);
  }
  body += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#1f77b4\">train</text>\n", num(left + 10),
                      num(top + 16));
  body += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#d62728\">held-out</text>\n", num(left + 60),
                      num(top + 16));
  return document(width, height, body);
}

}  // namespace strokegen
