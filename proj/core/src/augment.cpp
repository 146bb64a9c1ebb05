#include "strokegen/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "strokegen/errors.hpp"

namespace strokegen {

namespace {

// Slack for floating-point round-off at the canvas edge; points inside the
// slack are snapped onto the boundary.
constexpr double kEdgeSlack = 1e-9;

template <class F>
StrokeImage map_points(const StrokeImage& image, F&& f) {
  StrokeImage out;
  out.boundary = image.boundary;
  out.paths.reserve(image.paths.size());
  for (const auto& path : image.paths) {
    Path mapped;
    mapped.curves.reserve(path.curves.size());
    for (const auto& c : path.curves) mapped.curves.push_back({f(c.p0), f(c.p1), f(c.p2), f(c.p3)});
    out.paths.push_back(std::move(mapped));
  }
  return out;
}

StrokeImage snap_to_canvas(const StrokeImage& image) {
  const double b = image.boundary;
  return map_points(image, [b](Point p) { return Point{std::clamp(p.x, 0.0, b), std::clamp(p.y, 0.0, b)}; });
}

StrokeImage scale_about(const StrokeImage& image, Point center, double factor) {
  return map_points(image, [=](Point p) { return center + (p - center) * factor; });
}

StrokeImage shift(const StrokeImage& image, double dx, double dy) {
  return map_points(image, [=](Point p) { return Point{p.x + dx, p.y + dy}; });
}

double axis_shift(double lo, double hi, double boundary) {
  if (lo < 0.0) return -lo;
  if (hi > boundary) return boundary - hi;
  return 0.0;
}

// Shrinks (if needed) and shifts content so it lies inside the canvas.
TransformResult fit_to_canvas(StrokeImage image) {
  const double b = image.boundary;
  double fit_scale = 1.0;
  BoundingBox box = control_bounds(image);
  const double extent = std::max(box.width(), box.height());
  if (extent > b) {
    fit_scale = b / extent;
    image = scale_about(image, box.center(), fit_scale);
    box = control_bounds(image);
  }
  const double dx = axis_shift(box.min.x, box.max.x, b);
  const double dy = axis_shift(box.min.y, box.max.y, b);
  if (dx != 0.0 || dy != 0.0) image = shift(image, dx, dy);
  return {snap_to_canvas(image), fit_scale};
}

StrokeImage translate_checked(const StrokeImage& image, Translate t) {
  if (image.paths.empty()) return image;
  const BoundingBox box = control_bounds(image);
  const double b = image.boundary;
  const double slack = kEdgeSlack * b;
  if (box.min.x + t.dx < -slack || box.max.x + t.dx > b + slack || box.min.y + t.dy < -slack ||
      box.max.y + t.dy > b + slack) {
    throw ContainmentError("translation by (" + std::to_string(t.dx) + ", " + std::to_string(t.dy) +
                           ") moves content outside the canvas");
  }
  return snap_to_canvas(shift(image, t.dx, t.dy));
}

}  // namespace

void validate(const AugmentConfig& cfg) {
  if (!(cfg.reversal_probability >= 0.0 && cfg.reversal_probability <= 1.0)) {
    throw PreconditionError("reversal_probability must be in [0, 1]");
  }
  if (!(cfg.scale_min > 0.0 && cfg.scale_min <= 1.0)) throw PreconditionError("scale_min must be in (0, 1]");
}

TransformResult fit_into_canvas(const StrokeImage& image) {
  if (image.paths.empty()) return {image, 1.0};
  return fit_to_canvas(image);
}

TransformResult apply_transform(const StrokeImage& image, const Transform& t) {
  if (image.paths.empty()) return {image, 1.0};
  const Point center = control_bounds(image).center();
  return std::visit(
      [&](const auto& op) -> TransformResult {
        using Op = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<Op, Translate>) {
          return {translate_checked(image, op), 1.0};
        } else if constexpr (std::is_same_v<Op, Rotate>) {
          const double c = std::cos(op.angle);
          const double s = std::sin(op.angle);
          auto rotated = map_points(image, [&](Point p) {
            const Point d = p - center;
            return Point{center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y};
          });
          return fit_to_canvas(std::move(rotated));
        } else if constexpr (std::is_same_v<Op, Mirror>) {
          const bool flip_y = op.axis == MirrorAxis::horizontal;
          auto mirrored = map_points(image, [&](Point p) {
            return flip_y ? Point{p.x, 2.0 * center.y - p.y} : Point{2.0 * center.x - p.x, p.y};
          });
          return {snap_to_canvas(mirrored), 1.0};
        } else {
          if (!(op.factor > 0.0 && op.factor <= 1.0)) throw PreconditionError("scale factor must be in (0, 1]");
          return {snap_to_canvas(scale_about(image, center, op.factor)), 1.0};
        }
      },
      t);
}

StrokeImage reverse_paths_random(const StrokeImage& image, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("reversal probability must be in [0, 1]");
  StrokeImage out = image;
  for (auto& path : out.paths) {
    if (bernoulli(rng, p)) path = reverse_path(path);
  }
  return out;
}

std::vector<std::size_t> greedy_order(const StrokeImage& image, std::size_t start) {
  const std::size_t n = image.paths.size();
  if (n == 0) return {};
  if (start >= n) throw PreconditionError("greedy_order: start index out of range");
  std::vector<std::size_t> order{start};
  std::vector<bool> used(n, false);
  used[start] = true;
  while (order.size() < n) {
    const Point from = image.paths[order.back()].end();
    std::size_t best = n;
    double best_dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double d = distance(from, image.paths[i].start());
      if (best == n || d < best_dist) {
        best = i;
        best_dist = d;
      }
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

StrokeImage order_paths_greedy(const StrokeImage& image, Rng& rng) {
  if (image.paths.empty()) throw PreconditionError("order_paths_greedy: image has no paths");
  const auto order = greedy_order(image, uniform_index(rng, image.paths.size()));
  StrokeImage out;
  out.boundary = image.boundary;
  for (auto i : order) out.paths.push_back(image.paths[i]);
  return out;
}

double pen_up_travel(const StrokeImage& image) {
  double total = 0.0;
  for (std::size_t i = 1; i < image.paths.size(); ++i) {
    total += distance(image.paths[i - 1].end(), image.paths[i].start());
  }
  return total;
}

PatchRecord generate_patch_record(const StrokeImage& image, const AugmentConfig& cfg, Rng& rng) {
  validate(cfg);
  PatchRecord rec;
  rec.angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  auto rotated = apply_transform(image, Rotate{rec.angle});
  StrokeImage current = std::move(rotated.image);

  rec.mirror_horizontal = bernoulli(rng, 0.5);
  rec.mirror_vertical = bernoulli(rng, 0.5);
  if (rec.mirror_horizontal) current = transform_image(current, Mirror{MirrorAxis::horizontal});
  if (rec.mirror_vertical) current = transform_image(current, Mirror{MirrorAxis::vertical});

  const double factor = cfg.scale_min + (1.0 - cfg.scale_min) * (1.0 - uniform01(rng));
  current = transform_image(current, Scale{factor});
  rec.scale = rotated.fit_scale * factor;

  const double u = uniform01(rng);
  const double v = uniform01(rng);
  if (!current.paths.empty()) {
    const BoundingBox box = control_bounds(current);
    const double b = current.boundary;
    rec.offset.dx = -box.min.x + u * std::max(0.0, b - box.width());
    rec.offset.dy = -box.min.y + v * std::max(0.0, b - box.height());
    current = transform_image(current, rec.offset);
  }

  rec.reversed.resize(current.paths.size());
  for (std::size_t i = 0; i < current.paths.size(); ++i) {
    rec.reversed[i] = bernoulli(rng, cfg.reversal_probability);
    if (rec.reversed[i]) current.paths[i] = reverse_path(current.paths[i]);
  }

  if (!current.paths.empty()) {
    rec.order = greedy_order(current, uniform_index(rng, current.paths.size()));
    StrokeImage ordered;
    ordered.boundary = current.boundary;
    for (auto i : rec.order) ordered.paths.push_back(current.paths[i]);
    current = std::move(ordered);
  }
  rec.image = std::move(current);
  return rec;
}

std::vector<StrokeImage> generate_patch_set(const StrokeImage& image, std::size_t n, const AugmentConfig& cfg,
                                            Rng& rng, unsigned jobs) {
  if (n == 0) throw PreconditionError("generate_patch_set: n must be >= 1");
  validate(cfg);
  const std::uint64_t base = rng();
  std::vector<StrokeImage> patches(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng local(derive_seed(base, i));
      patches[i] = generate_patch(image, cfg, local);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + jobs - 1) / jobs;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      workers.emplace_back(work, begin, std::min(n, begin + chunk));
    }
  }
  return patches;
}

}  // namespace strokegen
