#include "strokegen/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>

#include "strokegen/errors.hpp"

namespace strokegen {

namespace {

bool finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

Point normalized(Point v) {
  const double len = norm(v);
  return len > 0.0 ? v * (1.0 / len) : Point{};
}

// Schneider-style fitter over one contiguous index range of the input.
class CurveFitter {
 public:
  CurveFitter(std::span<const Point> points, double max_error)
      : points_(points), error_sq_(max_error * max_error) {}

  Path run() {
    const std::size_t last = points_.size() - 1;
    if (last == 1) {
      emit(line_curve(0, 1, normalized(points_[1] - points_[0]), normalized(points_[0] - points_[1])));
    } else {
      fit(0, last, left_tangent(0), right_tangent(last));
    }
    return Path{std::move(curves_)};
  }

 private:
  static constexpr int kMaxReparameterizations = 4;

  Point left_tangent(std::size_t i) const { return normalized(points_[i + 1] - points_[i]); }
  Point right_tangent(std::size_t i) const { return normalized(points_[i - 1] - points_[i]); }

  Point center_tangent(std::size_t i) const {
    Point t = points_[i - 1] - points_[i + 1];
    if (norm(t) == 0.0) t = points_[i - 1] - points_[i];
    return normalized(t);
  }

  CubicBezier line_curve(std::size_t first, std::size_t last, Point t1, Point t2) const {
    const Point a = points_[first];
    const Point b = points_[last];
    const double third = distance(a, b) / 3.0;
    return {a, a + t1 * third, b + t2 * third, b};
  }

  void emit(const CubicBezier& curve) { curves_.push_back(curve); }

  std::vector<double> chord_length_parameters(std::size_t first, std::size_t last) const {
    std::vector<double> u(last - first + 1, 0.0);
    for (std::size_t i = first + 1; i <= last; ++i) {
      u[i - first] = u[i - first - 1] + distance(points_[i], points_[i - 1]);
    }
    const double total = u.back();
    for (auto& v : u) v /= total;
    u.back() = 1.0;
    return u;
  }

  CubicBezier generate(std::size_t first, std::size_t last, const std::vector<double>& u, Point t1, Point t2) const {
    const Point a = points_[first];
    const Point b = points_[last];
    double c00 = 0, c01 = 0, c11 = 0, x0 = 0, x1 = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double t = u[i];
      const double s = 1.0 - t;
      const double b0 = s * s * s, b1 = 3 * t * s * s, b2 = 3 * t * t * s, b3 = t * t * t;
      const Point alpha1 = t1 * b1;
      const Point alpha2 = t2 * b2;
      c00 += dot(alpha1, alpha1);
      c01 += dot(alpha1, alpha2);
      c11 += dot(alpha2, alpha2);
      const Point residual = points_[first + i] - (a * (b0 + b1) + b * (b2 + b3));
      x0 += dot(alpha1, residual);
      x1 += dot(alpha2, residual);
    }
    const double det = c00 * c11 - c01 * c01;
    double alpha_l = 0.0, alpha_r = 0.0;
    if (det != 0.0) {
      alpha_l = (x0 * c11 - x1 * c01) / det;
      alpha_r = (c00 * x1 - c01 * x0) / det;
    }
    const double seg = distance(a, b);
    const double eps = 1e-6 * seg;
    if (!(alpha_l >= eps) || !(alpha_r >= eps) || !std::isfinite(alpha_l) || !std::isfinite(alpha_r)) {
      return line_curve(first, last, t1, t2);
    }
    return {a, a + t1 * alpha_l, b + t2 * alpha_r, b};
  }

  // Largest squared residual at the assigned parameters, and its interior index.
  std::pair<double, std::size_t> max_error(const CubicBezier& curve, std::size_t first, std::size_t last,
                                           const std::vector<double>& u) const {
    double worst = 0.0;
    std::size_t split = (first + last + 1) / 2;
    for (std::size_t i = first + 1; i < last; ++i) {
      const Point d = curve.eval(u[i - first]) - points_[i];
      const double e = dot(d, d);
      if (e >= worst) {
        worst = e;
        split = i;
      }
    }
    return {worst, split};
  }

  std::vector<double> reparameterize(const CubicBezier& curve, std::size_t first, const std::vector<double>& u) const {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double t = u[i];
      const Point diff = curve.eval(t) - points_[first + i];
      const Point d1 = curve.derivative(t);
      const Point d2 = curve.second_derivative(t);
      const double numerator = dot(diff, d1);
      const double denominator = dot(d1, d1) + dot(diff, d2);
      double next = t;
      if (denominator != 0.0 && std::isfinite(denominator)) next = t - numerator / denominator;
      out[i] = std::clamp(next, 0.0, 1.0);
    }
    return out;
  }

  void fit(std::size_t first, std::size_t last, Point t1, Point t2) {
    if (last - first == 1) {
      emit(line_curve(first, last, t1, t2));
      return;
    }
    auto u = chord_length_parameters(first, last);
    CubicBezier curve = generate(first, last, u, t1, t2);
    auto [err, split] = max_error(curve, first, last, u);
    if (err <= error_sq_) {
      emit(curve);
      return;
    }
    if (err <= 16.0 * error_sq_) {
      for (int iter = 0; iter < kMaxReparameterizations; ++iter) {
        u = reparameterize(curve, first, u);
        curve = generate(first, last, u, t1, t2);
        std::tie(err, split) = max_error(curve, first, last, u);
        if (err <= error_sq_) {
          emit(curve);
          return;
        }
      }
    }
    const Point center = center_tangent(split);
    fit(first, split, t1, center);
    fit(split, last, center * -1.0, t2);
  }

  std::span<const Point> points_;
  double error_sq_;
  std::vector<CubicBezier> curves_;
};

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 8> kGaussNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

constexpr int kMaxFlattenDepth = 30;

void flatten_recursive(const CubicBezier& c, double max_error, int depth, std::vector<Point>& out) {
  const double flatness = std::max(distance_to_segment(c.p1, c.p0, c.p3), distance_to_segment(c.p2, c.p0, c.p3));
  if (flatness <= max_error || depth >= kMaxFlattenDepth) {
    out.push_back(c.p3);
    return;
  }
  // de Casteljau at t = 0.5
  const Point p01 = (c.p0 + c.p1) * 0.5;
  const Point p12 = (c.p1 + c.p2) * 0.5;
  const Point p23 = (c.p2 + c.p3) * 0.5;
  const Point p012 = (p01 + p12) * 0.5;
  const Point p123 = (p12 + p23) * 0.5;
  const Point mid = (p012 + p123) * 0.5;
  flatten_recursive({c.p0, p01, p012, mid}, max_error, depth + 1, out);
  flatten_recursive({mid, p123, p23, c.p3}, max_error, depth + 1, out);
}

}  // namespace

double distance_to_segment(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len_sq = dot(ab, ab);
  if (len_sq == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
  return distance(p, a + ab * t);
}

Point CubicBezier::eval(double t) const {
  const double s = 1.0 - t;
  return p0 * (s * s * s) + p1 * (3 * s * s * t) + p2 * (3 * s * t * t) + p3 * (t * t * t);
}

Point CubicBezier::derivative(double t) const {
  const double s = 1.0 - t;
  return (p1 - p0) * (3 * s * s) + (p2 - p1) * (6 * s * t) + (p3 - p2) * (3 * t * t);
}

Point CubicBezier::second_derivative(double t) const {
  return (p2 - p1 * 2.0 + p0) * (6 * (1.0 - t)) + (p3 - p2 * 2.0 + p1) * (6 * t);
}

void validate_path(const Path& path) {
  if (path.curves.empty()) throw PreconditionError("path has no curves");
  for (std::size_t i = 0; i < path.curves.size(); ++i) {
    const auto& c = path.curves[i];
    if (!finite(c.p0) || !finite(c.p1) || !finite(c.p2) || !finite(c.p3)) {
      throw PreconditionError("path curve " + std::to_string(i) + " has a non-finite point");
    }
    if (i + 1 < path.curves.size() && !(c.p3 == path.curves[i + 1].p0)) {
      throw PreconditionError("path is not contiguous at curve " + std::to_string(i));
    }
  }
}

bool is_contained(const StrokeImage& image) {
  const double b = image.boundary;
  auto inside = [b](Point p) { return p.x >= 0.0 && p.x <= b && p.y >= 0.0 && p.y <= b; };
  for (const auto& path : image.paths) {
    for (const auto& c : path.curves) {
      if (!inside(c.p0) || !inside(c.p1) || !inside(c.p2) || !inside(c.p3)) return false;
    }
  }
  return true;
}

void validate_image(const StrokeImage& image) {
  if (!(image.boundary > 0.0) || !std::isfinite(image.boundary)) {
    throw PreconditionError("image boundary must be positive");
  }
  for (const auto& path : image.paths) validate_path(path);
  if (!is_contained(image)) throw PreconditionError("image content leaves the canvas boundary");
}

BoundingBox control_bounds(const StrokeImage& image) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundingBox box{{inf, inf}, {-inf, -inf}};
  bool any = false;
  for (const auto& path : image.paths) {
    for (const auto& c : path.curves) {
      for (Point p : {c.p0, c.p1, c.p2, c.p3}) {
        box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y)};
        box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y)};
        any = true;
      }
    }
  }
  return any ? box : BoundingBox{};
}

double arc_length(const CubicBezier& curve) {
  constexpr int kPieces = 16;
  double total = 0.0;
  for (int piece = 0; piece < kPieces; ++piece) {
    const double a = static_cast<double>(piece) / kPieces;
    const double half = 0.5 / kPieces;
    const double mid = a + half;
    double sum = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
      sum += kGaussWeights[i] * norm(curve.derivative(mid + half * kGaussNodes[i]));
    }
    total += sum * half;
  }
  return total;
}

double arc_length(const Path& path) {
  double total = 0.0;
  for (const auto& c : path.curves) total += arc_length(c);
  return total;
}

double arc_length(const StrokeImage& image) {
  double total = 0.0;
  for (const auto& p : image.paths) total += arc_length(p);
  return total;
}

double arc_length(const Polyline& polyline) {
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.points.size(); ++i) {
    total += distance(polyline.points[i - 1], polyline.points[i]);
  }
  return total;
}

Path fit_path(std::span<const Point> points, double max_error) {
  if (!(max_error > 0.0)) throw PreconditionError("fit_path: max_error must be > 0");
  std::vector<Point> unique;
  unique.reserve(points.size());
  for (Point p : points) {
    if (!finite(p)) throw PreconditionError("fit_path: non-finite input point");
    if (unique.empty() || !(unique.back() == p)) unique.push_back(p);
  }
  if (unique.size() < 2) throw DegenerateInputError("fit_path: need at least 2 distinct points");
  return CurveFitter(unique, max_error).run();
}

void flatten_curve(const CubicBezier& curve, double max_error, std::vector<Point>& out) {
  if (!(max_error > 0.0)) throw PreconditionError("flatten: max_error must be > 0");
  flatten_recursive(curve, max_error, 0, out);
}

Polyline flatten_path(const Path& path, double max_error) {
  validate_path(path);
  Polyline line;
  line.points.push_back(path.start());
  for (const auto& c : path.curves) flatten_curve(c, max_error, line.points);
  return line;
}

Path reverse_path(const Path& path) {
  Path out;
  out.curves.reserve(path.curves.size());
  for (auto it = path.curves.rbegin(); it != path.curves.rend(); ++it) {
    out.curves.push_back({it->p3, it->p2, it->p1, it->p0});
  }
  return out;
}

}  // namespace strokegen
