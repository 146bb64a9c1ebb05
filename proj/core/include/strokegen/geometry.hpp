#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace strokegen {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Point operator*(double s, Point a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Distance from `p` to the closed segment [a, b].
double distance_to_segment(Point p, Point a, Point b);

/// Cubic Bezier: p0 and p3 are anchors, p1 and p2 controls.
struct CubicBezier {
  Point p0, p1, p2, p3;

  Point eval(double t) const;
  Point derivative(double t) const;
  Point second_derivative(double t) const;

  friend bool operator==(const CubicBezier&, const CubicBezier&) = default;
};

/// One pen stroke as a chain of cubic curves. Non-empty, and consecutive
/// curves share their joint point exactly (curves[i].p3 == curves[i+1].p0).
struct Path {
  std::vector<CubicBezier> curves;

  Point start() const { return curves.front().p0; }
  Point end() const { return curves.back().p3; }

  friend bool operator==(const Path&, const Path&) = default;
};

struct Polyline {
  std::vector<Point> points;

  friend bool operator==(const Polyline&, const Polyline&) = default;
};

inline constexpr double kDefaultBoundary = 180.0;

/// Ordered strokes on a square canvas [0, boundary]^2.
struct StrokeImage {
  std::vector<Path> paths;
  double boundary = kDefaultBoundary;

  friend bool operator==(const StrokeImage&, const StrokeImage&) = default;
};

struct BoundingBox {
  Point min{};
  Point max{};

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  Point center() const { return (min + max) * 0.5; }
};

/// Throws PreconditionError when the path is empty, non-finite or not contiguous.
void validate_path(const Path& path);

/// Throws PreconditionError unless boundary > 0, every path is valid and
/// every anchor/control point lies inside [0, boundary]^2.
void validate_image(const StrokeImage& image);

bool is_contained(const StrokeImage& image);

/// Box over all anchor and control points. Empty images give a zero box.
BoundingBox control_bounds(const StrokeImage& image);

double arc_length(const CubicBezier& curve);
double arc_length(const Path& path);
double arc_length(const StrokeImage& image);
double arc_length(const Polyline& polyline);

/// Fits the fewest cubic curves it can through `points` such that each point
/// is within `max_error` of the path at its assigned parameter.
///
/// Chord-length parameterization, least-squares control points with fixed end
/// tangents, up to four Newton-Raphson reparameterization passes, then a split
/// at the worst point. Consecutive duplicate points are removed first.
/// Throws DegenerateInputError with fewer than 2 distinct points and
/// PreconditionError when max_error <= 0.
Path fit_path(std::span<const Point> points, double max_error);

/// Flattens one curve by recursive midpoint subdivision until each piece's
/// control points lie within `max_error` of its chord. Appends the points
/// after p0 to `out`.
void flatten_curve(const CubicBezier& curve, double max_error, std::vector<Point>& out);

/// Polyline within `max_error` of the path. Endpoints are kept exactly.
Polyline flatten_path(const Path& path, double max_error);

/// Path traversed the other way: curves reversed and each curve's points reversed.
Path reverse_path(const Path& path);

}  // namespace strokegen
