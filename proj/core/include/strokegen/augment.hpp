#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "strokegen/geometry.hpp"
#include "strokegen/rng.hpp"

namespace strokegen {

struct Translate {
  double dx = 0.0;
  double dy = 0.0;
};

/// Counter-clockwise in a y-up frame, about the content box center.
struct Rotate {
  double angle = 0.0;
};

enum class MirrorAxis {
  horizontal,  ///< reflect across a horizontal line (y flips)
  vertical,    ///< reflect across a vertical line (x flips)
};

struct Mirror {
  MirrorAxis axis = MirrorAxis::vertical;
};

/// Uniform shrink about the content box center, factor in (0, 1].
struct Scale {
  double factor = 1.0;
};

using Transform = std::variant<Translate, Rotate, Mirror, Scale>;

struct AugmentConfig {
  double reversal_probability = 0.5;
  double scale_min = 0.5;
  std::uint64_t rng_seed = 0;
};

void validate(const AugmentConfig& cfg);

struct TransformResult {
  StrokeImage image;
  /// Extra uniform shrink applied because the rotated content did not fit.
  double fit_scale = 1.0;
};

/// Applies `t` to every anchor and control point. Rotations that push the
/// content past the canvas are shifted back minimally, and shrunk about the
/// box center if shifting alone cannot make them fit. Translations that
/// leave the canvas throw ContainmentError.
TransformResult apply_transform(const StrokeImage& image, const Transform& t);

/// Shifts content minimally into the canvas, shrinking about the box center
/// first if it is larger than the canvas.
TransformResult fit_into_canvas(const StrokeImage& image);

inline StrokeImage transform_image(const StrokeImage& image, const Transform& t) {
  return apply_transform(image, t).image;
}

/// Reverses each path independently with probability p.
StrokeImage reverse_paths_random(const StrokeImage& image, double p, Rng& rng);

/// Nearest-neighbour path ordering from a random start path. Ties go to the
/// lower original index.
StrokeImage order_paths_greedy(const StrokeImage& image, Rng& rng);

/// Same as order_paths_greedy with a fixed first path.
std::vector<std::size_t> greedy_order(const StrokeImage& image, std::size_t start);

/// Sum of start-to-end gaps between consecutive paths.
double pen_up_travel(const StrokeImage& image);

/// What generate_patch drew and applied, for inspection and tests.
struct PatchRecord {
  StrokeImage image;
  double angle = 0.0;
  bool mirror_horizontal = false;
  bool mirror_vertical = false;
  double scale = 1.0;  ///< total uniform scale, including any fit shrink
  Translate offset{};
  std::vector<bool> reversed;             ///< per path, in source order
  std::vector<std::size_t> order;         ///< source index of each output path
};

/// rotate -> mirror -> scale -> translate -> reversal -> greedy reorder.
PatchRecord generate_patch_record(const StrokeImage& image, const AugmentConfig& cfg, Rng& rng);

inline StrokeImage generate_patch(const StrokeImage& image, const AugmentConfig& cfg, Rng& rng) {
  return generate_patch_record(image, cfg, rng).image;
}

/// n independent patches. One word is drawn from `rng` and patch i uses an
/// Rng seeded with derive_seed(word, i), so the result does not depend on
/// `jobs` (number of worker threads).
std::vector<StrokeImage> generate_patch_set(const StrokeImage& image, std::size_t n, const AugmentConfig& cfg,
                                            Rng& rng, unsigned jobs = 1);

}  // namespace strokegen
