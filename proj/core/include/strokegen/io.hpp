#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "strokegen/geometry.hpp"

namespace strokegen {

/// Raw pen recording: {"boundary": 180, "strokes": [[[x, y], ...], ...]}.
struct Recording {
  double boundary = kDefaultBoundary;
  std::vector<std::vector<Point>> strokes;
};

Recording recording_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Recording& rec);

struct IngestResult {
  StrokeImage image;
  std::size_t skipped_strokes = 0;  ///< strokes with fewer than 2 distinct points
  double fit_scale = 1.0;           ///< < 1 when fitted controls had to be pulled into the canvas
};

/// Fits every stroke with fit_path(max_error). Fitted control points that
/// overshoot the canvas are pulled back in by fit_into_canvas.
IngestResult ingest(const Recording& rec, double fit_error);

/// Path-image document:
/// {"boundary": 180, "paths": [{"curves": [[[x,y],[x,y],[x,y],[x,y]], ...]}, ...]}
nlohmann::json to_json(const StrokeImage& image);
StrokeImage image_from_json(const nlohmann::json& j);

/// Patch-set document: {"patches": [<path-image>, ...]}
nlohmann::json patch_set_to_json(std::span<const StrokeImage> patches);
std::vector<StrokeImage> patch_set_from_json(const nlohmann::json& j);

/// Reads and parses a JSON file; FormatError on malformed JSON.
nlohmann::json read_json_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace strokegen
