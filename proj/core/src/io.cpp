#include "strokegen/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "strokegen/augment.hpp"
#include "strokegen/errors.hpp"

namespace strokegen {

namespace {

Point point_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw FormatError("expected a point [x, y], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json point_json(Point p) { return nlohmann::json::array({p.x, p.y}); }

double boundary_from(const nlohmann::json& j) {
  const double b = j.contains("boundary") ? j.at("boundary").get<double>() : kDefaultBoundary;
  if (!(b > 0.0)) throw FormatError("boundary must be positive");
  return b;
}

template <class F>
auto json_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Recording recording_from_json(const nlohmann::json& j) {
  return json_guard("recording", [&] {
    Recording rec;
    rec.boundary = boundary_from(j);
    for (const auto& stroke : j.at("strokes")) {
      std::vector<Point> points;
      for (const auto& p : stroke) points.push_back(point_from(p));
      rec.strokes.push_back(std::move(points));
    }
    return rec;
  });
}

nlohmann::json to_json(const Recording& rec) {
  nlohmann::json strokes = nlohmann::json::array();
  for (const auto& s : rec.strokes) {
    nlohmann::json pts = nlohmann::json::array();
    for (Point p : s) pts.push_back(point_json(p));
    strokes.push_back(std::move(pts));
  }
  return {{"boundary", rec.boundary}, {"strokes", std::move(strokes)}};
}

IngestResult ingest(const Recording& rec, double fit_error) {
  IngestResult out;
  out.image.boundary = rec.boundary;
  for (const auto& stroke : rec.strokes) {
    try {
      out.image.paths.push_back(fit_path(stroke, fit_error));
    } catch (const DegenerateInputError&) {
      ++out.skipped_strokes;
    }
  }
  if (!is_contained(out.image)) {
    auto fitted = fit_into_canvas(out.image);
    out.image = std::move(fitted.image);
    out.fit_scale = fitted.fit_scale;
  }
  return out;
}

nlohmann::json to_json(const StrokeImage& image) {
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& path : image.paths) {
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& c : path.curves) {
      curves.push_back({point_json(c.p0), point_json(c.p1), point_json(c.p2), point_json(c.p3)});
    }
    paths.push_back({{"curves", std::move(curves)}});
  }
  return {{"boundary", image.boundary}, {"paths", std::move(paths)}};
}

StrokeImage image_from_json(const nlohmann::json& j) {
  auto image = json_guard("path image", [&] {
    StrokeImage img;
    img.boundary = boundary_from(j);
    for (const auto& pj : j.at("paths")) {
      Path path;
      for (const auto& cj : pj.at("curves")) {
        if (!cj.is_array() || cj.size() != 4) throw FormatError("a curve needs exactly 4 points");
        path.curves.push_back({point_from(cj[0]), point_from(cj[1]), point_from(cj[2]), point_from(cj[3])});
      }
      img.paths.push_back(std::move(path));
    }
    return img;
  });
  try {
    validate_image(image);
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("path image: ") + e.what());
  }
  return image;
}

nlohmann::json patch_set_to_json(std::span<const StrokeImage> patches) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : patches) arr.push_back(to_json(p));
  return {{"patches", std::move(arr)}};
}

std::vector<StrokeImage> patch_set_from_json(const nlohmann::json& j) {
  return json_guard("patch set", [&] {
    std::vector<StrokeImage> out;
    for (const auto& p : j.at("patches")) out.push_back(image_from_json(p));
    return out;
  });
}

nlohmann::json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
  if (!out) throw Error("failed writing " + file.string());
}

}  // namespace strokegen
