#include "strokegen/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include <nlohmann/json.hpp>

#include "strokegen/errors.hpp"

namespace strokegen {

namespace {

struct GridPoint {
  int x = 0;
  int y = 0;
};

GridPoint round_point(Point p) { return {quantize(p.x), quantize(p.y)}; }

void push_move(std::vector<Move>& out, bool pen, int dx, int dy, int max_len) {
  if (dx == 0 && dy == 0) return;
  if (std::max(std::abs(dx), std::abs(dy)) > max_len) {
    // Only reachable through round-off on a piece of length ~max_len.
    push_move(out, pen, dx / 2, dy / 2, max_len);
    push_move(out, pen, dx - dx / 2, dy - dy / 2, max_len);
    return;
  }
  out.push_back({pen, dx, dy});
}

}  // namespace

std::vector<Move> polyline_to_moves(const Polyline& polyline, bool pen, int max_len) {
  if (max_len < 1) throw PreconditionError("polyline_to_moves: max_len must be >= 1");
  std::vector<Move> moves;
  if (polyline.points.empty()) return moves;
  GridPoint prev = round_point(polyline.points.front());
  for (std::size_t i = 1; i < polyline.points.size(); ++i) {
    const Point a = polyline.points[i - 1];
    const Point b = polyline.points[i];
    const double len = distance(a, b);
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / max_len)));
    for (std::size_t k = 1; k <= pieces; ++k) {
      const Point p = k == pieces ? b : a + (b - a) * (static_cast<double>(k) / static_cast<double>(pieces));
      const GridPoint r = round_point(p);
      push_move(moves, pen, r.x - prev.x, r.y - prev.y, max_len);
      prev = r;
    }
  }
  return moves;
}

std::vector<Symbol> image_to_move_sequence(const StrokeImage& image, double flatten_error, int max_len) {
  std::vector<Symbol> out;
  Point cursor{0.0, 0.0};
  for (const auto& path : image.paths) {
    const Polyline flat = flatten_path(path, flatten_error);
    for (const Move& m : polyline_to_moves(Polyline{{cursor, flat.points.front()}}, false, max_len)) {
      out.emplace_back(m);
    }
    for (const Move& m : polyline_to_moves(flat, true, max_len)) out.emplace_back(m);
    const GridPoint end = round_point(flat.points.back());
    cursor = {static_cast<double>(end.x), static_cast<double>(end.y)};
  }
  out.emplace_back(kImageEnd);
  return out;
}

std::vector<Polyline> moves_to_image(std::span<const Symbol> moves) {
  std::vector<Polyline> lines;
  int x = 0;
  int y = 0;
  bool drawing = false;
  for (const auto& s : moves) {
    if (is_image_end(s)) break;
    const Move& m = std::get<Move>(s);
    const Point from{static_cast<double>(x), static_cast<double>(y)};
    x += m.dx;
    y += m.dy;
    const Point to{static_cast<double>(x), static_cast<double>(y)};
    if (m.pen) {
      if (!drawing) lines.push_back(Polyline{{from}});
      lines.back().points.push_back(to);
    }
    drawing = m.pen;
  }
  return lines;
}

std::int64_t Vocabulary::key(const Move& m) {
  return (static_cast<std::int64_t>(m.pen) << 42) | ((static_cast<std::int64_t>(m.dx) + (1 << 20)) << 21) |
         (static_cast<std::int64_t>(m.dy) + (1 << 20));
}

Vocabulary::Vocabulary(std::vector<Move> moves, int max_move_length) : max_move_length_(max_move_length) {
  std::sort(moves.begin(), moves.end());
  moves.erase(std::unique(moves.begin(), moves.end()), moves.end());
  for (const auto& m : moves) {
    if (m.dx == 0 && m.dy == 0) throw PreconditionError("vocabulary: zero move is not a valid token");
  }
  moves_ = std::move(moves);
  index_.reserve(moves_.size());
  for (std::size_t i = 0; i < moves_.size(); ++i) index_.emplace(key(moves_[i]), static_cast<TokenId>(i));
}

bool Vocabulary::contains(const Symbol& s) const {
  if (is_image_end(s)) return true;
  return index_.contains(key(std::get<Move>(s)));
}

TokenId Vocabulary::id_of(const Symbol& s) const {
  if (is_image_end(s)) return image_end_id();
  const Move& m = std::get<Move>(s);
  const auto it = index_.find(key(m));
  if (it == index_.end()) {
    throw LookupError("move (pen=" + std::to_string(m.pen) + ", " + std::to_string(m.dx) + ", " +
                      std::to_string(m.dy) + ") is not in the vocabulary");
  }
  return it->second;
}

Symbol Vocabulary::symbol_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    throw LookupError("token id " + std::to_string(id) + " out of range");
  }
  if (id == image_end_id()) return kImageEnd;
  return moves_[static_cast<std::size_t>(id)];
}

Vocabulary build_vocabulary(std::span<const std::vector<Symbol>> corpora, int max_len, VocabMode mode) {
  if (corpora.empty()) throw PreconditionError("build_vocabulary: no corpora");
  if (max_len < 1) throw PreconditionError("build_vocabulary: max_len must be >= 1");
  std::set<Move> moves;
  for (const auto& seq : corpora) {
    for (const auto& s : seq) {
      if (!is_image_end(s)) moves.insert(std::get<Move>(s));
    }
  }
  if (mode == VocabMode::closed) {
    for (int pen = 0; pen < 2; ++pen) {
      for (int dx = -max_len; dx <= max_len; ++dx) {
        for (int dy = -max_len; dy <= max_len; ++dy) {
          if (dx != 0 || dy != 0) moves.insert({pen == 1, dx, dy});
        }
      }
    }
  }
  return Vocabulary({moves.begin(), moves.end()}, max_len);
}

TokenSequence encode(std::span<const Symbol> moves, const Vocabulary& vocab) {
  TokenSequence out;
  out.reserve(moves.size());
  for (const auto& s : moves) out.push_back(vocab.id_of(s));
  return out;
}

std::vector<Symbol> decode(std::span<const TokenId> tokens, const Vocabulary& vocab) {
  std::vector<Symbol> out;
  out.reserve(tokens.size());
  for (auto id : tokens) out.push_back(vocab.symbol_of(id));
  return out;
}

std::size_t sequence_length_for(const StrokeImage& image, double flatten_error, int max_len, std::size_t ceiling) {
  const std::size_t n = image_to_move_sequence(image, flatten_error, max_len).size();
  return std::clamp<std::size_t>(n, 2, std::max<std::size_t>(2, ceiling));
}

nlohmann::json to_json(const Vocabulary& vocab) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < vocab.regular_count(); ++i) {
    const Move m = std::get<Move>(vocab.symbol_of(static_cast<TokenId>(i)));
    entries.push_back({{"pen", m.pen}, {"dx", m.dx}, {"dy", m.dy}, {"id", i}});
  }
  return {{"max_move_length", vocab.max_move_length()},
          {"entries", std::move(entries)},
          {"specials", {{"IMAGE_END", vocab.image_end_id()}}}};
}

Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  try {
    std::vector<Move> moves;
    const auto& entries = j.at("entries");
    moves.reserve(entries.size());
    for (const auto& e : entries) moves.push_back({e.at("pen").get<bool>(), e.at("dx").get<int>(), e.at("dy").get<int>()});
    Vocabulary vocab(moves, j.at("max_move_length").get<int>());
    for (const auto& e : entries) {
      const Move m{e.at("pen").get<bool>(), e.at("dx").get<int>(), e.at("dy").get<int>()};
      if (vocab.id_of(m) != e.at("id").get<TokenId>()) throw FormatError("vocabulary ids are not in sorted order");
    }
    if (j.at("specials").at("IMAGE_END").get<TokenId>() != vocab.image_end_id()) {
      throw FormatError("vocabulary IMAGE_END id mismatch");
    }
    return vocab;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("vocabulary JSON: ") + e.what());
  }
}

}  // namespace strokegen
