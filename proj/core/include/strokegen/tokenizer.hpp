#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "strokegen/geometry.hpp"

namespace strokegen {

/// Relative pen command on the integer unit grid. pen == true draws.
struct Move {
  bool pen = true;
  int dx = 0;
  int dy = 0;

  friend auto operator<=>(const Move&, const Move&) = default;
};

enum class SpecialKind : std::uint8_t { image_end };

struct SpecialMove {
  SpecialKind kind = SpecialKind::image_end;

  friend auto operator<=>(const SpecialMove&, const SpecialMove&) = default;
};

inline constexpr SpecialMove kImageEnd{SpecialKind::image_end};

using Symbol = std::variant<Move, SpecialMove>;
using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

inline bool is_image_end(const Symbol& s) { return std::holds_alternative<SpecialMove>(s); }

inline constexpr int kDefaultMaxMoveLength = 15;

/// Rounds to the nearest grid unit (halves go up), so neighbouring pieces of a
/// split segment never differ by more than the piece length.
inline int quantize(double v) { return static_cast<int>(std::floor(v + 0.5)); }

/// Moves along `polyline`. Segments longer than `max_len` are cut into
/// ceil(len / max_len) equal pieces; piece endpoints are rounded to the grid
/// and each move is the difference of consecutive rounded positions, so
/// rounding error does not accumulate. Zero moves are dropped.
std::vector<Move> polyline_to_moves(const Polyline& polyline, bool pen, int max_len);

/// Flattens every path and emits, per path, pen-up travel from the current
/// cursor (starting at the origin) followed by pen-down moves, then IMAGE_END.
std::vector<Symbol> image_to_move_sequence(const StrokeImage& image, double flatten_error, int max_len);

/// Replays moves from the origin. Each maximal run of pen-down moves becomes
/// one polyline; replay stops at IMAGE_END.
std::vector<Polyline> moves_to_image(std::span<const Symbol> moves);

enum class VocabMode {
  closed,    ///< every grid move with max(|dx|,|dy|) <= max_len, both pen states
  observed,  ///< only moves present in the corpora
};

/// Dense id assignment: regular moves sorted by (pen, dx, dy), IMAGE_END last.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<Move> moves, int max_move_length);

  std::size_t size() const { return moves_.size() + 1; }
  std::size_t regular_count() const { return moves_.size(); }
  int max_move_length() const { return max_move_length_; }
  TokenId image_end_id() const { return static_cast<TokenId>(moves_.size()); }

  bool contains(const Symbol& s) const;
  /// Throws LookupError for unknown moves.
  TokenId id_of(const Symbol& s) const;
  /// Throws LookupError for ids >= size().
  Symbol symbol_of(TokenId id) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.max_move_length_ == b.max_move_length_ && a.moves_ == b.moves_;
  }

 private:
  static std::int64_t key(const Move& m);

  std::vector<Move> moves_;
  std::unordered_map<std::int64_t, TokenId> index_;
  int max_move_length_ = kDefaultMaxMoveLength;
};

/// Closed mode adds the whole grid; observed mode keeps only moves in `corpora`.
Vocabulary build_vocabulary(std::span<const std::vector<Symbol>> corpora, int max_len,
                            VocabMode mode = VocabMode::closed);

/// 2 * ((2 * max_len + 1)^2 - 1) + 1
constexpr std::size_t closed_vocabulary_size(int max_len) {
  const auto side = static_cast<std::size_t>(2 * max_len + 1);
  return 2 * (side * side - 1) + 1;
}

TokenSequence encode(std::span<const Symbol> moves, const Vocabulary& vocab);
std::vector<Symbol> decode(std::span<const TokenId> tokens, const Vocabulary& vocab);

/// Token count of `image` at the given encoding, clamped to [2, ceiling].
std::size_t sequence_length_for(const StrokeImage& image, double flatten_error = 1.0,
                                int max_len = kDefaultMaxMoveLength, std::size_t ceiling = 512);

nlohmann::json to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

}  // namespace strokegen
