#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "strokegen/augment.hpp"
#include "strokegen/errors.hpp"
#include "strokegen/tokenizer.hpp"

using namespace strokegen;

namespace {

using oracle::random_moves;
using oracle::random_polyline;

Move up(int dx, int dy) { return {false, dx, dy}; }
Move down(int dx, int dy) { return {true, dx, dy}; }

Path straight(Point a, Point b) { return Path{{{a, a + (b - a) * (1.0 / 3), a + (b - a) * (2.0 / 3), b}}}; }

}  // namespace

TEST(Quantize, RoundsHalfUp) {
  EXPECT_EQ(quantize(0.4), 0);
  EXPECT_EQ(quantize(0.5), 1);
  EXPECT_EQ(quantize(-0.5), 0);
  EXPECT_EQ(quantize(-0.6), -1);
  EXPECT_EQ(quantize(13.333), 13);
}

TEST(PolylineToMoves, LongSegmentSplitsIntoThree) {
  const Polyline line{{{0, 0}, {40, 0}}};
  EXPECT_EQ(polyline_to_moves(line, true, 15), (std::vector<Move>{down(13, 0), down(14, 0), down(13, 0)}));
}

TEST(PolylineToMoves, ShortSegmentIsOneMove) {
  const Polyline line{{{0, 0}, {10, 0}}};
  EXPECT_EQ(polyline_to_moves(line, false, 15), (std::vector<Move>{up(10, 0)}));
}

TEST(PolylineToMoves, TinySegmentsVanish) {
  const Polyline line{{{0, 0}, {0.2, 0.1}, {0.3, 0.2}}};
  EXPECT_TRUE(polyline_to_moves(line, true, 15).empty());
}

TEST(PolylineToMoves, TelescopesAndRespectsMaxLength) {
  Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const auto line = random_polyline(rng);
    for (int max_len : {1, 4, 15}) {
      const auto moves = polyline_to_moves(line, true, max_len);
      int sx = 0, sy = 0;
      for (const auto& m : moves) {
        ASSERT_LE(std::max(std::abs(m.dx), std::abs(m.dy)), max_len);
        ASSERT_FALSE(m.dx == 0 && m.dy == 0);
        sx += m.dx;
        sy += m.dy;
      }
      const Point a = line.points.front(), b = line.points.back();
      ASSERT_EQ(sx, quantize(b.x) - quantize(a.x));
      ASSERT_EQ(sy, quantize(b.y) - quantize(a.y));
    }
  }
}

TEST(PolylineToMoves, RejectsBadMaxLength) {
  EXPECT_THROW(polyline_to_moves(Polyline{{{0, 0}, {1, 1}}}, true, 0), PreconditionError);
}

TEST(ImageToMoves, EmptyImageIsJustImageEnd) {
  const auto seq = image_to_move_sequence(StrokeImage{}, 1.0, 15);
  ASSERT_EQ(seq.size(), 1u);
  EXPECT_TRUE(is_image_end(seq[0]));
}

TEST(ImageToMoves, ManualTrace) {
  StrokeImage img;
  img.paths.push_back(straight({5, 5}, {15, 5}));
  const auto seq = image_to_move_sequence(img, 1.0, 15);
  EXPECT_EQ(seq, (std::vector<Symbol>{up(5, 5), down(10, 0), kImageEnd}));
}

TEST(ImageToMoves, TravelBetweenPathsIsSplitPenUp) {
  StrokeImage img;
  img.paths.push_back(straight({5, 5}, {15, 5}));
  img.paths.push_back(straight({15, 25}, {15, 35}));
  const auto seq = image_to_move_sequence(img, 1.0, 15);
  EXPECT_EQ(seq, (std::vector<Symbol>{up(5, 5), down(10, 0), up(0, 10), up(0, 10), down(0, 10), kImageEnd}));
}

TEST(ImageToMoves, RoundTripWithinQuantizationBound) {
  const auto img = oracle::boxes_image();
  const auto seq = image_to_move_sequence(img, 1.0, 15);
  const auto lines = moves_to_image(seq);
  ASSERT_EQ(lines.size(), img.paths.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto flat = flatten_path(img.paths[i], 1.0);
    // Every flattened vertex has a decoded vertex within half a grid diagonal.
    for (Point v : flat.points) {
      double best = 1e9;
      for (Point d : lines[i].points) best = std::min(best, distance(v, d));
      ASSERT_LE(best, 0.5 * std::sqrt(2.0) + 1e-12);
    }
  }
  EXPECT_EQ(std::count_if(seq.begin(), seq.end(), is_image_end), 1);
  EXPECT_TRUE(is_image_end(seq.back()));
}

TEST(Quantization, NeverAccumulates) {
  Rng rng(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto line = random_polyline(rng);
    const Point start{static_cast<double>(quantize(line.points[0].x)), static_cast<double>(quantize(line.points[0].y))};
    // The decoded position after each prefix stays within half a unit of the
    // true vertex, however many segments precede it.
    for (std::size_t k = 1; k < line.points.size(); ++k) {
      const Polyline prefix{{line.points.begin(), line.points.begin() + static_cast<std::ptrdiff_t>(k + 1)}};
      Point cursor = start;
      for (const auto& m : polyline_to_moves(prefix, true, 15)) {
        cursor = cursor + Point{static_cast<double>(m.dx), static_cast<double>(m.dy)};
      }
      ASSERT_LE(std::abs(cursor.x - line.points[k].x), 0.5);
      ASSERT_LE(std::abs(cursor.y - line.points[k].y), 0.5);
    }
  }
}

TEST(Vocabulary, ClosedSizesMatchEnumeration) {
  for (int max_len : {1, 2, 15}) {
    std::size_t enumerated = 1;  // IMAGE_END
    for (int pen = 0; pen < 2; ++pen) {
      for (int dx = -max_len; dx <= max_len; ++dx) {
        for (int dy = -max_len; dy <= max_len; ++dy) enumerated += (dx != 0 || dy != 0);
      }
    }
    const std::vector<std::vector<Symbol>> corpora{{kImageEnd}};
    const auto vocab = build_vocabulary(corpora, max_len);
    EXPECT_EQ(vocab.size(), enumerated);
    EXPECT_EQ(vocab.size(), closed_vocabulary_size(max_len));
  }
  EXPECT_EQ(closed_vocabulary_size(15), 1921u);
  EXPECT_EQ(closed_vocabulary_size(1), 17u);
}

TEST(Vocabulary, IdsSortedWithImageEndLast) {
  const std::vector<std::vector<Symbol>> corpora{{kImageEnd}};
  const auto vocab = build_vocabulary(corpora, 1);
  EXPECT_EQ(vocab.id_of(kImageEnd), 16);
  EXPECT_EQ(vocab.image_end_id(), 16);
  EXPECT_EQ(std::get<Move>(vocab.symbol_of(0)), up(-1, -1));
  EXPECT_EQ(std::get<Move>(vocab.symbol_of(15)), down(1, 1));
  for (TokenId id = 1; id < 16; ++id) {
    EXPECT_LT(std::get<Move>(vocab.symbol_of(id - 1)), std::get<Move>(vocab.symbol_of(id)));
  }
  EXPECT_EQ(build_vocabulary(corpora, 1), vocab);
}

TEST(Vocabulary, ObservedModeKeepsOnlySeenMoves) {
  const std::vector<std::vector<Symbol>> corpora{{up(3, 4), down(1, 0), kImageEnd}, {down(1, 0), up(-2, 7), kImageEnd}};
  const auto vocab = build_vocabulary(corpora, 15, VocabMode::observed);
  EXPECT_EQ(vocab.size(), 4u);
  EXPECT_TRUE(vocab.contains(up(-2, 7)));
  EXPECT_FALSE(vocab.contains(up(1, 0)));
  EXPECT_THROW(vocab.id_of(up(1, 0)), LookupError);
}

TEST(EncodeDecode, ImageEndAndErrors) {
  const std::vector<std::vector<Symbol>> corpora{{kImageEnd}};
  const auto vocab = build_vocabulary(corpora, 15);
  const std::vector<Symbol> end{kImageEnd};
  EXPECT_EQ(encode(end, vocab), (TokenSequence{1920}));
  const std::vector<Symbol> too_long{down(16, 0)};
  EXPECT_THROW(encode(too_long, vocab), LookupError);
  const TokenSequence bad{1921};
  EXPECT_THROW(decode(bad, vocab), LookupError);
  const TokenSequence negative{-1};
  EXPECT_THROW(decode(negative, vocab), LookupError);
}

TEST(EncodeDecode, FuzzedRoundTrip) {
  const std::vector<std::vector<Symbol>> corpora{{kImageEnd}};
  const auto vocab = build_vocabulary(corpora, 15);
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    auto moves = random_moves(rng, uniform_index(rng, 200), 15);
    moves.push_back(kImageEnd);
    const auto ids = encode(moves, vocab);
    for (auto id : ids) ASSERT_LT(static_cast<std::size_t>(id), vocab.size());
    ASSERT_EQ(decode(ids, vocab), moves);
  }
}

TEST(MovesToImage, TraceAndPenUpOnly) {
  const std::vector<Symbol> moves{up(5, 5), down(10, 0), kImageEnd};
  const auto lines = moves_to_image(moves);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0].points, (std::vector<Point>{{5, 5}, {15, 5}}));
  const std::vector<Symbol> travel{up(1, 2), up(3, 4)};
  EXPECT_TRUE(moves_to_image(travel).empty());
}

TEST(MovesToImage, StopsAtImageEndAndToleratesMissingEnd) {
  const std::vector<Symbol> moves{down(1, 0), down(1, 0), up(5, 0), down(0, 2), kImageEnd, down(9, 9)};
  const auto lines = moves_to_image(moves);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].points, (std::vector<Point>{{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_EQ(lines[1].points, (std::vector<Point>{{7, 0}, {7, 2}}));
  const std::vector<Symbol> open{down(3, 0)};
  EXPECT_EQ(moves_to_image(open).size(), 1u);
}

TEST(ClosedVocabulary, EveryAugmentedPatchEncodes) {
  const auto img = oracle::boxes_image();
  const std::vector<std::vector<Symbol>> corpora{image_to_move_sequence(img, 1.0, 15)};
  const auto vocab = build_vocabulary(corpora, 15);
  Rng rng(12);
  const auto patches = generate_patch_set(img, 200, AugmentConfig{}, rng);
  for (const auto& p : patches) {
    const auto seq = image_to_move_sequence(p, 1.0, 15);
    ASSERT_NO_THROW(encode(seq, vocab));
    ASSERT_EQ(std::count_if(seq.begin(), seq.end(), is_image_end), 1);
  }
}

TEST(SequenceLength, MatchesTokenCountAndClamps) {
  const auto img = oracle::boxes_image();
  const auto n = image_to_move_sequence(img, 1.0, 15).size();
  EXPECT_EQ(sequence_length_for(img), std::min<std::size_t>(n, 512));
  EXPECT_EQ(sequence_length_for(img, 1.0, 15, 10), 10u);
  EXPECT_EQ(sequence_length_for(StrokeImage{}), 2u);
}

TEST(VocabularyJson, SchemaAndRoundTrip) {
  const std::vector<std::vector<Symbol>> corpora{{kImageEnd}};
  const auto vocab = build_vocabulary(corpora, 2);
  const auto j = to_json(vocab);
  EXPECT_EQ(j.at("max_move_length"), 2);
  EXPECT_EQ(j.at("specials").at("IMAGE_END"), 48);
  ASSERT_EQ(j.at("entries").size(), 48u);
  EXPECT_EQ(j.at("entries")[0], (nlohmann::json{{"pen", false}, {"dx", -2}, {"dy", -2}, {"id", 0}}));
  EXPECT_EQ(vocabulary_from_json(j), vocab);
  auto broken = j;
  broken["entries"][3]["id"] = 7;
  EXPECT_THROW(vocabulary_from_json(broken), FormatError);
}
