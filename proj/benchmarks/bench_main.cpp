#include <benchmark/benchmark.h>

#include <string>

#include <nlohmann/json.hpp>

#include "strokegen/augment.hpp"
#include "strokegen/io.hpp"
#include "strokegen/sampling.hpp"
#include "strokegen/training.hpp"

using namespace strokegen;

namespace {

const StrokeImage& boxes() {
  static const StrokeImage img =
      ingest(recording_from_json(read_json_file(std::string(STROKEGEN_DATA_DIR) + "/boxes.json")), 1.0).image;
  return img;
}

tensor::Var<float> random_var(std::size_t rows, std::size_t cols, Rng& rng) {
  tensor::Tensor<float> t({rows, cols});
  for (auto& v : t.data()) v = static_cast<float>(uniform(rng, -1.0, 1.0));
  return tensor::Var<float>::constant(std::move(t));
}

ModelConfig desk_model(std::size_t seq_len) {
  ModelConfig cfg = desk_preset().model;
  cfg.seq_len = seq_len;
  cfg.vocab_size = closed_vocabulary_size(kDefaultMaxMoveLength);
  return cfg;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_var(n, n, rng), b = random_var(n, n, rng);
  tensor::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(tensor::matmul(a, b).value().raw());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

void BM_FitPath(benchmark::State& state) {
  Rng rng(2);
  std::vector<Point> pts;
  Point p{90, 90};
  for (int i = 0; i < 200; ++i) {
    pts.push_back(p);
    p = p + Point{uniform(rng, -2, 2), uniform(rng, -2, 2)};
  }
  const double err = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_path(pts, err).curves.size());
}
BENCHMARK(BM_FitPath)->Arg(1)->Arg(3);

void BM_FlattenImage(benchmark::State& state) {
  for (auto _ : state) {
    std::size_t points = 0;
    for (const auto& path : boxes().paths) points += flatten_path(path, 1.0).points.size();
    benchmark::DoNotOptimize(points);
  }
}
BENCHMARK(BM_FlattenImage);

void BM_GeneratePatch(benchmark::State& state) {
  Rng rng(3);
  const AugmentConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(generate_patch(boxes(), cfg, rng).paths.size());
}
BENCHMARK(BM_GeneratePatch);

void BM_EncoderForward(benchmark::State& state) {
  const auto cfg = desk_model(static_cast<std::size_t>(state.range(0)));
  Rng rng(4);
  const auto params = EncoderParams<float>::initialize(cfg, rng);
  TokenSequence tokens(cfg.seq_len);
  for (auto& t : tokens) t = static_cast<TokenId>(uniform_index(rng, cfg.vocab_size));
  tensor::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(encoder_forward<float>(tokens, params, cfg).value().raw());
}
BENCHMARK(BM_EncoderForward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EncoderForwardBackward(benchmark::State& state) {
  const auto cfg = desk_model(static_cast<std::size_t>(state.range(0)));
  Rng rng(5);
  const auto params = EncoderParams<float>::initialize(cfg, rng);
  TokenSequence tokens(cfg.seq_len + 1);
  for (auto& t : tokens) t = static_cast<TokenId>(uniform_index(rng, cfg.vocab_size));
  const TokenSequence input(tokens.begin(), tokens.end() - 1), target(tokens.begin() + 1, tokens.end());
  auto vars = params.parameters();
  for (auto _ : state) {
    for (auto& v : vars) v.zero_grad();
    tensor::backward(tensor::cross_entropy(encoder_forward<float>(input, params, cfg), target));
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SampleImage(benchmark::State& state) {
  Checkpoint ckpt;
  const std::vector<std::vector<Symbol>> corpora{image_to_move_sequence(boxes(), 1.0, kDefaultMaxMoveLength)};
  ckpt.vocab = build_vocabulary(corpora, kDefaultMaxMoveLength);
  ckpt.model = desk_model(64);
  Rng rng(6);
  ckpt.params = EncoderParams<float>::initialize(ckpt.model, rng);
  SamplerConfig cfg;
  cfg.max_moves = 64;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_image(ckpt, cfg).moves.size());
    ++cfg.seed;
  }
}
BENCHMARK(BM_SampleImage)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
