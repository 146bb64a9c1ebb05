#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "oracles.hpp"
#include "strokegen/errors.hpp"
#include "strokegen/training.hpp"

using namespace strokegen;
using oracle::TensorD;
using oracle::VarD;

namespace {

TrainConfig tiny_train() {
  TrainConfig cfg = desk_preset();
  cfg.epochs = 3;
  cfg.patches_per_epoch = 4;
  cfg.batch_size = 2;
  cfg.warmup_steps = 10;
  cfg.heldout_patches = 4;
  cfg.seed = 11;
  cfg.model.d_model = 8;
  cfg.model.n_layers = 1;
  cfg.model.n_heads = 2;
  cfg.model.d_ff = 16;
  cfg.model.seq_len = 32;
  return cfg;
}

const StrokeImage& boxes() {
  static const StrokeImage img = oracle::boxes_image();
  return img;
}

TokenSequence iota_sequence(std::size_t n, TokenId start = 0) {
  TokenSequence s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = start + static_cast<TokenId>(i);
  return s;
}

}  // namespace

TEST(LrSchedule, WarmupPeakAndDecay) {
  const double peak = lr_schedule(4000, 52, 4000);
  EXPECT_NEAR(peak, std::pow(52.0, -0.5) * std::pow(4000.0, -0.5), 1e-15);
  EXPECT_NEAR(lr_schedule(1, 52, 4000), std::pow(52.0, -0.5) * std::pow(4000.0, -1.5), 1e-12);
  for (std::uint64_t s = 1; s < 4000; s += 37) EXPECT_LT(lr_schedule(s, 52, 4000), lr_schedule(s + 1, 52, 4000));
  for (std::uint64_t s = 4000; s < 20000; s += 113) EXPECT_GT(lr_schedule(s, 52, 4000), lr_schedule(s + 1, 52, 4000));
  EXPECT_NEAR(lr_schedule(16000, 52, 4000), std::pow(52.0, -0.5) / std::sqrt(16000.0), 1e-15);
  EXPECT_THROW(lr_schedule(0, 52, 4000), PreconditionError);
  EXPECT_THROW(lr_schedule(1, 0, 4000), PreconditionError);
}

TEST(Adam, ZeroGradientLeavesParametersAlone) {
  std::vector<VarD> params{VarD::parameter(TensorD({1, 3}, {1.0, -2.0, 3.0}))};
  params[0].zero_grad();
  params[0].mutable_grad();
  AdamState<double> state;
  adam_step<double>(params, state, 0.1, AdamHyper{});
  EXPECT_EQ(params[0].value(), TensorD({1, 3}, {1.0, -2.0, 3.0}));
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ConstantGradientMovesByLearningRate) {
  // Bias correction makes every step of a steady gradient exactly lr * sign(g)
  // up to eps.
  std::vector<VarD> params{VarD::parameter(TensorD({1, 2}, {0.0, 0.0}))};
  AdamState<double> state;
  const double lr = 0.01;
  for (int step = 1; step <= 5; ++step) {
    params[0].mutable_grad() = TensorD({1, 2}, {3.0, -0.5});
    adam_step<double>(params, state, lr, AdamHyper{});
    EXPECT_NEAR(params[0].value()[0], -lr * step, 1e-3 * lr * step);
    EXPECT_NEAR(params[0].value()[1], lr * step, 1e-3 * lr * step);
  }
}

TEST(Adam, MinimizesQuadratic) {
  std::vector<VarD> params{VarD::parameter(TensorD({1, 1}, 5.0))};
  AdamState<double> state;
  for (int step = 0; step < 2000; ++step) {
    params[0].zero_grad();
    tensor::backward(tensor::sum(tensor::mul(params[0], params[0])));
    adam_step<double>(params, state, 1e-2, AdamHyper{});
  }
  EXPECT_LT(std::abs(params[0].value()[0]), 1e-3);
}

TEST(Adam, NonFiniteGradientThrows) {
  std::vector<VarD> params{VarD::parameter(TensorD({1, 2}, 1.0))};
  params[0].mutable_grad()[1] = std::numeric_limits<double>::quiet_NaN();
  AdamState<double> state;
  EXPECT_THROW(adam_step<double>(params, state, 0.1, AdamHyper{}), NumericError);
}

TEST(StreamWindows, ExactWindowAndShiftedTargets) {
  const std::vector<TokenSequence> one{iota_sequence(9)};
  const auto w = stream_windows(one, 8);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].input, iota_sequence(8));
  EXPECT_EQ(w[0].target, iota_sequence(8, 1));
  EXPECT_THROW(stream_windows(std::vector<TokenSequence>{iota_sequence(8)}, 8), PreconditionError);
}

TEST(StreamWindows, ConsecutiveDisjointAcrossPatchBoundaries) {
  const std::size_t L = 6;
  // Ten patches of uneven length whose concatenation is 0..10(L+1)-1 + tail.
  std::vector<TokenSequence> patches;
  TokenId next = 0;
  for (std::size_t len : {5u, 9u, 3u, 12u, 7u, 8u, 4u, 10u, 6u, 8u}) {
    patches.push_back(iota_sequence(len, next));
    next += static_cast<TokenId>(len);
  }
  ASSERT_EQ(next, 72);  // 10 * (L + 1) + 2 trailing tokens
  const auto w = stream_windows(patches, L);
  ASSERT_EQ(w.size(), 10u);
  for (std::size_t k = 0; k < w.size(); ++k) {
    EXPECT_EQ(w[k].input, iota_sequence(L, static_cast<TokenId>(k * (L + 1))));
    for (std::size_t i = 0; i + 1 < L; ++i) EXPECT_EQ(w[k].target[i], w[k].input[i + 1]);
  }
}

TEST(StreamBatches, PartitionOfWindows) {
  std::vector<TokenSequence> patches;
  for (int i = 0; i < 7; ++i) patches.push_back(iota_sequence(10, 100 * i));
  Rng rng(3);
  const auto batches = build_stream_batches(patches, 4, 3, rng);
  std::size_t total = 0;
  std::multiset<TokenSequence> inputs;
  for (const auto& b : batches) {
    EXPECT_LE(b.size(), 3u);
    total += b.size();
    for (const auto& w : b) {
      EXPECT_EQ(w.input.size(), 4u);
      inputs.insert(w.input);
    }
  }
  EXPECT_EQ(total, 70u / 5u);
  EXPECT_EQ(std::set<TokenSequence>(inputs.begin(), inputs.end()).size(), total);
  EXPECT_EQ(batches.size(), 5u);
  Rng again(3);
  const auto repeat = build_stream_batches(patches, 4, 3, again);
  ASSERT_EQ(repeat.size(), batches.size());
  for (std::size_t i = 0; i < batches.size(); ++i) {
    for (std::size_t j = 0; j < batches[i].size(); ++j) EXPECT_EQ(repeat[i][j].input, batches[i][j].input);
  }
  Rng r(0);
  EXPECT_THROW(build_stream_batches(patches, 4, 0, r), PreconditionError);
}

TEST(Presets, ValuesAndValidation) {
  const auto full = full_preset();
  EXPECT_EQ(full.epochs, 200u);
  EXPECT_EQ(full.patches_per_epoch, 500u);
  EXPECT_EQ(full.batch_size, 200u);
  EXPECT_EQ(full.warmup_steps, 4000u);
  EXPECT_EQ(full.model.d_model, 52u);
  EXPECT_EQ(full.model.n_layers, 6u);
  EXPECT_EQ(full.model.n_heads, 4u);
  EXPECT_EQ(full.model.d_ff, 2048u);
  EXPECT_NO_THROW(full.validate());
  EXPECT_NO_THROW(desk_preset().validate());
  auto bad = full;
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), PreconditionError);
  bad = full;
  bad.vocab_mode = VocabMode::observed;
  EXPECT_THROW(bad.validate(), PreconditionError);
  EXPECT_EQ(train_config_from_json(to_json(full)).batch_size, 200u);
}

TEST(Training, DeterministicAndCheckpointRoundTrip) {
  const auto cfg = tiny_train();
  std::vector<EpochLoss> seen;
  const auto a = train(boxes(), cfg, [&](const EpochLoss& e) { seen.push_back(e); });
  const auto b = train(boxes(), cfg);
  EXPECT_EQ(seen, a.history);
  ASSERT_EQ(a.history.size(), 3u);
  EXPECT_EQ(a.model.seq_len, 32u);
  EXPECT_EQ(a.model.vocab_size, closed_vocabulary_size(cfg.max_move_len));
  const std::string text = serialize_checkpoint(a);
  EXPECT_EQ(text, serialize_checkpoint(b));

  const auto back = parse_checkpoint(text);
  EXPECT_EQ(serialize_checkpoint(back), text);
  const auto heldout = held_out_patch_set(boxes(), cfg);
  const double la = evaluate_held_out(a, heldout);
  EXPECT_EQ(evaluate_held_out(back, heldout), la);
  EXPECT_EQ(la, a.history.back().heldout_loss);
  EXPECT_GT(la, 0.0);

  auto other_cfg = cfg;
  other_cfg.seed = 12;
  EXPECT_NE(serialize_checkpoint(train(boxes(), other_cfg)), text);

  const auto dir = std::filesystem::temp_directory_path() / "strokegen_training_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  save_checkpoint(a, dir / "ckpt.json");
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(dir / "ckpt.json")), text);
  std::filesystem::remove_all(dir.parent_path());
}

TEST(Training, EvaluationIsPure) {
  const auto ckpt = train(boxes(), tiny_train());
  const auto before = serialize_checkpoint(ckpt);
  const auto heldout = held_out_patch_set(boxes(), ckpt.train);
  const double first = evaluate_held_out(ckpt, heldout);
  EXPECT_EQ(evaluate_held_out(ckpt, heldout), first);
  EXPECT_EQ(serialize_checkpoint(ckpt), before);
}

TEST(Training, FixedPatchSetAndObservedVocabulary) {
  auto cfg = tiny_train();
  cfg.fixed_patch_set = 4;
  cfg.vocab_mode = VocabMode::observed;
  const auto ckpt = train(boxes(), cfg);
  EXPECT_LT(ckpt.vocab.size(), closed_vocabulary_size(cfg.max_move_len));
  EXPECT_EQ(ckpt.model.vocab_size, ckpt.vocab.size());
}

TEST(Training, ThreadCountDoesNotChangeResults) {
  auto cfg = tiny_train();
  cfg.epochs = 1;
  const auto one = serialize_checkpoint(train(boxes(), cfg));
  cfg.jobs = 3;
  auto three = train(boxes(), cfg);
  three.train.jobs = 1;
  EXPECT_EQ(serialize_checkpoint(three), one);
}

TEST(Checkpoint, RejectsCorruptDocuments) {
  const auto text = serialize_checkpoint(train(boxes(), [] {
    auto c = tiny_train();
    c.epochs = 1;
    return c;
  }()));
  EXPECT_THROW(parse_checkpoint("not json"), FormatError);
  EXPECT_THROW(parse_checkpoint(R"({"format":"other"})"), FormatError);
  auto doc = nlohmann::json::parse(text);
  doc["version"] = 99;
  EXPECT_THROW(parse_checkpoint(doc.dump()), FormatError);
  doc = nlohmann::json::parse(text);
  for (const char* data : {"AAAA", "AA*A", "A=AA", "AAA", "AA=A"}) {
    doc["tensors"][0]["data"] = data;
    EXPECT_THROW(parse_checkpoint(doc.dump()), FormatError) << data;
  }
  doc = nlohmann::json::parse(text);
  doc["tensors"].erase(doc["tensors"].size() - 1);
  EXPECT_THROW(parse_checkpoint(doc.dump()), FormatError);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.json"), Error);
}

TEST(LossHistory, CsvAndRisingFlag) {
  const std::vector<EpochLoss> h{{1, 5.0, 4.0}, {2, 4.0, 3.5}};
  EXPECT_EQ(loss_history_csv(h).substr(0, 31), "epoch,train_loss,heldout_loss\n1");
  std::size_t lines = 0;
  for (char c : loss_history_csv(h)) lines += c == '\n';
  EXPECT_EQ(lines, 3u);
  EXPECT_FALSE(heldout_rising(h));
  std::vector<EpochLoss> rising;
  for (std::size_t e = 1; e <= 10; ++e) rising.push_back({e, 1.0, e < 5 ? 3.0 : 2.0 + 0.2 * e});
  EXPECT_TRUE(heldout_rising(rising));
  std::vector<EpochLoss> falling;
  for (std::size_t e = 1; e <= 10; ++e) falling.push_back({e, 1.0, 10.0 - e});
  EXPECT_FALSE(heldout_rising(falling));
  EXPECT_FALSE(heldout_rising(std::vector<EpochLoss>{{1, 1.0, 1.0}}));
}

TEST(TokenizePatches, EverySequenceEndsWithImageEnd) {
  const auto cfg = tiny_train();
  Rng rng(4);
  const auto patches = generate_patch_set(boxes(), 5, cfg.augment, rng);
  const std::vector<std::vector<Symbol>> corpora{image_to_move_sequence(boxes(), cfg.flatten_error, cfg.max_move_len)};
  const auto vocab = build_vocabulary(corpora, cfg.max_move_len);
  for (const auto& seq : tokenize_patches(patches, vocab, cfg.flatten_error, cfg.max_move_len)) {
    ASSERT_FALSE(seq.empty());
    EXPECT_EQ(seq.back(), vocab.image_end_id());
    EXPECT_EQ(std::count(seq.begin(), seq.end(), vocab.image_end_id()), 1);
  }
}
