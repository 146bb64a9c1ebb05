#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "strokegen/augment.hpp"
#include "strokegen/model.hpp"
#include "strokegen/tokenizer.hpp"

namespace strokegen {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t patches_per_epoch = 500;
  std::size_t batch_size = 200;
  std::size_t warmup_steps = 4000;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-9;
  std::uint64_t seed = 0;
  double flatten_error = 1.0;
  int max_move_len = kDefaultMaxMoveLength;

  std::size_t heldout_patches = 500;
  /// Seed of the held-out set; 0 derives one from `seed` on a separate stream.
  std::uint64_t heldout_seed = 0;
  /// > 0 trains every epoch on one patch set of this size (overfitting study).
  std::size_t fixed_patch_set = 0;
  std::size_t seq_len_ceiling = 512;
  VocabMode vocab_mode = VocabMode::closed;
  unsigned jobs = 1;

  AugmentConfig augment;
  /// seq_len / vocab_size of 0 are filled in from the image and vocabulary.
  ModelConfig model;

  void validate() const;
};

/// 200 epochs x 500 patches, d_model 52, 6 layers, 4 heads, d_ff 2048.
TrainConfig full_preset();
/// Reduced setup that finishes in minutes on one CPU core.
TrainConfig desk_preset();

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// d_model^-0.5 * min(step^-0.5, step * warmup^-1.5); step >= 1.
double lr_schedule(std::uint64_t step, std::size_t d_model, std::size_t warmup);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

template <std::floating_point T>
struct AdamState {
  std::vector<tensor::Tensor<T>> m;
  std::vector<tensor::Tensor<T>> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update using the gradients stored on `params`.
/// Throws NumericError if any gradient is NaN/Inf.
template <std::floating_point T>
void adam_step(std::span<tensor::Var<T>> params, AdamState<T>& state, double lr, const AdamHyper& hyper);

struct Window {
  TokenSequence input;
  TokenSequence target;
};
using Batch = std::vector<Window>;

/// Consecutive non-overlapping (L+1)-windows of the patches concatenated in
/// the given order. The trailing partial window is dropped.
std::vector<Window> stream_windows(std::span<const TokenSequence> patches, std::size_t seq_len);

/// Shuffles patch order, cuts stream windows, shuffles windows, groups them
/// into batches of `batch_size` (the last batch may be smaller).
std::vector<Batch> build_stream_batches(std::span<const TokenSequence> patches, std::size_t seq_len,
                                        std::size_t batch_size, Rng& rng);

struct EpochLoss {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double heldout_loss = 0.0;

  friend bool operator==(const EpochLoss&, const EpochLoss&) = default;
};

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int version = kCheckpointVersion;
  ModelConfig model;
  TrainConfig train;
  Vocabulary vocab;
  EncoderParams<float> params;
  std::size_t epoch = 0;
  std::string rng_state;
  std::vector<EpochLoss> history;
  unsigned threads = 1;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

/// "epoch,train_loss,heldout_loss" rows.
std::string loss_history_csv(std::span<const EpochLoss> history);

using EpochCallback = std::function<void(const EpochLoss&)>;

/// Regenerates (or reuses, with fixed_patch_set) a patch set each epoch,
/// makes one Adam pass over its stream windows, then scores the held-out set.
Checkpoint train(const StrokeImage& image, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// The held-out patch set `train` scores against.
std::vector<StrokeImage> held_out_patch_set(const StrokeImage& image, const TrainConfig& cfg);

/// Encodes each patch into one token sequence ending in IMAGE_END.
std::vector<TokenSequence> tokenize_patches(std::span<const StrokeImage> patches, const Vocabulary& vocab,
                                            double flatten_error, int max_move_len);

/// Mean per-token cross-entropy over the stream windows of `sequences`.
template <std::floating_point T>
double mean_stream_loss(const EncoderParams<T>& params, const ModelConfig& cfg,
                        std::span<const TokenSequence> sequences);

/// Mean per-token cross-entropy of the checkpoint on `patch_set`.
double evaluate_held_out(const Checkpoint& ckpt, std::span<const StrokeImage> patch_set);

/// True when the held-out loss at the last epoch exceeds the one at epoch 5
/// (or the first epoch for shorter runs).
bool heldout_rising(std::span<const EpochLoss> history);

}  // namespace strokegen
