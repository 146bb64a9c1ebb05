#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "strokegen/training.hpp"

namespace strokegen {

struct SamplerConfig {
  std::size_t k = 10;
  std::size_t init_len = 0;   ///< 0 means seq_len / 2 (at least 1)
  std::size_t max_moves = 0;  ///< 0 means 4 * seq_len
  std::uint64_t seed = 0;
};

/// Renormalized probabilities over the k largest logits; all other entries are
/// exactly 0. Ties at the k-th logit go to the lower id.
std::vector<double> top_k_distribution(std::span<const float> logits, std::size_t k);
std::vector<double> top_k_distribution(std::span<const double> logits, std::size_t k);

/// Draws one id from top_k_distribution. Throws PreconditionError unless 1 <= k <= V.
TokenId top_k_sample(std::span<const float> logits, std::size_t k, Rng& rng);
TokenId top_k_sample(std::span<const double> logits, std::size_t k, Rng& rng);

/// init_len - 1 uniformly random regular-move ids followed by IMAGE_END.
TokenSequence make_init_vector(std::size_t init_len, const Vocabulary& vocab, Rng& rng);

struct GeneratedImage {
  std::vector<Symbol> moves;  ///< generated moves, without the init vector or the final IMAGE_END
  std::vector<Polyline> polylines;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::size_t init_len = 0;
  bool hit_cap = false;
};

/// Sees the context fed to the encoder before each sampled token.
using ContextObserver = std::function<void(std::span<const TokenId> context)>;

/// Autoregressive top-k decoding from a random init vector, conditioning on
/// the most recent seq_len tokens. Stops at IMAGE_END or after max_moves.
GeneratedImage generate_image(const Checkpoint& ckpt, const SamplerConfig& cfg,
                              const ContextObserver& observe = {});

/// Same as generate_image with an explicit init vector.
GeneratedImage generate_from(const Checkpoint& ckpt, const SamplerConfig& cfg, TokenSequence init,
                             const ContextObserver& observe = {});

/// `count` images; image i uses seed derive_seed(cfg.seed, i), so the result
/// does not depend on `jobs`.
std::vector<GeneratedImage> generate_images(const Checkpoint& ckpt, const SamplerConfig& cfg, std::size_t count,
                                            unsigned jobs = 1);

SamplerConfig resolved(const SamplerConfig& cfg, const ModelConfig& model);

/// {seed, k, init_len, move_count, hit_cap}
nlohmann::json sample_metadata(const GeneratedImage& image);

/// Number of distinct move sequences among `images`.
std::size_t distinct_count(std::span<const GeneratedImage> images);

}  // namespace strokegen
