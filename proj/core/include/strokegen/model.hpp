#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "strokegen/autograd.hpp"
#include "strokegen/rng.hpp"
#include "strokegen/tokenizer.hpp"

namespace strokegen {

struct ModelConfig {
  std::size_t d_model = 52;
  std::size_t n_layers = 6;
  std::size_t n_heads = 4;
  std::size_t d_ff = 2048;
  std::size_t seq_len = 0;     ///< L; 0 until derived from the source image
  std::size_t vocab_size = 0;  ///< V; 0 until the vocabulary is built
  /// Two masked self-attention sub-layers per layer (true) or one (false).
  bool two_attention_sublayers = true;
  double layer_norm_eps = 1e-5;

  std::size_t head_dim() const { return d_model / n_heads; }
  std::size_t attention_sublayers() const { return two_attention_sublayers ? 2 : 1; }

  /// Throws PreconditionError on inconsistent sizes.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

template <std::floating_point T>
struct AttentionParams {
  tensor::Var<T> wq, bq, wk, bk, wv, bv, wo, bo;
};

template <std::floating_point T>
struct LayerNormParams {
  tensor::Var<T> gain, bias;
};

template <std::floating_point T>
struct EncoderLayerParams {
  std::vector<AttentionParams<T>> attention;
  std::vector<LayerNormParams<T>> attention_norms;
  tensor::Var<T> w1, b1, w2, b2;
  LayerNormParams<T> ff_norm;
};

template <std::floating_point T>
struct EncoderParams {
  tensor::Var<T> embedding;  ///< [V, d_model]
  std::vector<EncoderLayerParams<T>> layers;
  tensor::Var<T> w_out;  ///< [d_model, V]
  tensor::Var<T> b_out;  ///< [1, V]

  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases 0; norm gains 1.
  static EncoderParams initialize(const ModelConfig& cfg, Rng& rng);

  /// Zero-valued parameters with the right names and shapes.
  static EncoderParams zeros(const ModelConfig& cfg);

  /// Stable names ("layers.0.attn.1.wq", ...) in a fixed order.
  std::vector<std::pair<std::string, tensor::Var<T>>> named_parameters() const;
  std::vector<tensor::Var<T>> parameters() const;

  /// Deep copy converted to another precision.
  template <std::floating_point U>
  EncoderParams<U> cast(const ModelConfig& cfg) const;
};

/// Sinusoid table: even dims sin(pos / 10000^(2i/d)), odd dims cos of the same.
template <std::floating_point T>
tensor::Tensor<T> positional_encoding(std::size_t length, std::size_t d_model);

/// Lower-triangular mask: row i keeps columns 0..i.
tensor::Mask causal_mask(std::size_t length);

/// softmax(Q K^T / sqrt(head_dim) + mask) V per head, heads concatenated and
/// projected by wo. No residual and no normalization.
template <std::floating_point T>
tensor::Var<T> multi_head_attention(const tensor::Var<T>& x, const AttentionParams<T>& params, std::size_t n_heads,
                                    const tensor::Mask& mask);

/// Logits [n, V] for tokens of length n <= seq_len. Row i predicts token i+1.
template <std::floating_point T>
tensor::Var<T> encoder_forward(std::span<const TokenId> tokens, const EncoderParams<T>& params,
                               const ModelConfig& cfg);

extern template struct EncoderParams<float>;
extern template struct EncoderParams<double>;

}  // namespace strokegen
