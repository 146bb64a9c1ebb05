#include "strokegen/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "strokegen/errors.hpp"

namespace strokegen {

using tensor::Mask;
using tensor::Tensor;
using tensor::Var;

void ModelConfig::validate() const {
  if (d_model == 0 || n_heads == 0 || n_layers == 0 || d_ff == 0) {
    throw PreconditionError("model config: sizes must be >= 1");
  }
  if (d_model % n_heads != 0) {
    throw PreconditionError("model config: d_model " + std::to_string(d_model) + " not divisible by n_heads " +
                            std::to_string(n_heads));
  }
  if (seq_len < 2) throw PreconditionError("model config: seq_len must be >= 2");
  if (vocab_size < 2) throw PreconditionError("model config: vocab_size must be >= 2");
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return {{"d_model", cfg.d_model},
          {"n_layers", cfg.n_layers},
          {"n_heads", cfg.n_heads},
          {"d_ff", cfg.d_ff},
          {"seq_len", cfg.seq_len},
          {"vocab_size", cfg.vocab_size},
          {"two_attention_sublayers", cfg.two_attention_sublayers},
          {"layer_norm_eps", cfg.layer_norm_eps}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.d_model = j.at("d_model").get<std::size_t>();
  cfg.n_layers = j.at("n_layers").get<std::size_t>();
  cfg.n_heads = j.at("n_heads").get<std::size_t>();
  cfg.d_ff = j.at("d_ff").get<std::size_t>();
  cfg.seq_len = j.at("seq_len").get<std::size_t>();
  cfg.vocab_size = j.at("vocab_size").get<std::size_t>();
  cfg.two_attention_sublayers = j.at("two_attention_sublayers").get<bool>();
  cfg.layer_norm_eps = j.at("layer_norm_eps").get<double>();
  return cfg;
}

namespace {

template <class T>
Var<T> uniform_param(Rng& rng, std::size_t rows, std::size_t cols, double bound) {
  Tensor<T> t({rows, cols});
  for (auto& v : t.data()) v = static_cast<T>(uniform(rng, -bound, bound));
  return Var<T>::parameter(std::move(t));
}

template <class T>
Var<T> filled_param(std::size_t rows, std::size_t cols, T value) {
  return Var<T>::parameter(Tensor<T>({rows, cols}, value));
}

template <class T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  return tensor::add_row(tensor::matmul(x, w), b);
}

template <class T, class Visit>
void visit_parameters(const EncoderParams<T>& p, Visit&& visit) {
  visit("embedding", p.embedding);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    const std::string prefix = "layers." + std::to_string(l) + ".";
    for (std::size_t a = 0; a < layer.attention.size(); ++a) {
      const std::string ap = prefix + "attn." + std::to_string(a) + ".";
      const auto& at = layer.attention[a];
      visit(ap + "wq", at.wq);
      visit(ap + "bq", at.bq);
      visit(ap + "wk", at.wk);
      visit(ap + "bk", at.bk);
      visit(ap + "wv", at.wv);
      visit(ap + "bv", at.bv);
      visit(ap + "wo", at.wo);
      visit(ap + "bo", at.bo);
      visit(ap + "norm.gain", layer.attention_norms[a].gain);
      visit(ap + "norm.bias", layer.attention_norms[a].bias);
    }
    visit(prefix + "ff.w1", layer.w1);
    visit(prefix + "ff.b1", layer.b1);
    visit(prefix + "ff.w2", layer.w2);
    visit(prefix + "ff.b2", layer.b2);
    visit(prefix + "ff.norm.gain", layer.ff_norm.gain);
    visit(prefix + "ff.norm.bias", layer.ff_norm.bias);
  }
  visit("out.w", p.w_out);
  visit("out.b", p.b_out);
}

// Builds the parameter tree with `make(rows, cols, kind)` supplying each tensor.
enum class ParamKind { weight, bias, gain };

template <class T, class Make>
EncoderParams<T> build_params(const ModelConfig& cfg, Make&& make) {
  const std::size_t d = cfg.d_model, v = cfg.vocab_size, ff = cfg.d_ff;
  EncoderParams<T> p;
  p.embedding = make(v, d, ParamKind::weight, d);
  p.layers.resize(cfg.n_layers);
  for (auto& layer : p.layers) {
    for (std::size_t a = 0; a < cfg.attention_sublayers(); ++a) {
      AttentionParams<T> at;
      at.wq = make(d, d, ParamKind::weight, d);
      at.bq = make(1, d, ParamKind::bias, d);
      at.wk = make(d, d, ParamKind::weight, d);
      at.bk = make(1, d, ParamKind::bias, d);
      at.wv = make(d, d, ParamKind::weight, d);
      at.bv = make(1, d, ParamKind::bias, d);
      at.wo = make(d, d, ParamKind::weight, d);
      at.bo = make(1, d, ParamKind::bias, d);
      layer.attention.push_back(std::move(at));
      layer.attention_norms.push_back({make(1, d, ParamKind::gain, d), make(1, d, ParamKind::bias, d)});
    }
    layer.w1 = make(d, ff, ParamKind::weight, d);
    layer.b1 = make(1, ff, ParamKind::bias, d);
    layer.w2 = make(ff, d, ParamKind::weight, ff);
    layer.b2 = make(1, d, ParamKind::bias, ff);
    layer.ff_norm = {make(1, d, ParamKind::gain, d), make(1, d, ParamKind::bias, d)};
  }
  p.w_out = make(d, v, ParamKind::weight, d);
  p.b_out = make(1, v, ParamKind::bias, d);
  return p;
}

}  // namespace

template <std::floating_point T>
EncoderParams<T> EncoderParams<T>::initialize(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  return build_params<T>(cfg, [&](std::size_t r, std::size_t c, ParamKind kind, std::size_t fan_in) {
    switch (kind) {
      case ParamKind::weight:
        return uniform_param<T>(rng, r, c, 1.0 / std::sqrt(static_cast<double>(fan_in)));
      case ParamKind::gain:
        return filled_param<T>(r, c, T{1});
      case ParamKind::bias:
        break;
    }
    return filled_param<T>(r, c, T{0});
  });
}

template <std::floating_point T>
EncoderParams<T> EncoderParams<T>::zeros(const ModelConfig& cfg) {
  cfg.validate();
  return build_params<T>(cfg, [](std::size_t r, std::size_t c, ParamKind, std::size_t) {
    return filled_param<T>(r, c, T{0});
  });
}

template <std::floating_point T>
std::vector<std::pair<std::string, Var<T>>> EncoderParams<T>::named_parameters() const {
  std::vector<std::pair<std::string, Var<T>>> out;
  visit_parameters(*this, [&](std::string name, const Var<T>& v) { out.emplace_back(std::move(name), v); });
  return out;
}

template <std::floating_point T>
std::vector<Var<T>> EncoderParams<T>::parameters() const {
  std::vector<Var<T>> out;
  visit_parameters(*this, [&](const std::string&, const Var<T>& v) { out.push_back(v); });
  return out;
}

template <std::floating_point T>
template <std::floating_point U>
EncoderParams<U> EncoderParams<T>::cast(const ModelConfig& cfg) const {
  auto out = EncoderParams<U>::zeros(cfg);
  const auto src = named_parameters();
  auto dst = out.named_parameters();
  if (src.size() != dst.size()) throw ShapeError("cast: parameter layout mismatch");
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i].second.mutable_value() = src[i].second.value().template cast<U>();
  }
  return out;
}

template <std::floating_point T>
Tensor<T> positional_encoding(std::size_t length, std::size_t d_model) {
  if (length == 0) throw PreconditionError("positional_encoding: length must be >= 1");
  Tensor<T> pe({length, d_model});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < d_model; ++i) {
      const double exponent = static_cast<double>(i - i % 2) / static_cast<double>(d_model);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      pe(pos, i) = static_cast<T>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

Mask causal_mask(std::size_t length) {
  if (length == 0) throw PreconditionError("causal_mask: length must be >= 1");
  Mask m{length, length, std::vector<unsigned char>(length * length, 0)};
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m.allowed[i * length + j] = 1;
  }
  return m;
}

template <std::floating_point T>
Var<T> multi_head_attention(const Var<T>& x, const AttentionParams<T>& params, std::size_t n_heads,
                            const Mask& mask) {
  const std::size_t d = x.value().cols();
  if (n_heads == 0 || d % n_heads != 0) throw PreconditionError("multi_head_attention: bad head count");
  const std::size_t hd = d / n_heads;
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  const Var<T> q = linear(x, params.wq, params.bq);
  const Var<T> k = linear(x, params.wk, params.bk);
  const Var<T> v = linear(x, params.wv, params.bv);
  std::vector<Var<T>> heads;
  heads.reserve(n_heads);
  for (std::size_t h = 0; h < n_heads; ++h) {
    const auto qh = tensor::slice_cols(q, h * hd, hd);
    const auto kh = tensor::slice_cols(k, h * hd, hd);
    const auto vh = tensor::slice_cols(v, h * hd, hd);
    const auto weights = tensor::masked_softmax(tensor::scale(tensor::matmul_nt(qh, kh), inv_sqrt), mask);
    heads.push_back(tensor::matmul(weights, vh));
  }
  return linear(tensor::concat_cols<T>(heads), params.wo, params.bo);
}

template <std::floating_point T>
Var<T> encoder_forward(std::span<const TokenId> tokens, const EncoderParams<T>& params, const ModelConfig& cfg) {
  if (tokens.empty()) throw PreconditionError("encoder_forward: empty token sequence");
  if (tokens.size() > cfg.seq_len) {
    throw PreconditionError("encoder_forward: " + std::to_string(tokens.size()) + " tokens exceed seq_len " +
                            std::to_string(cfg.seq_len));
  }
  for (TokenId id : tokens) {
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw LookupError("encoder_forward: token id " + std::to_string(id) + " out of range");
    }
  }
  const std::size_t n = tokens.size();
  const T eps = static_cast<T>(cfg.layer_norm_eps);
  const Mask mask = causal_mask(n);
  const auto pe = Var<T>::constant(positional_encoding<T>(n, cfg.d_model));
  Var<T> x = tensor::embedding(params.embedding, tokens);
  x = tensor::add(tensor::scale(x, static_cast<T>(std::sqrt(static_cast<double>(cfg.d_model)))), pe);
  for (const auto& layer : params.layers) {
    for (std::size_t a = 0; a < layer.attention.size(); ++a) {
      const auto attended = multi_head_attention(x, layer.attention[a], cfg.n_heads, mask);
      x = tensor::layer_norm(tensor::add(x, attended), layer.attention_norms[a].gain, layer.attention_norms[a].bias,
                             eps);
    }
    const auto hidden = tensor::relu(linear(x, layer.w1, layer.b1));
    const auto ff = linear(hidden, layer.w2, layer.b2);
    x = tensor::layer_norm(tensor::add(x, ff), layer.ff_norm.gain, layer.ff_norm.bias, eps);
  }
  return linear(x, params.w_out, params.b_out);
}

template struct EncoderParams<float>;
template struct EncoderParams<double>;
template EncoderParams<double> EncoderParams<float>::cast<double>(const ModelConfig&) const;
template EncoderParams<float> EncoderParams<double>::cast<float>(const ModelConfig&) const;
template EncoderParams<float> EncoderParams<float>::cast<float>(const ModelConfig&) const;
template EncoderParams<double> EncoderParams<double>::cast<double>(const ModelConfig&) const;
template Tensor<float> positional_encoding<float>(std::size_t, std::size_t);
template Tensor<double> positional_encoding<double>(std::size_t, std::size_t);
template Var<float> multi_head_attention<float>(const Var<float>&, const AttentionParams<float>&, std::size_t,
                                               const Mask&);
template Var<double> multi_head_attention<double>(const Var<double>&, const AttentionParams<double>&, std::size_t,
                                                 const Mask&);
template Var<float> encoder_forward<float>(std::span<const TokenId>, const EncoderParams<float>&,
                                           const ModelConfig&);
template Var<double> encoder_forward<double>(std::span<const TokenId>, const EncoderParams<double>&,
                                             const ModelConfig&);

}  // namespace strokegen
