#include "strokegen/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "strokegen/errors.hpp"

namespace strokegen {

namespace {

template <class T>
std::vector<double> top_k_impl(std::span<const T> logits, std::size_t k) {
  const std::size_t v = logits.size();
  if (k < 1 || k > v) {
    throw PreconditionError("top-k: k=" + std::to_string(k) + " must be in [1, " + std::to_string(v) + "]");
  }
  std::vector<std::size_t> ids(v);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    return logits[a] > logits[b] || (logits[a] == logits[b] && a < b);
  };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(), better);
  std::vector<double> probs(v, 0.0);
  const double top = static_cast<double>(logits[ids[0]]);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = std::exp(static_cast<double>(logits[ids[i]]) - top);
    probs[ids[i]] = e;
    total += e;
  }
  for (std::size_t i = 0; i < k; ++i) probs[ids[i]] /= total;
  return probs;
}

template <class T>
TokenId sample_impl(std::span<const T> logits, std::size_t k, Rng& rng) {
  const auto probs = top_k_impl(logits, k);
  const double u = uniform01(rng);
  double acc = 0.0;
  TokenId last_allowed = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0.0) continue;
    acc += probs[i];
    last_allowed = static_cast<TokenId>(i);
    if (u < acc) return last_allowed;
  }
  return last_allowed;
}

}  // namespace

std::vector<double> top_k_distribution(std::span<const float> logits, std::size_t k) { return top_k_impl(logits, k); }
std::vector<double> top_k_distribution(std::span<const double> logits, std::size_t k) { return top_k_impl(logits, k); }

TokenId top_k_sample(std::span<const float> logits, std::size_t k, Rng& rng) { return sample_impl(logits, k, rng); }
TokenId top_k_sample(std::span<const double> logits, std::size_t k, Rng& rng) { return sample_impl(logits, k, rng); }

TokenSequence make_init_vector(std::size_t init_len, const Vocabulary& vocab, Rng& rng) {
  if (init_len < 1) throw PreconditionError("init vector length must be >= 1");
  if (vocab.regular_count() == 0 && init_len > 1) throw PreconditionError("vocabulary has no regular moves");
  TokenSequence init;
  init.reserve(init_len);
  for (std::size_t i = 0; i + 1 < init_len; ++i) {
    init.push_back(static_cast<TokenId>(uniform_index(rng, vocab.regular_count())));
  }
  init.push_back(vocab.image_end_id());
  return init;
}

SamplerConfig resolved(const SamplerConfig& cfg, const ModelConfig& model) {
  SamplerConfig out = cfg;
  if (out.init_len == 0) out.init_len = std::max<std::size_t>(1, model.seq_len / 2);
  if (out.max_moves == 0) out.max_moves = 4 * model.seq_len;
  if (out.k < 1 || out.k > model.vocab_size) {
    throw PreconditionError("k=" + std::to_string(out.k) + " must be in [1, " + std::to_string(model.vocab_size) + "]");
  }
  if (out.init_len > model.seq_len) {
    throw PreconditionError("init_len " + std::to_string(out.init_len) + " exceeds seq_len " +
                            std::to_string(model.seq_len));
  }
  return out;
}

GeneratedImage generate_from(const Checkpoint& ckpt, const SamplerConfig& cfg_in, TokenSequence init,
                             const ContextObserver& observe) {
  const SamplerConfig cfg = resolved(cfg_in, ckpt.model);
  tensor::NoGradGuard no_grad;
  Rng rng(mix_seed(cfg.seed));
  GeneratedImage out;
  out.seed = cfg.seed;
  out.k = cfg.k;
  out.init_len = init.size();
  TokenSequence context = std::move(init);
  const TokenId end_id = ckpt.vocab.image_end_id();
  const std::size_t window = ckpt.model.seq_len;
  while (true) {
    if (out.moves.size() >= cfg.max_moves) {
      out.hit_cap = true;
      break;
    }
    const std::size_t n = std::min(window, context.size());
    const std::span<const TokenId> recent(context.data() + context.size() - n, n);
    if (observe) observe(recent);
    const auto logits = encoder_forward<float>(recent, ckpt.params, ckpt.model);
    const auto last_row = logits.value().row(n - 1);
    const TokenId next = top_k_sample(last_row, cfg.k, rng);
    if (next == end_id) break;
    out.moves.push_back(ckpt.vocab.symbol_of(next));
    context.push_back(next);
  }
  out.polylines = moves_to_image(out.moves);
  return out;
}

GeneratedImage generate_image(const Checkpoint& ckpt, const SamplerConfig& cfg_in, const ContextObserver& observe) {
  const SamplerConfig cfg = resolved(cfg_in, ckpt.model);
  // The init vector draws from its own stream so it is fixed by the seed alone.
  Rng init_rng(derive_seed(cfg.seed, 0x1417));
  auto init = make_init_vector(cfg.init_len, ckpt.vocab, init_rng);
  return generate_from(ckpt, cfg, std::move(init), observe);
}

std::vector<GeneratedImage> generate_images(const Checkpoint& ckpt, const SamplerConfig& cfg, std::size_t count,
                                            unsigned jobs) {
  std::vector<GeneratedImage> out(count);
  if (count == 0) return out;
  (void)resolved(cfg, ckpt.model);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SamplerConfig c = cfg;
      c.seed = derive_seed(cfg.seed, i);
      out[i] = generate_image(ckpt, c);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs == 1) {
    work(0, count);
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (count + jobs - 1) / jobs;
    for (std::size_t begin = 0; begin < count; begin += chunk) workers.emplace_back(work, begin, std::min(count, begin + chunk));
  }
  return out;
}

nlohmann::json sample_metadata(const GeneratedImage& image) {
  return {{"seed", image.seed},
          {"k", image.k},
          {"init_len", image.init_len},
          {"move_count", image.moves.size()},
          {"hit_cap", image.hit_cap}};
}

std::size_t distinct_count(std::span<const GeneratedImage> images) {
  std::set<std::vector<Symbol>> seen;
  for (const auto& img : images) seen.insert(img.moves);
  return seen.size();
}

}  // namespace strokegen
