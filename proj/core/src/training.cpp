#include "strokegen/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "base64.hpp"
#include "strokegen/errors.hpp"

namespace strokegen {

using tensor::Tensor;
using tensor::Var;

namespace {

// Child streams of TrainConfig::seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kHeldoutStream = 3;

std::string vocab_mode_name(VocabMode m) { return m == VocabMode::closed ? "closed" : "observed"; }

VocabMode vocab_mode_from(const std::string& s) {
  if (s == "closed") return VocabMode::closed;
  if (s == "observed") return VocabMode::observed;
  throw FormatError("unknown vocabulary mode '" + s + "'");
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1 || patches_per_epoch < 1 || batch_size < 1 || warmup_steps < 1 || heldout_patches < 1) {
    throw PreconditionError("train config: counts must be >= 1");
  }
  if (!(flatten_error > 0.0)) throw PreconditionError("train config: flatten_error must be > 0");
  if (max_move_len < 1) throw PreconditionError("train config: max_move_len must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_eps > 0.0)) {
    throw PreconditionError("train config: invalid Adam parameters");
  }
  if (vocab_mode == VocabMode::observed && fixed_patch_set == 0) {
    throw PreconditionError("train config: observed vocabulary needs a fixed patch set");
  }
  strokegen::validate(augment);
}

TrainConfig full_preset() { return TrainConfig{}; }

TrainConfig desk_preset() {
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.patches_per_epoch = 100;
  cfg.batch_size = 2;
  cfg.warmup_steps = 400;
  cfg.heldout_patches = 200;
  cfg.model.d_model = 32;
  cfg.model.n_layers = 2;
  cfg.model.n_heads = 4;
  cfg.model.d_ff = 128;
  return cfg;
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"patches_per_epoch", cfg.patches_per_epoch},
          {"batch_size", cfg.batch_size},
          {"warmup_steps", cfg.warmup_steps},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"adam_eps", cfg.adam_eps},
          {"seed", cfg.seed},
          {"flatten_error", cfg.flatten_error},
          {"max_move_len", cfg.max_move_len},
          {"heldout_patches", cfg.heldout_patches},
          {"heldout_seed", cfg.heldout_seed},
          {"fixed_patch_set", cfg.fixed_patch_set},
          {"seq_len_ceiling", cfg.seq_len_ceiling},
          {"vocab_mode", vocab_mode_name(cfg.vocab_mode)},
          {"jobs", cfg.jobs},
          {"augment",
           {{"reversal_probability", cfg.augment.reversal_probability},
            {"scale_min", cfg.augment.scale_min},
            {"rng_seed", cfg.augment.rng_seed}}},
          {"model", to_json(cfg.model)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.epochs = j.at("epochs").get<std::size_t>();
  cfg.patches_per_epoch = j.at("patches_per_epoch").get<std::size_t>();
  cfg.batch_size = j.at("batch_size").get<std::size_t>();
  cfg.warmup_steps = j.at("warmup_steps").get<std::size_t>();
  cfg.beta1 = j.at("beta1").get<double>();
  cfg.beta2 = j.at("beta2").get<double>();
  cfg.adam_eps = j.at("adam_eps").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.flatten_error = j.at("flatten_error").get<double>();
  cfg.max_move_len = j.at("max_move_len").get<int>();
  cfg.heldout_patches = j.at("heldout_patches").get<std::size_t>();
  cfg.heldout_seed = j.at("heldout_seed").get<std::uint64_t>();
  cfg.fixed_patch_set = j.at("fixed_patch_set").get<std::size_t>();
  cfg.seq_len_ceiling = j.at("seq_len_ceiling").get<std::size_t>();
  cfg.vocab_mode = vocab_mode_from(j.at("vocab_mode").get<std::string>());
  cfg.jobs = j.at("jobs").get<unsigned>();
  const auto& a = j.at("augment");
  cfg.augment.reversal_probability = a.at("reversal_probability").get<double>();
  cfg.augment.scale_min = a.at("scale_min").get<double>();
  cfg.augment.rng_seed = a.at("rng_seed").get<std::uint64_t>();
  cfg.model = model_config_from_json(j.at("model"));
  return cfg;
}

double lr_schedule(std::uint64_t step, std::size_t d_model, std::size_t warmup) {
  if (step < 1) throw PreconditionError("lr_schedule: step must be >= 1");
  if (d_model < 1 || warmup < 1) throw PreconditionError("lr_schedule: d_model and warmup must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  return std::pow(static_cast<double>(d_model), -0.5) * std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

template <std::floating_point T>
void adam_step(std::span<Var<T>> params, AdamState<T>& state, double lr, const AdamHyper& hyper) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.shape(), T{0});
      state.v.emplace_back(p.shape(), T{0});
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state does not match parameter count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& g = params[i].mutable_grad();
    if (state.m[i].shape() != params[i].shape()) throw ShapeError("adam_step: moment shape mismatch");
    if (!g.all_finite()) {
      throw NumericError(fmt::format("adam_step: non-finite gradient in parameter {} (step {})", i, state.step + 1));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  const T b1 = static_cast<T>(hyper.beta1), b2 = static_cast<T>(hyper.beta2);
  const T step_size = static_cast<T>(lr / correction1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(correction2));
  const T eps = static_cast<T>(hyper.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = params[i].mutable_value();
    const auto& g = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      m[k] = b1 * m[k] + (T{1} - b1) * g[k];
      v[k] = b2 * v[k] + (T{1} - b2) * g[k] * g[k];
      value[k] -= step_size * m[k] / (std::sqrt(v[k]) * inv_sqrt_c2 + eps);
    }
  }
}

template void adam_step<float>(std::span<Var<float>>, AdamState<float>&, double, const AdamHyper&);
template void adam_step<double>(std::span<Var<double>>, AdamState<double>&, double, const AdamHyper&);

std::vector<Window> stream_windows(std::span<const TokenSequence> patches, std::size_t seq_len) {
  if (seq_len < 1) throw PreconditionError("stream_windows: seq_len must be >= 1");
  TokenSequence stream;
  for (const auto& p : patches) stream.insert(stream.end(), p.begin(), p.end());
  const std::size_t span_len = seq_len + 1;
  if (stream.size() < span_len) {
    throw PreconditionError(fmt::format("token stream of {} tokens is shorter than one window of {}", stream.size(),
                                        span_len));
  }
  std::vector<Window> windows;
  windows.reserve(stream.size() / span_len);
  for (std::size_t start = 0; start + span_len <= stream.size(); start += span_len) {
    Window w;
    w.input.assign(stream.begin() + static_cast<std::ptrdiff_t>(start),
                   stream.begin() + static_cast<std::ptrdiff_t>(start + seq_len));
    w.target.assign(stream.begin() + static_cast<std::ptrdiff_t>(start + 1),
                    stream.begin() + static_cast<std::ptrdiff_t>(start + span_len));
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<Batch> build_stream_batches(std::span<const TokenSequence> patches, std::size_t seq_len,
                                        std::size_t batch_size, Rng& rng) {
  if (batch_size < 1) throw PreconditionError("build_stream_batches: batch_size must be >= 1");
  std::vector<std::size_t> order(patches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order.begin(), order.end(), rng);
  std::vector<TokenSequence> shuffled;
  shuffled.reserve(patches.size());
  for (auto i : order) shuffled.push_back(patches[i]);
  auto windows = stream_windows(shuffled, seq_len);
  shuffle(windows.begin(), windows.end(), rng);
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < windows.size(); i += batch_size) {
    const auto end = std::min(windows.size(), i + batch_size);
    batches.emplace_back(std::make_move_iterator(windows.begin() + static_cast<std::ptrdiff_t>(i)),
                         std::make_move_iterator(windows.begin() + static_cast<std::ptrdiff_t>(end)));
  }
  return batches;
}

std::vector<TokenSequence> tokenize_patches(std::span<const StrokeImage> patches, const Vocabulary& vocab,
                                            double flatten_error, int max_move_len) {
  std::vector<TokenSequence> out;
  out.reserve(patches.size());
  for (const auto& p : patches) out.push_back(encode(image_to_move_sequence(p, flatten_error, max_move_len), vocab));
  return out;
}

template <std::floating_point T>
double mean_stream_loss(const EncoderParams<T>& params, const ModelConfig& cfg,
                        std::span<const TokenSequence> sequences) {
  tensor::NoGradGuard no_grad;
  const auto windows = stream_windows(sequences, cfg.seq_len);
  double total = 0.0;
  for (const auto& w : windows) {
    const auto logits = encoder_forward<T>(w.input, params, cfg);
    total += static_cast<double>(tensor::cross_entropy(logits, std::span<const int>(w.target)).value()[0]);
  }
  return total / static_cast<double>(windows.size());
}

template double mean_stream_loss<float>(const EncoderParams<float>&, const ModelConfig&,
                                        std::span<const TokenSequence>);
template double mean_stream_loss<double>(const EncoderParams<double>&, const ModelConfig&,
                                         std::span<const TokenSequence>);

std::vector<StrokeImage> held_out_patch_set(const StrokeImage& image, const TrainConfig& cfg) {
  const std::uint64_t seed = cfg.heldout_seed != 0 ? cfg.heldout_seed : derive_seed(cfg.seed, kHeldoutStream);
  Rng rng(seed);
  return generate_patch_set(image, cfg.heldout_patches, cfg.augment, rng, cfg.jobs);
}

double evaluate_held_out(const Checkpoint& ckpt, std::span<const StrokeImage> patch_set) {
  const auto tokens = tokenize_patches(patch_set, ckpt.vocab, ckpt.train.flatten_error, ckpt.train.max_move_len);
  return mean_stream_loss(ckpt.params, ckpt.model, tokens);
}

bool heldout_rising(std::span<const EpochLoss> history) {
  if (history.size() < 2) return false;
  const std::size_t reference = std::min<std::size_t>(5, history.size()) - 1;
  return history.back().heldout_loss > history[reference].heldout_loss;
}

Checkpoint train(const StrokeImage& image, const TrainConfig& cfg_in, const EpochCallback& on_epoch) {
  validate_image(image);
  if (image.paths.empty()) throw PreconditionError("train: source image has no paths");
  TrainConfig cfg = cfg_in;
  cfg.validate();

  Rng rng(derive_seed(cfg.seed, kTrainStream));
  const auto source_moves = image_to_move_sequence(image, cfg.flatten_error, cfg.max_move_len);
  const auto heldout_images = held_out_patch_set(image, cfg);

  std::vector<StrokeImage> fixed_set;
  if (cfg.fixed_patch_set > 0) fixed_set = generate_patch_set(image, cfg.fixed_patch_set, cfg.augment, rng, cfg.jobs);

  std::vector<std::vector<Symbol>> corpora{source_moves};
  if (cfg.vocab_mode == VocabMode::observed) {
    for (const auto& p : fixed_set) corpora.push_back(image_to_move_sequence(p, cfg.flatten_error, cfg.max_move_len));
    for (const auto& p : heldout_images) {
      corpora.push_back(image_to_move_sequence(p, cfg.flatten_error, cfg.max_move_len));
    }
  }
  Checkpoint ckpt;
  ckpt.vocab = build_vocabulary(corpora, cfg.max_move_len, cfg.vocab_mode);

  if (cfg.model.seq_len == 0) {
    cfg.model.seq_len = sequence_length_for(image, cfg.flatten_error, cfg.max_move_len, cfg.seq_len_ceiling);
  }
  cfg.model.vocab_size = ckpt.vocab.size();
  cfg.model.validate();
  ckpt.model = cfg.model;
  ckpt.train = cfg;

  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  ckpt.params = EncoderParams<float>::initialize(cfg.model, init_rng);
  auto params = ckpt.params.parameters();

  const auto heldout = tokenize_patches(heldout_images, ckpt.vocab, cfg.flatten_error, cfg.max_move_len);
  std::vector<TokenSequence> fixed_tokens;
  if (!fixed_set.empty()) fixed_tokens = tokenize_patches(fixed_set, ckpt.vocab, cfg.flatten_error, cfg.max_move_len);

  AdamState<float> adam;
  const AdamHyper hyper{cfg.beta1, cfg.beta2, cfg.adam_eps};
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<TokenSequence> fresh;
    if (fixed_tokens.empty()) {
      const auto patches = generate_patch_set(image, cfg.patches_per_epoch, cfg.augment, rng, cfg.jobs);
      fresh = tokenize_patches(patches, ckpt.vocab, cfg.flatten_error, cfg.max_move_len);
    }
    const auto& corpus = fixed_tokens.empty() ? fresh : fixed_tokens;
    const auto batches = build_stream_batches(corpus, cfg.model.seq_len, cfg.batch_size, rng);

    double epoch_loss = 0.0;
    std::size_t window_count = 0;
    for (const auto& batch : batches) {
      for (auto& p : params) p.zero_grad();
      const float weight = 1.0f / static_cast<float>(batch.size());
      for (const auto& w : batch) {
        const auto logits = encoder_forward<float>(w.input, ckpt.params, cfg.model);
        const auto loss = tensor::cross_entropy(logits, std::span<const int>(w.target));
        const double value = loss.value()[0];
        if (!std::isfinite(value)) throw NumericError(fmt::format("non-finite training loss at epoch {}", epoch));
        epoch_loss += value;
        ++window_count;
        tensor::backward(loss, weight);
      }
      adam_step<float>(params, adam, lr_schedule(adam.step + 1, cfg.model.d_model, cfg.warmup_steps), hyper);
    }

    EpochLoss record;
    record.epoch = epoch;
    record.train_loss = epoch_loss / static_cast<double>(window_count);
    record.heldout_loss = mean_stream_loss(ckpt.params, ckpt.model, heldout);
    if (!std::isfinite(record.heldout_loss)) throw NumericError(fmt::format("non-finite held-out loss at epoch {}", epoch));
    ckpt.history.push_back(record);
    ckpt.epoch = epoch;
    if (on_epoch) on_epoch(record);
  }
  ckpt.rng_state = serialize_rng(rng);
  return ckpt;
}

std::string loss_history_csv(std::span<const EpochLoss> history) {
  std::string out = "epoch,train_loss,heldout_loss\n";
  for (const auto& e : history) out += fmt::format("{},{},{}\n", e.epoch, e.train_loss, e.heldout_loss);
  return out;
}

namespace {

nlohmann::json tensor_to_json(const std::string& name, const Tensor<float>& t) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(t.size() * 4);
  for (float v : t.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int shift = 0; shift < 32; shift += 8) bytes.push_back(static_cast<std::uint8_t>(bits >> shift));
  }
  return {{"name", name}, {"shape", t.shape()}, {"dtype", "f32le"}, {"data", detail::base64_encode(bytes)}};
}

Tensor<float> tensor_from_json(const nlohmann::json& j) {
  if (j.at("dtype").get<std::string>() != "f32le") throw FormatError("checkpoint: unsupported tensor dtype");
  const auto shape = j.at("shape").get<tensor::Shape>();
  const auto bytes = detail::base64_decode(j.at("data").get<std::string>());
  if (bytes.size() != tensor::element_count(shape) * 4) {
    throw FormatError("checkpoint: tensor '" + j.at("name").get<std::string>() + "' byte count does not match shape");
  }
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return Tensor<float>(shape, std::move(values));
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& e : ckpt.history) {
    history.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"heldout_loss", e.heldout_loss}});
  }
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, var] : ckpt.params.named_parameters()) tensors.push_back(tensor_to_json(name, var.value()));
  const nlohmann::json doc = {{"format", "strokegen-checkpoint"},
                              {"version", ckpt.version},
                              {"model", to_json(ckpt.model)},
                              {"train", to_json(ckpt.train)},
                              {"vocabulary", to_json(ckpt.vocab)},
                              {"epoch", ckpt.epoch},
                              {"loss_history", std::move(history)},
                              {"rng_state", ckpt.rng_state},
                              {"threads", ckpt.threads},
                              {"tensors", std::move(tensors)}};
  return doc.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != "strokegen-checkpoint") throw FormatError("not a strokegen checkpoint");
    Checkpoint ckpt;
    ckpt.version = doc.at("version").get<int>();
    if (ckpt.version != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + std::to_string(ckpt.version));
    }
    ckpt.model = model_config_from_json(doc.at("model"));
    ckpt.model.validate();
    ckpt.train = train_config_from_json(doc.at("train"));
    ckpt.vocab = vocabulary_from_json(doc.at("vocabulary"));
    if (ckpt.vocab.size() != ckpt.model.vocab_size) throw FormatError("checkpoint: vocabulary size mismatch");
    ckpt.epoch = doc.at("epoch").get<std::size_t>();
    for (const auto& e : doc.at("loss_history")) {
      ckpt.history.push_back(
          {e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(), e.at("heldout_loss").get<double>()});
    }
    ckpt.rng_state = doc.at("rng_state").get<std::string>();
    ckpt.threads = doc.at("threads").get<unsigned>();

    ckpt.params = EncoderParams<float>::zeros(ckpt.model);
    auto named = ckpt.params.named_parameters();
    const auto& tensors = doc.at("tensors");
    if (tensors.size() != named.size()) throw FormatError("checkpoint: wrong number of tensors");
    for (std::size_t i = 0; i < named.size(); ++i) {
      if (tensors[i].at("name").get<std::string>() != named[i].first) {
        throw FormatError("checkpoint: expected tensor '" + named[i].first + "'");
      }
      auto t = tensor_from_json(tensors[i]);
      if (t.shape() != named[i].second.shape()) throw FormatError("checkpoint: shape mismatch for " + named[i].first);
      named[i].second.mutable_value() = std::move(t);
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint JSON: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << serialize_checkpoint(ckpt);
  if (!out) throw Error("failed writing " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace strokegen
