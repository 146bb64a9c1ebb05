#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "strokegen/augment.hpp"
#include "strokegen/errors.hpp"
#include "strokegen/io.hpp"
#include "strokegen/sampling.hpp"
#include "strokegen/svg.hpp"
#include "strokegen/training.hpp"

namespace strokegen::cli {

namespace fs = std::filesystem;

namespace {

// Turns "key = value" lines into "--key value" arguments for `command`.
// Underscores in keys map to dashes, so keys can mirror config field names.
std::vector<std::string> config_args(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open config file " + file.string());
  std::vector<std::string> out;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) throw FormatError("config file " + file.string() + ": sections are not supported");
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    if (item.inputs.size() == 1) {
      // "--key=value" also works for flags, so booleans need no special case.
      out.push_back("--" + key + "=" + item.inputs[0]);
      continue;
    }
    out.push_back("--" + key);
    for (const auto& v : item.inputs) out.push_back(v);
  }
  return out;
}

// Splices the contents of "--config FILE" in place, so flags after it win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file name");
      file = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      out.push_back(args[i]);
      continue;
    }
    const auto extra = config_args(file);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

StrokeImage load_path_image(const fs::path& file) { return image_from_json(read_json_file(file)); }

std::size_t parse_init_len(const std::string& text, std::size_t seq_len) {
  if (text == "half") return std::max<std::size_t>(1, seq_len / 2);
  if (text == "full") return seq_len;
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || v < 1) throw PreconditionError("--init-len must be a positive integer, 'half' or 'full'");
  return static_cast<std::size_t>(v);
}

fs::path sidecar_for(const fs::path& svg) {
  fs::path p = svg;
  p.replace_extension(".json");
  if (p == svg) p += ".meta.json";
  return p;
}

struct IngestArgs {
  std::string input;
  std::string output = "pathimage.json";
  double fit_error = 1.0;
};

void cmd_ingest(const IngestArgs& a, std::ostream& out) {
  if (!(a.fit_error > 0.0)) throw PreconditionError("--fit-error must be > 0");
  const auto result = ingest(recording_from_json(read_json_file(a.input)), a.fit_error);
  write_text_file(a.output, to_json(result.image).dump(1) + "\n");
  for (std::size_t i = 0; i < result.image.paths.size(); ++i) {
    out << fmt::format("path {}: {} curves\n", i, result.image.paths[i].curves.size());
  }
  if (result.skipped_strokes > 0) out << fmt::format("skipped {} degenerate strokes\n", result.skipped_strokes);
  if (result.fit_scale < 1.0) out << fmt::format("scaled by {:.6f} to fit the canvas\n", result.fit_scale);
  out << fmt::format("wrote {}\n", a.output);
}

struct PreviewArgs {
  std::string input;
  std::string output = "augment_preview.svg";
  std::size_t n = 5;
  std::uint64_t seed = 0;
  std::size_t columns = 6;
  unsigned jobs = 1;
  bool colors = false;
  AugmentConfig augment;
};

void cmd_augment_preview(const PreviewArgs& a, std::ostream& out) {
  const auto image = load_path_image(a.input);
  std::vector<StrokeImage> cells{image};
  if (a.n > 0) {
    Rng rng(a.seed);
    auto patches = generate_patch_set(image, a.n, a.augment, rng, a.jobs);
    cells.insert(cells.end(), patches.begin(), patches.end());
  }
  GridLayout layout;
  layout.columns = a.columns;
  layout.cell_size = image.boundary;
  layout.random_colors = a.colors;
  layout.color_seed = a.seed;
  write_text_file(a.output, render_path_images(cells, layout));
  out << fmt::format("wrote {} cells to {}\n", cells.size(), a.output);
}

struct TrainArgs {
  std::string input;
  std::string out_dir = "run";
  std::string preset = "desk";
  std::optional<std::size_t> epochs, patches_per_epoch, batch_size, warmup_steps, heldout_patches, fixed_patch_set;
  std::optional<std::uint64_t> seed, heldout_seed;
  std::optional<double> flatten_error, reversal_probability, scale_min;
  std::optional<int> max_move_len;
  std::optional<std::size_t> d_model, n_layers, n_heads, d_ff, seq_len, seq_len_ceiling;
  std::optional<std::string> vocab_mode;
  std::optional<bool> single_attention;
  unsigned jobs = 1;
  bool quiet = false;
};

TrainConfig build_train_config(const TrainArgs& a) {
  TrainConfig cfg;
  if (a.preset == "desk") {
    cfg = desk_preset();
  } else if (a.preset == "full") {
    cfg = full_preset();
  } else {
    throw PreconditionError("--preset must be 'desk' or 'full'");
  }
  auto set = [](auto& field, const auto& opt) {
    if (opt) field = *opt;
  };
  set(cfg.epochs, a.epochs);
  set(cfg.patches_per_epoch, a.patches_per_epoch);
  set(cfg.batch_size, a.batch_size);
  set(cfg.warmup_steps, a.warmup_steps);
  set(cfg.heldout_patches, a.heldout_patches);
  set(cfg.fixed_patch_set, a.fixed_patch_set);
  set(cfg.seed, a.seed);
  set(cfg.heldout_seed, a.heldout_seed);
  set(cfg.flatten_error, a.flatten_error);
  set(cfg.max_move_len, a.max_move_len);
  set(cfg.seq_len_ceiling, a.seq_len_ceiling);
  set(cfg.augment.reversal_probability, a.reversal_probability);
  set(cfg.augment.scale_min, a.scale_min);
  set(cfg.model.d_model, a.d_model);
  set(cfg.model.n_layers, a.n_layers);
  set(cfg.model.n_heads, a.n_heads);
  set(cfg.model.d_ff, a.d_ff);
  set(cfg.model.seq_len, a.seq_len);
  if (a.single_attention) cfg.model.two_attention_sublayers = !*a.single_attention;
  if (a.vocab_mode) {
    if (*a.vocab_mode == "closed") {
      cfg.vocab_mode = VocabMode::closed;
    } else if (*a.vocab_mode == "observed") {
      cfg.vocab_mode = VocabMode::observed;
    } else {
      throw PreconditionError("--vocab-mode must be 'closed' or 'observed'");
    }
  }
  cfg.jobs = std::max(1u, a.jobs);
  cfg.augment.rng_seed = cfg.seed;
  return cfg;
}

void cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto image = load_path_image(a.input);
  const auto cfg = build_train_config(a);
  const auto ckpt = train(image, cfg, [&](const EpochLoss& e) {
    if (!a.quiet) out << fmt::format("epoch {:>4}  train {:.6f}  heldout {:.6f}\n", e.epoch, e.train_loss, e.heldout_loss);
    out.flush();
  });
  const fs::path dir = a.out_dir;
  save_checkpoint(ckpt, dir / "checkpoint.json");
  write_text_file(dir / "loss.csv", loss_history_csv(ckpt.history));
  write_text_file(dir / "loss.svg", render_loss_plot(ckpt.history));

  const bool rising = heldout_rising(ckpt.history);
  const std::size_t ref = std::min<std::size_t>(5, ckpt.history.size()) - 1;
  const nlohmann::json summary = {{"epochs", ckpt.history.size()},
                                  {"fixed_patch_set", cfg.fixed_patch_set},
                                  {"seq_len", ckpt.model.seq_len},
                                  {"vocab_size", ckpt.model.vocab_size},
                                  {"final_train_loss", ckpt.history.back().train_loss},
                                  {"final_heldout_loss", ckpt.history.back().heldout_loss},
                                  {"reference_epoch", ckpt.history[ref].epoch},
                                  {"reference_heldout_loss", ckpt.history[ref].heldout_loss},
                                  {"heldout_rising", rising}};
  write_text_file(dir / "summary.json", summary.dump(1) + "\n");
  out << fmt::format("seq_len {}  vocab {}  final heldout {:.6f}\n", ckpt.model.seq_len, ckpt.model.vocab_size,
                     ckpt.history.back().heldout_loss);
  out << fmt::format("heldout curve: {}\n", rising ? "rising" : "falling");
  out << fmt::format("wrote {}\n", (dir / "checkpoint.json").string());
}

struct EvaluateArgs {
  std::string checkpoint;
  std::string image;
  std::string patch_set;
  std::optional<std::size_t> heldout_patches;
  std::optional<std::uint64_t> heldout_seed;
};

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto ckpt = load_checkpoint(a.checkpoint);
  std::vector<StrokeImage> patches;
  if (!a.patch_set.empty()) {
    patches = patch_set_from_json(read_json_file(a.patch_set));
  } else if (!a.image.empty()) {
    TrainConfig cfg = ckpt.train;
    if (a.heldout_patches) cfg.heldout_patches = *a.heldout_patches;
    if (a.heldout_seed) cfg.heldout_seed = *a.heldout_seed;
    patches = held_out_patch_set(load_path_image(a.image), cfg);
  } else {
    throw PreconditionError("evaluate needs --image or --patch-set");
  }
  out << fmt::format("heldout_loss {:.17g}\n", evaluate_held_out(ckpt, patches));
}

struct SampleArgs {
  std::string checkpoint;
  std::string output = "samples.svg";
  std::size_t k = 10;
  std::string init_len = "half";
  std::size_t count = 8;
  std::size_t max_moves = 0;
  std::uint64_t seed = 0;
  std::size_t columns = 4;
  unsigned jobs = 1;
  bool colors = false;
};

void cmd_sample(const SampleArgs& a, std::ostream& out) {
  const auto ckpt = load_checkpoint(a.checkpoint);
  SamplerConfig cfg;
  cfg.k = a.k;
  cfg.init_len = parse_init_len(a.init_len, ckpt.model.seq_len);
  cfg.max_moves = a.max_moves;
  cfg.seed = a.seed;
  cfg = resolved(cfg, ckpt.model);

  const auto images = generate_images(ckpt, cfg, a.count, std::max(1u, a.jobs));
  std::vector<std::vector<Polyline>> drawings;
  nlohmann::json meta = nlohmann::json::array();
  for (const auto& g : images) {
    drawings.push_back(g.polylines);
    meta.push_back(sample_metadata(g));
  }
  GridLayout layout;
  layout.columns = a.columns;
  layout.random_colors = a.colors;
  layout.color_seed = a.seed;
  const fs::path svg = a.output;
  write_text_file(svg, render_svg(drawings, layout));
  const nlohmann::json sidecar = {{"samples", std::move(meta)}, {"distinct", distinct_count(images)}};
  write_text_file(sidecar_for(svg), sidecar.dump(1) + "\n");
  out << fmt::format("{} images, {} distinct, k={} init_len={}\n", images.size(), distinct_count(images), cfg.k,
                     cfg.init_len);
  out << fmt::format("wrote {} and {}\n", svg.string(), sidecar_for(svg).string());
}

struct RenderArgs {
  std::string input;
  std::string output = "render.svg";
  std::size_t columns = 4;
  double flatten_error = 0.0;
  bool colors = false;
  std::uint64_t seed = 0;
};

void cmd_render(const RenderArgs& a, std::ostream& out) {
  const auto doc = read_json_file(a.input);
  GridLayout layout;
  layout.columns = a.columns;
  layout.random_colors = a.colors;
  layout.color_seed = a.seed;
  std::string svg;
  std::size_t cells = 0;
  if (doc.is_object() && doc.contains("strokes")) {
    const auto rec = recording_from_json(doc);
    std::vector<Polyline> lines;
    for (const auto& s : rec.strokes) lines.push_back(Polyline{s});
    const std::vector<std::vector<Polyline>> images{lines};
    layout.cell_size = rec.boundary;
    svg = render_svg(images, layout);
    cells = 1;
  } else {
    const auto images = doc.is_object() && doc.contains("patches") ? patch_set_from_json(doc)
                                                                   : std::vector<StrokeImage>{image_from_json(doc)};
    if (!images.empty()) layout.cell_size = images.front().boundary;
    if (a.flatten_error > 0.0) {
      std::vector<std::vector<Polyline>> flat;
      for (const auto& img : images) {
        std::vector<Polyline> lines;
        for (const auto& p : img.paths) lines.push_back(flatten_path(p, a.flatten_error));
        flat.push_back(std::move(lines));
      }
      svg = render_svg(flat, layout);
    } else {
      svg = render_path_images(images, layout);
    }
    cells = images.size();
  }
  write_text_file(a.output, svg);
  out << fmt::format("wrote {} cells to {}\n", cells, a.output);
}

// Adds "--a-b,--a_b" so config keys may use either spelling.
std::string both(const std::string& dashed) {
  std::string under = dashed;
  std::replace(under.begin(), under.end(), '-', '_');
  return under == dashed ? "--" + dashed : "--" + dashed + ",--" + under;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stroke-image generation: ingest, augment, train, evaluate, sample, render", "strokegen"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Show help for all commands");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Fit a pen recording with Bezier paths");
  ingest_cmd->add_option("recording", ingest_args.input, "Recording JSON")->required();
  ingest_cmd->add_option("-o,--out", ingest_args.output, "Path-image JSON to write");
  ingest_cmd->add_option(both("fit-error"), ingest_args.fit_error, "Maximum fit error in canvas units");

  PreviewArgs preview;
  auto* preview_cmd = app.add_subcommand("augment-preview", "Contact sheet of augmented patches");
  preview_cmd->add_option("pathimage", preview.input, "Path-image JSON")->required();
  preview_cmd->add_option("-o,--out", preview.output, "SVG to write");
  preview_cmd->add_option("-n,--n", preview.n, "Number of patches");
  preview_cmd->add_option("--seed", preview.seed);
  preview_cmd->add_option("--columns", preview.columns);
  preview_cmd->add_option("--jobs", preview.jobs);
  preview_cmd->add_option(both("reversal-probability"), preview.augment.reversal_probability);
  preview_cmd->add_option(both("scale-min"), preview.augment.scale_min);
  preview_cmd->add_flag("--colors", preview.colors, "Random color per path");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train the encoder on augmented patches");
  train_cmd->add_option("pathimage", ta.input, "Path-image JSON")->required();
  train_cmd->add_option(both("out-dir"), ta.out_dir, "Directory for checkpoint, loss.csv, loss.svg, summary.json");
  train_cmd->add_option("--preset", ta.preset, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  train_cmd->add_option("--epochs", ta.epochs);
  train_cmd->add_option(both("patches-per-epoch"), ta.patches_per_epoch);
  train_cmd->add_option(both("batch-size"), ta.batch_size);
  train_cmd->add_option(both("warmup-steps"), ta.warmup_steps);
  train_cmd->add_option(both("heldout-patches"), ta.heldout_patches);
  train_cmd->add_option(both("heldout-seed"), ta.heldout_seed);
  train_cmd->add_option(both("fixed-patch-set"), ta.fixed_patch_set, "Train every epoch on one set of this size");
  train_cmd->add_option("--seed", ta.seed);
  train_cmd->add_option(both("flatten-error"), ta.flatten_error);
  train_cmd->add_option(both("max-move-len"), ta.max_move_len);
  train_cmd->add_option(both("reversal-probability"), ta.reversal_probability);
  train_cmd->add_option(both("scale-min"), ta.scale_min);
  train_cmd->add_option(both("d-model"), ta.d_model);
  train_cmd->add_option(both("n-layers") + ",--layers", ta.n_layers);
  train_cmd->add_option(both("n-heads") + ",--heads", ta.n_heads);
  train_cmd->add_option(both("d-ff"), ta.d_ff);
  train_cmd->add_option(both("seq-len"), ta.seq_len, "Window length L (default: from the image)");
  train_cmd->add_option(both("seq-len-ceiling"), ta.seq_len_ceiling);
  train_cmd->add_option(both("vocab-mode"), ta.vocab_mode, "closed or observed");
  train_cmd->add_option(both("single-attention"), ta.single_attention, "One attention sub-layer per layer");
  train_cmd->add_option("--jobs", ta.jobs);
  train_cmd->add_flag("-q,--quiet", ta.quiet);

  EvaluateArgs ea;
  auto* eval_cmd = app.add_subcommand("evaluate", "Held-out cross-entropy of a checkpoint");
  eval_cmd->add_option("checkpoint", ea.checkpoint)->required();
  eval_cmd->add_option("--image", ea.image, "Source path image; scores the checkpoint's held-out set");
  eval_cmd->add_option(both("patch-set"), ea.patch_set, "Patch-set JSON to score instead");
  eval_cmd->add_option(both("heldout-patches"), ea.heldout_patches);
  eval_cmd->add_option(both("heldout-seed"), ea.heldout_seed);

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Generate images from a checkpoint");
  sample_cmd->add_option("checkpoint", sa.checkpoint)->required();
  sample_cmd->add_option("-o,--out", sa.output, "SVG grid; metadata goes next to it as .json");
  sample_cmd->add_option("-k,--k", sa.k, "Top-k");
  sample_cmd->add_option(both("init-len"), sa.init_len, "Integer, 'half' or 'full'");
  sample_cmd->add_option("--count", sa.count);
  sample_cmd->add_option(both("max-moves"), sa.max_moves, "Cap on generated moves (0: 4 x seq_len)");
  sample_cmd->add_option("--seed", sa.seed);
  sample_cmd->add_option("--columns", sa.columns);
  sample_cmd->add_option("--jobs", sa.jobs);
  sample_cmd->add_flag("--colors", sa.colors, "Random color per path");

  RenderArgs ra;
  auto* render_cmd = app.add_subcommand("render", "Render a recording, path image or patch set to SVG");
  render_cmd->add_option("input", ra.input)->required();
  render_cmd->add_option("-o,--out", ra.output);
  render_cmd->add_option("--columns", ra.columns);
  render_cmd->add_option(both("flatten-error"), ra.flatten_error, "Draw flattened polylines instead of curves");
  render_cmd->add_option("--seed", ra.seed);
  render_cmd->add_flag("--colors", ra.colors);

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (*ingest_cmd) cmd_ingest(ingest_args, out);
    if (*preview_cmd) cmd_augment_preview(preview, out);
    if (*train_cmd) cmd_train(ta, out);
    if (*eval_cmd) cmd_evaluate(ea, out);
    if (*sample_cmd) cmd_sample(sa, out);
    if (*render_cmd) cmd_render(ra, out);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace strokegen::cli
