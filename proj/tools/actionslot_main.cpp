#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "actionslot/checkpoint.hpp"
#include "actionslot/dataset.hpp"
#include "actionslot/train.hpp"
#include "actionslot/viz.hpp"

namespace fs = std::filesystem;
using namespace actionslot;

namespace {

int run_gen(const std::string& config_path, const std::string& out_dir,
            uint64_t seed) {
  DatasetConfig cfg = load_dataset_config(config_path);
  DatasetManifest manifest = generate_dataset(cfg, out_dir, seed);
  size_t total = 0;
  for (const auto& [split, records] : manifest.splits) {
    std::printf("split %-8s %zu clips\n", split.c_str(), records.size());
    total += records.size();
  }
  std::printf("total %zu clips, %.3f labels/clip, manifest at %s/manifest.json\n",
              total, manifest.mean_labels_per_clip, out_dir.c_str());
  return 0;
}

int run_train(const std::string& config_path, const std::string& data_root,
              const std::string& out_dir) {
  TrainConfig cfg = load_train_config(config_path);
  TrainResult result = train_model(cfg, data_root, out_dir);
  std::printf("best val mAP %.4f at epoch %d (%d epochs, %.1fs)\n",
              result.best_val_map, result.best_epoch, result.epochs_run,
              result.wall_seconds);
  std::printf("checkpoint: %s\n", result.checkpoint_path.c_str());
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& data_root,
             const std::string& split, const std::string& report_path) {
  EvalReport report = evaluate(ckpt, data_root, split, report_path);
  std::printf("%s", report.to_text().c_str());
  std::printf("report: %s\n", report_path.c_str());
  return 0;
}

int run_viz(const std::string& ckpt, const std::string& clip_dir,
            const std::string& classes, double tau, const std::string& out_dir) {
  ActionSlotModel<float> model = load_checkpoint<float>(ckpt);
  const ModelConfig& mc = model.config();
  ClassCatalog catalog = ClassCatalog::subset(mc.classes);

  // The clip directory is one dataset entry; read its label.json for the
  // stored frame count and evaluation indices.
  std::ifstream label_in(fs::path(clip_dir) / "label.json");
  if (!label_in) {
    std::fprintf(stderr, "no label.json under %s\n", clip_dir.c_str());
    return 1;
  }
  nlohmann::json label = nlohmann::json::parse(label_in);
  ClipRecord record;
  record.id = fs::path(clip_dir).filename().string();
  record.seed = label["seed"];
  record.activities = label["activities"].get<std::vector<std::string>>();
  record.ego = label["ego"];
  record.length = label["length"];
  record.eval_frame_indices = label["frame_indices"].get<std::vector<int>>();

  LoadedClip clip = load_clip(fs::path(clip_dir).parent_path().parent_path().string(),
                              fs::path(clip_dir).parent_path().filename().string(),
                              record, catalog);
  std::vector<int> indices =
      subsample_indices(clip.length, mc.clip_len, SubsampleMode::kFixed, 0);
  Tensor<float> input = clip_input(clip, indices);
  ModelOutput<float> output = model.forward_eval(input);

  OverlaySpec spec;
  spec.tau = tau;
  if (classes == "auto") {
    for (int c = 0; c < mc.num_classes(); ++c) {
      if (output.probs[c] > 0.5f) spec.class_indices.push_back(c);
    }
  } else {
    std::string rest = classes;
    while (!rest.empty()) {
      size_t comma = rest.find(',');
      std::string name = rest.substr(0, comma);
      auto idx = catalog.index_of(name);
      if (!idx) {
        std::fprintf(stderr, "unknown class %s\n", name.c_str());
        return 1;
      }
      spec.class_indices.push_back(*idx);
      rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    }
  }
  for (size_t i = 0; i < spec.class_indices.size(); ++i) {
    spec.colors.push_back(overlay_color(static_cast<int>(i)));
  }

  // Overlay the subsampled frames the model actually saw.
  std::vector<uint8_t> pixels;
  const size_t frame_px = static_cast<size_t>(clip.height) * clip.width * 3;
  for (int idx : indices) {
    pixels.insert(pixels.end(), clip.frames.begin() + frame_px * idx,
                  clip.frames.begin() + frame_px * (idx + 1));
  }
  auto paths = render_overlay(pixels, mc.clip_len, clip.height, clip.width,
                              output, catalog.names(), spec, out_dir);
  std::printf("wrote %zu files under %s\n", paths.size(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action-slot atomic activity recognition toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_root, ckpt, split = "test";
  std::string report_path, clip_dir, classes = "auto";
  uint64_t seed = 0;
  double tau = 0.2;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--config", config_path, "generator config JSON")->required();
  gen->add_option("--out", out_dir, "output dataset directory")->required();
  gen->add_option("--seed", seed, "master seed");

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path, "train config JSON")->required();
  train->add_option("--data", data_root, "dataset root")->required();
  train->add_option("--out", out_dir, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--ckpt", ckpt, "checkpoint file")->required();
  eval->add_option("--data", data_root, "dataset root")->required();
  eval->add_option("--split", split, "dataset split");
  eval->add_option("--report", report_path, "report output file")->required();

  auto* viz = app.add_subcommand("viz", "render attention overlays");
  viz->add_option("--ckpt", ckpt, "checkpoint file")->required();
  viz->add_option("--clip", clip_dir, "clip directory")->required();
  viz->add_option("--classes", classes, "auto or comma-separated labels");
  viz->add_option("--tau", tau, "attention threshold");
  viz->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen(config_path, out_dir, seed);
    if (train->parsed()) return run_train(config_path, data_root, out_dir);
    if (eval->parsed()) return run_eval(ckpt, data_root, split, report_path);
    if (viz->parsed()) return run_viz(ckpt, clip_dir, classes, tau, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
