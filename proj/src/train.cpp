#include "actionslot/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "actionslot/checkpoint.hpp"
#include "actionslot/optim.hpp"
#include "actionslot/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace actionslot {

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1) {
    throw std::invalid_argument("epochs and batch size must be positive");
  }
  if (learning_rate <= 0 || weight_decay < 0) {
    throw std::invalid_argument("bad optimizer hyperparameters");
  }
  if (weights.w_bg < 0 || weights.w_neg < 0) {
    throw std::invalid_argument("loss weights must be nonnegative");
  }
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open train config " + path);
  json j = json::parse(in);
  TrainConfig cfg;
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.weights.w_bg = j.value("w_bg", cfg.weights.w_bg);
  cfg.weights.w_neg = j.value("w_neg", cfg.weights.w_neg);
  cfg.ego_loss = j.value("ego_loss", cfg.ego_loss);
  cfg.val_fraction = j.value("val_fraction", cfg.val_fraction);
  cfg.early_stop_val_map = j.value("early_stop_val_map", cfg.early_stop_val_map);
  if (j.contains("model")) cfg.model = model_config_from_json(j["model"]);
  return cfg;
}

std::vector<LoadedClip> load_split(const std::string& root, const std::string& split,
                                   const ClassCatalog& catalog) {
  DatasetManifest manifest = load_manifest(root);
  auto it = manifest.splits.find(split);
  if (it == manifest.splits.end()) {
    throw std::runtime_error("dataset has no split \"" + split + "\"");
  }
  if (it->second.empty()) {
    throw std::runtime_error("split \"" + split + "\" is empty");
  }
  std::vector<LoadedClip> clips;
  clips.reserve(it->second.size());
  for (const auto& record : it->second) {
    clips.push_back(load_clip(root, split, record, catalog));
  }
  return clips;
}

Tensor<float> clip_input(const LoadedClip& clip, const std::vector<int>& indices) {
  const int t = static_cast<int>(indices.size());
  Tensor<float> input({t, clip.height, clip.width, 3});
  const size_t frame_px = static_cast<size_t>(clip.height) * clip.width * 3;
  for (int i = 0; i < t; ++i) {
    const uint8_t* src = clip.frames.data() + frame_px * indices[i];
    float* dst = input.ptr() + frame_px * i;
    for (size_t p = 0; p < frame_px; ++p) dst[p] = src[p] / 255.0f;
  }
  return input;
}

Tensor<float> clip_bg_target(const LoadedClip& clip, const std::vector<int>& indices,
                             int grid_h, int grid_w) {
  const int t = static_cast<int>(indices.size());
  std::vector<uint8_t> masks(static_cast<size_t>(t) * clip.height * clip.width);
  const size_t frame_px = static_cast<size_t>(clip.height) * clip.width;
  for (int i = 0; i < t; ++i) {
    std::copy(clip.masks.begin() + frame_px * indices[i],
              clip.masks.begin() + frame_px * (indices[i] + 1),
              masks.begin() + frame_px * i);
  }
  return background_target<float>(masks, t, clip.height, clip.width, grid_h, grid_w);
}

namespace {

struct EvalScores {
  std::vector<double> scores;
  std::vector<uint8_t> labels;
  int correct_ego = 0, with_ego = 0;
  // per-clip outputs retained for confusion counts
  std::vector<std::vector<float>> probs;
};

EvalScores score_clips(const ActionSlotModel<float>& model,
                       const std::vector<LoadedClip>& clips) {
  const ModelConfig& mc = model.config();
  EvalScores out;
  const int k = mc.num_classes();
  out.scores.reserve(clips.size() * k);
  out.labels.reserve(clips.size() * k);
  for (const auto& clip : clips) {
    std::vector<int> indices =
        subsample_indices(clip.length, mc.clip_len, SubsampleMode::kFixed, 0);
    Tensor<float> input = clip_input(clip, indices);
    ModelOutput<float> mo = model.forward_eval(input);
    for (int c = 0; c < k; ++c) {
      out.scores.push_back(mo.probs[c]);
      out.labels.push_back(clip.label[c]);
    }
    if (!mo.ego_probs.empty()) {
      int arg = 0;
      for (int e = 1; e < kNumEgoClasses; ++e) {
        if (mo.ego_probs[e] > mo.ego_probs[arg]) arg = e;
      }
      out.with_ego += 1;
      out.correct_ego += arg == clip.ego_action ? 1 : 0;
    }
    out.probs.emplace_back(mo.probs.begin(), mo.probs.end());
  }
  return out;
}

}  // namespace

EvalReport evaluate_model(const ActionSlotModel<float>& model,
                          const std::vector<LoadedClip>& clips,
                          const ClassCatalog& catalog) {
  EvalScores s = score_clips(model, clips);
  EvalReport report = mean_average_precision(s.scores, s.labels,
                                             static_cast<int>(clips.size()), catalog);
  if (s.with_ego > 0) {
    report.ego_accuracy = static_cast<double>(s.correct_ego) / s.with_ego;
  }
  return report;
}

TrainResult train_on(const TrainConfig& config,
                     const std::vector<LoadedClip>& train_clips,
                     const ClassCatalog& catalog, const std::string& out_dir) {
  config.validate();
  auto t_start = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);

  ModelConfig mc = config.model;
  if (mc.classes.empty()) mc.classes = catalog.names();
  ActionSlotModel<float> model(mc, config.seed);

  // Hold out a validation set by seed for checkpoint selection.
  std::vector<int> order(train_clips.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(config.seed ^ 0x5eedbeefULL);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[split_rng.uniform_index(i)]);
  }
  int val_count = static_cast<int>(std::floor(order.size() * config.val_fraction));
  std::vector<const LoadedClip*> val, train;
  for (size_t i = 0; i < order.size(); ++i) {
    (static_cast<int>(i) < val_count ? val : train).push_back(&train_clips[order[i]]);
  }
  if (train.empty()) train.swap(val);
  std::vector<LoadedClip> val_copy;
  for (auto* c : val) val_copy.push_back(*c);
  if (val_copy.empty()) {
    for (auto* c : train) val_copy.push_back(*c);
  }

  std::ofstream loss_log(fs::path(out_dir) / "loss_log.csv");
  loss_log << "step,L_act,L_bg,L_neg,ego,total\n";
  std::ofstream epoch_log(fs::path(out_dir) / "epoch_log.csv");
  epoch_log << "epoch,val_map\n";

  auto params = model.params();
  AdamW<float> opt(params, config.learning_rate, config.weight_decay);

  const int grid_h = mc.feat_h(), grid_w = mc.feat_w();
  const bool use_bg = mc.flags.background_slot && config.weights.w_bg > 0;
  const bool use_attn_loss = use_bg || config.weights.w_neg > 0;
  const bool use_ego = mc.flags.ego_head && config.ego_loss;

  TrainResult result;
  std::vector<Tensor<float>> best_params;
  Rng epoch_rng(config.seed ^ 0x0a11ce5ULL);
  long step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<const LoadedClip*> shuffled = train;
    for (size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[epoch_rng.uniform_index(i)]);
    }

    for (size_t batch_begin = 0; batch_begin < shuffled.size();
         batch_begin += config.batch_size) {
      size_t batch_end =
          std::min(shuffled.size(), batch_begin + config.batch_size);
      const int bsz = static_cast<int>(batch_end - batch_begin);
      model.zero_grads();
      LossBreakdown<float> batch_loss;

      for (size_t bi = batch_begin; bi < batch_end; ++bi) {
        const LoadedClip& clip = *shuffled[bi];
        uint64_t clip_seed = epoch_rng.next_u64();
        std::vector<int> indices = subsample_indices(
            clip.length, mc.clip_len, SubsampleMode::kRandom, clip_seed);
        Tensor<float> input = clip_input(clip, indices);

        typename ActionSlotModel<float>::Forward fw;
        model.forward(input, true, clip_seed ^ 0xd40b07ULL, fw);

        Tensor<float> bg_target;
        if (use_bg) bg_target = clip_bg_target(clip, indices, grid_h, grid_w);

        std::vector<float> probs(fw.probs.data.begin(), fw.probs.data.end());
        std::vector<float> ego_probs;
        if (use_ego) {
          ego_probs.assign(fw.ego_probs.data.begin(), fw.ego_probs.data.end());
        }
        std::vector<float> dprobs, dego;
        Tensor<float> dattn;
        LossBreakdown<float> lb = loss_total<float>(
            probs, clip.label, fw.attention, mc.num_tokens(), mc.num_slots(),
            use_bg ? &bg_target : nullptr, config.weights,
            use_ego ? &ego_probs : nullptr, use_ego ? clip.ego_action : -1,
            &dprobs, use_attn_loss ? &dattn : nullptr, use_ego ? &dego : nullptr);
        if (!std::isfinite(lb.total)) {
          throw std::runtime_error(
              "non-finite training loss at step " + std::to_string(step) +
              " (act=" + std::to_string(lb.act) + ", bg=" + std::to_string(lb.bg) +
              ", neg=" + std::to_string(lb.neg) + ")");
        }
        batch_loss.act += lb.act;
        batch_loss.bg += lb.bg;
        batch_loss.neg += lb.neg;
        batch_loss.ego += lb.ego;
        batch_loss.total += lb.total;

        Tensor<float> dprobs_t({mc.num_classes()});
        std::copy(dprobs.begin(), dprobs.end(), dprobs_t.data.begin());
        Tensor<float> dego_t;
        if (use_ego && !dego.empty()) {
          dego_t = Tensor<float>({1, kNumEgoClasses});
          std::copy(dego.begin(), dego.end(), dego_t.data.begin());
        }
        model.backward(fw, dprobs_t, use_attn_loss ? dattn : Tensor<float>(),
                       dego_t);
      }

      // average gradients over the batch
      for (auto& p : params) {
        for (auto& g : p.grad->data) g /= static_cast<float>(bsz);
      }
      opt.step();
      ++step;
      loss_log << step << "," << batch_loss.act / bsz << "," << batch_loss.bg / bsz
               << "," << batch_loss.neg / bsz << "," << batch_loss.ego / bsz << ","
               << batch_loss.total / bsz << "\n";
    }

    EvalReport val_report = evaluate_model(model, val_copy, catalog);
    epoch_log << epoch << "," << val_report.map << "\n";
    result.epochs_run = epoch + 1;
    if (val_report.map > result.best_val_map || result.best_epoch < 0) {
      result.best_val_map = val_report.map;
      result.best_epoch = epoch;
      best_params.clear();
      for (auto& p : params) best_params.push_back(*p.value);
    }
    if (config.early_stop_val_map >= 0 &&
        val_report.map >= config.early_stop_val_map) {
      break;
    }
  }

  // restore the best validation parameters before writing the checkpoint
  if (!best_params.empty()) {
    for (size_t i = 0; i < params.size(); ++i) *params[i].value = best_params[i];
  }
  result.checkpoint_path = (fs::path(out_dir) / "checkpoint.aslt").string();
  save_checkpoint(result.checkpoint_path, model, config.seed);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

TrainResult train_model(const TrainConfig& config, const std::string& data_root,
                        const std::string& out_dir) {
  DatasetManifest manifest = load_manifest(data_root);
  ClassCatalog catalog = config.model.classes.empty()
                             ? ClassCatalog::subset(manifest.classes)
                             : ClassCatalog::subset(config.model.classes);
  std::vector<LoadedClip> clips = load_split(data_root, "train", catalog);
  return train_on(config, clips, catalog, out_dir);
}

EvalReport evaluate(const std::string& checkpoint_path,
                    const std::string& data_root, const std::string& split,
                    const std::string& report_path) {
  uint64_t seed = 0, ckpt_catalog_hash = 0;
  ActionSlotModel<float> model =
      load_checkpoint<float>(checkpoint_path, &seed, &ckpt_catalog_hash);
  ClassCatalog catalog = ClassCatalog::subset(model.config().classes);

  DatasetManifest manifest = load_manifest(data_root);
  ClassCatalog dataset_catalog = ClassCatalog::subset(manifest.classes);
  if (catalog.hash() != dataset_catalog.hash()) {
    throw std::runtime_error(
        "checkpoint catalog hash does not match the dataset catalog");
  }

  std::vector<LoadedClip> clips = load_split(data_root, split, catalog);
  EvalScores s = score_clips(model, clips);
  EvalReport report = mean_average_precision(s.scores, s.labels,
                                             static_cast<int>(clips.size()), catalog);
  if (s.with_ego > 0) {
    report.ego_accuracy = static_cast<double>(s.correct_ego) / s.with_ego;
  }

  // confusion artifact: per-class TP/FP/FN/TN at threshold 0.5
  fs::path confusion = fs::path(report_path).parent_path() / "confusion.csv";
  {
    std::ofstream out(confusion);
    out << "class,tp,fp,fn,tn\n";
    for (int c = 0; c < catalog.size(); ++c) {
      int tp = 0, fp = 0, fn = 0, tn = 0;
      for (size_t i = 0; i < clips.size(); ++i) {
        bool pred = s.probs[i][c] > 0.5f;
        bool truth = clips[i].label[c] != 0;
        if (pred && truth) ++tp;
        else if (pred) ++fp;
        else if (truth) ++fn;
        else ++tn;
      }
      out << catalog.at(c).to_string() << "," << tp << "," << fp << "," << fn
          << "," << tn << "\n";
    }
  }
  report.confusion_path = confusion.string();

  std::ofstream out(report_path);
  if (!out) throw std::runtime_error("cannot write report " + report_path);
  out << report.to_text();
  return report;
}

}  // namespace actionslot
