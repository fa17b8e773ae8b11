#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actionslot/dataset.hpp"
#include "actionslot/losses.hpp"
#include "actionslot/metrics.hpp"
#include "actionslot/model.hpp"

namespace actionslot {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 8;
  double learning_rate = 1e-4;  // default range [5e-5, 1e-4]
  double weight_decay = 1e-4;   // default range [1e-4, 1e-1]
  uint64_t seed = 0;
  LossWeights weights;
  bool ego_loss = true;  // auxiliary ego cross-entropy, weight 1
  double val_fraction = 0.1;
  // Stop once validation mAP reaches this value (disabled when < 0).
  double early_stop_val_map = -1;
  ModelConfig model;

  void validate() const;
};

// JSON config. model.classes defaults to the dataset catalog at train time.
TrainConfig load_train_config(const std::string& path);

struct TrainResult {
  std::string checkpoint_path;
  double best_val_map = 0;
  int best_epoch = -1;
  int epochs_run = 0;
  double wall_seconds = 0;
};

// Trains on `<data_root>/train`, holding out val_fraction of the clips by
// seed for checkpoint selection. Writes checkpoint.aslt, loss_log.csv
// (step,L_act,L_bg,L_neg,ego,total) and epoch_log.csv under out_dir.
TrainResult train_model(const TrainConfig& config, const std::string& data_root,
                        const std::string& out_dir);

// In-memory variant used by tests and the acceptance suite.
TrainResult train_on(const TrainConfig& config,
                     const std::vector<LoadedClip>& train_clips,
                     const ClassCatalog& catalog, const std::string& out_dir);

// Deterministic fixed-subsample evaluation of a model over clips.
EvalReport evaluate_model(const ActionSlotModel<float>& model,
                          const std::vector<LoadedClip>& clips,
                          const ClassCatalog& catalog);

// Loads the checkpoint, verifies its catalog hash against the dataset, and
// evaluates the named split; writes the report text and confusion.csv next
// to `report_path`.
EvalReport evaluate(const std::string& checkpoint_path,
                    const std::string& data_root, const std::string& split,
                    const std::string& report_path);

// Model input assembly: normalized [T,H,W,3] floats for the stored frames
// at `indices`, plus the token-grid background target.
Tensor<float> clip_input(const LoadedClip& clip, const std::vector<int>& indices);
Tensor<float> clip_bg_target(const LoadedClip& clip, const std::vector<int>& indices,
                             int grid_h, int grid_w);

std::vector<LoadedClip> load_split(const std::string& root, const std::string& split,
                                   const ClassCatalog& catalog);

}  // namespace actionslot
