#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "actionslot/labels.hpp"
#include "actionslot/nn.hpp"
#include "actionslot/rng.hpp"
#include "actionslot/tensor.hpp"

namespace actionslot {

enum class UpdateMode { kParallel, kRecurrent };
enum class AttnNorm { kSlot, kCross };

struct VariantFlags {
  UpdateMode update = UpdateMode::kParallel;
  AttnNorm attn_norm = AttnNorm::kSlot;
  bool background_slot = true;
  bool ego_head = true;
  bool gated_recurrent = false;  // gated update instead of slots <- U
};

struct ModelConfig {
  int clip_len = 16;
  int image_h = 64, image_w = 192;
  std::array<int, 4> channels = {32, 64, 128, 256};  // channels[3] == D_in
  int slot_dim = 256;   // D_slot (slot vectors and value projection)
  int attn_dim = 256;   // D (query/key projection)
  int iterations = 1;   // M
  double dropout = 0.5;
  VariantFlags flags;
  std::vector<std::string> classes;  // allocated classes, defines K

  int num_classes() const { return static_cast<int>(classes.size()); }
  int num_slots() const { return num_classes() + (flags.background_slot ? 1 : 0); }
  int feat_h() const { return image_h / 8; }
  int feat_w() const { return image_w / 8; }
  int num_tokens() const { return clip_len * feat_h() * feat_w(); }
  int feat_dim() const { return channels[3]; }

  void validate() const {
    if (image_h % 8 != 0 || image_w % 8 != 0) {
      throw std::invalid_argument(
          "input spatial size must be divisible by the backbone downsample factor 8");
    }
    if (classes.empty()) throw std::invalid_argument("model needs at least one class");
    if (iterations < 1) throw std::invalid_argument("iteration count M must be >= 1");
    if (clip_len < 1) throw std::invalid_argument("clip length must be positive");
  }
};

// Evaluation-mode output bundle.
template <typename T>
struct ModelOutput {
  std::vector<T> probs;    // [K], sigmoid outputs
  Tensor<T> attention;     // [N, num_slots], normalized
  std::vector<T> ego_probs;  // [4]
  int grid_t = 0, grid_h = 0, grid_w = 0;

  // Per-class per-frame attention view: [grid_h, grid_w] slice.
  std::vector<T> attention_slice(int slot, int frame) const {
    std::vector<T> out(static_cast<size_t>(grid_h) * grid_w);
    int hw = grid_h * grid_w;
    int slots = attention.dim(1);
    for (int i = 0; i < hw; ++i) {
      out[i] = attention.data[static_cast<size_t>(frame * hw + i) * slots + slot];
    }
    return out;
  }
};

// The Action-slot network: per-frame convolutional backbone, learnable 3D
// positional embedding, allocated slot attention with a background slot,
// per-class binary classifiers, and an ego-action head.
template <typename T>
class ActionSlotModel {
 public:
  struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
  };

  ActionSlotModel(ModelConfig config, uint64_t seed) : cfg_(std::move(config)) {
    cfg_.validate();
    Rng rng(seed);
    const int c0 = 3;
    conv_[0].configure(c0, cfg_.channels[0], 3, 2, rng);
    conv_[1].configure(cfg_.channels[0], cfg_.channels[1], 3, 2, rng);
    conv_[2].configure(cfg_.channels[1], cfg_.channels[2], 3, 2, rng);
    conv_[3].configure(cfg_.channels[2], cfg_.channels[3], 3, 1, rng);

    pos_embed_ = Tensor<T>({cfg_.num_tokens(), cfg_.feat_dim()});
    init_normal(pos_embed_, 0.02, rng);
    slots_ = Tensor<T>({cfg_.num_slots(), cfg_.slot_dim});
    init_normal(slots_, 1.0 / std::sqrt(static_cast<double>(cfg_.slot_dim)), rng);

    ln_tokens_.configure(cfg_.feat_dim());
    ln_slots_.configure(cfg_.slot_dim);
    wq_.configure(cfg_.slot_dim, cfg_.attn_dim, rng);
    wk_.configure(cfg_.feat_dim(), cfg_.attn_dim, rng);
    wv_.configure(cfg_.feat_dim(), cfg_.slot_dim, rng);
    classifier_w_ = Tensor<T>({cfg_.num_classes(), cfg_.slot_dim});
    classifier_b_ = Tensor<T>({cfg_.num_classes()});
    init_uniform(classifier_w_, cfg_.slot_dim, rng);
    if (cfg_.flags.ego_head) {
      ego_conv_.configure(cfg_.feat_dim(), cfg_.feat_dim(), rng);
      ego_fc_.configure(cfg_.feat_dim(), kNumEgoClasses, rng);
    }
    if (cfg_.flags.gated_recurrent) {
      gru_wr_.configure(cfg_.slot_dim, cfg_.slot_dim, rng);
      gru_wz_.configure(cfg_.slot_dim, cfg_.slot_dim, rng);
      gru_wn_.configure(cfg_.slot_dim, cfg_.slot_dim, rng);
      gru_rr_.configure(cfg_.slot_dim, cfg_.slot_dim, rng);
      gru_rz_.configure(cfg_.slot_dim, cfg_.slot_dim, rng);
      gru_rn_.configure(cfg_.slot_dim, cfg_.slot_dim, rng);
    }
    alloc_grads();
  }

  const ModelConfig& config() const { return cfg_; }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    for (int i = 0; i < 4; ++i) {
      out.push_back({"conv" + std::to_string(i + 1) + ".weight",
                     &conv_[i].weight, &conv_grad_[i].weight});
      out.push_back({"conv" + std::to_string(i + 1) + ".bias", &conv_[i].bias,
                     &conv_grad_[i].bias});
    }
    out.push_back({"pos_embed", &pos_embed_, &pos_embed_grad_});
    out.push_back({"slots", &slots_, &slots_grad_});
    out.push_back({"ln_tokens.gain", &ln_tokens_.gain, &ln_tokens_grad_.gain});
    out.push_back({"ln_tokens.bias", &ln_tokens_.bias, &ln_tokens_grad_.bias});
    out.push_back({"ln_slots.gain", &ln_slots_.gain, &ln_slots_grad_.gain});
    out.push_back({"ln_slots.bias", &ln_slots_.bias, &ln_slots_grad_.bias});
    out.push_back({"wq.weight", &wq_.weight, &wq_grad_.weight});
    out.push_back({"wq.bias", &wq_.bias, &wq_grad_.bias});
    out.push_back({"wk.weight", &wk_.weight, &wk_grad_.weight});
    out.push_back({"wk.bias", &wk_.bias, &wk_grad_.bias});
    out.push_back({"wv.weight", &wv_.weight, &wv_grad_.weight});
    out.push_back({"wv.bias", &wv_.bias, &wv_grad_.bias});
    out.push_back({"classifier.weight", &classifier_w_, &classifier_w_grad_});
    out.push_back({"classifier.bias", &classifier_b_, &classifier_b_grad_});
    if (cfg_.flags.ego_head) {
      out.push_back({"ego_conv.weight", &ego_conv_.weight, &ego_conv_grad_.weight});
      out.push_back({"ego_conv.bias", &ego_conv_.bias, &ego_conv_grad_.bias});
      out.push_back({"ego_fc.weight", &ego_fc_.weight, &ego_fc_grad_.weight});
      out.push_back({"ego_fc.bias", &ego_fc_.bias, &ego_fc_grad_.bias});
    }
    if (cfg_.flags.gated_recurrent) {
      out.push_back({"gru_wr.weight", &gru_wr_.weight, &gru_wr_grad_.weight});
      out.push_back({"gru_wr.bias", &gru_wr_.bias, &gru_wr_grad_.bias});
      out.push_back({"gru_wz.weight", &gru_wz_.weight, &gru_wz_grad_.weight});
      out.push_back({"gru_wz.bias", &gru_wz_.bias, &gru_wz_grad_.bias});
      out.push_back({"gru_wn.weight", &gru_wn_.weight, &gru_wn_grad_.weight});
      out.push_back({"gru_wn.bias", &gru_wn_.bias, &gru_wn_grad_.bias});
      out.push_back({"gru_rr.weight", &gru_rr_.weight, &gru_rr_grad_.weight});
      out.push_back({"gru_rr.bias", &gru_rr_.bias, &gru_rr_grad_.bias});
      out.push_back({"gru_rz.weight", &gru_rz_.weight, &gru_rz_grad_.weight});
      out.push_back({"gru_rz.bias", &gru_rz_.bias, &gru_rz_grad_.bias});
      out.push_back({"gru_rn.weight", &gru_rn_.weight, &gru_rn_grad_.weight});
      out.push_back({"gru_rn.bias", &gru_rn_.bias, &gru_rn_grad_.bias});
    }
    return out;
  }

  void zero_grads() {
    for (auto& p : params()) p.grad->fill(T(0));
  }

  struct AttnStep {
    Tensor<T> slots_in;   // [Ks, Ds]
    typename LayerNorm<T>::Cache ln_cache;
    Tensor<T> ln_out;     // [Ks, Ds]
    Tensor<T> q;          // [Ks, D]
    Tensor<T> attn;       // [rows, Ks] normalized
    Tensor<T> update;     // [Ks, Ds] U
    int row_begin = 0, rows = 0;  // token range this step attends to
    // gated update cache
    Tensor<T> gate_r, gate_z, gate_n, rh;
  };

  struct Forward {
    bool training = false;
    int frames = 0;
    std::array<typename Conv2d<T>::Cache, 4> conv_cache;
    std::array<Tensor<T>, 4> conv_act;  // post-relu
    Tensor<T> dropout_mask;
    Tensor<T> features;  // [N, C] post dropout
    Tensor<T> tokens;    // features + E
    typename LayerNorm<T>::Cache ln_tok_cache;
    Tensor<T> ln_tok;    // [N, C]
    Tensor<T> kmat;      // [N, D]
    Tensor<T> vmat;      // [N, Ds]
    std::vector<AttnStep> steps;
    Tensor<T> attention;  // [N, Ks] final normalized map
    Tensor<T> slots_out;  // [Ks, Ds]
    Tensor<T> probs;      // [K]
    Tensor<T> ego_mid;    // [N, C]
    Tensor<T> ego_feat;   // [1, C]
    Tensor<T> ego_probs;  // [1, 4]
  };

  // input: [clip_len, H, W, 3], values in [0, 1].
  void forward(const Tensor<T>& input, bool training, uint64_t dropout_seed,
               Forward& fw) const {
    fw.training = training;
    fw.frames = cfg_.clip_len;
    extract_features_impl(input, training, dropout_seed, fw);

    const int n = cfg_.num_tokens(), c = cfg_.feat_dim();
    fw.tokens = fw.features;
    {
      auto t = fw.tokens.mat(n, c);
      t += pos_embed_.mat(n, c);
    }
    fw.ln_tok = ln_tokens_.forward(fw.tokens, n, fw.ln_tok_cache);
    fw.kmat = wk_.forward(fw.ln_tok, n);
    fw.vmat = wv_.forward(fw.ln_tok, n);

    fw.steps.clear();
    run_attention(fw, n);
    classify_impl(fw);
    if (cfg_.flags.ego_head) ego_impl(fw);
  }

  // Loss gradients in: dprobs [K], dattn [N, Ks] (may be empty), dego [1,4]
  // (may be empty). Accumulates parameter gradients.
  void backward(const Forward& fw, const Tensor<T>& dprobs,
                const Tensor<T>& dattn_loss, const Tensor<T>& dego_probs) {
    const int n = cfg_.num_tokens(), c = cfg_.feat_dim();
    const int ks = cfg_.num_slots(), k = cfg_.num_classes();
    const int ds = cfg_.slot_dim, d = cfg_.attn_dim;

    // classifier
    Tensor<T> dslots({ks, ds});
    for (int i = 0; i < k; ++i) {
      T p = fw.probs.data[i];
      T dlogit = dprobs.size() ? dprobs.data[i] * p * (T(1) - p) : T(0);
      classifier_b_grad_.data[i] += dlogit;
      for (int j = 0; j < ds; ++j) {
        classifier_w_grad_.data[static_cast<size_t>(i) * ds + j] +=
            dlogit * fw.slots_out.data[static_cast<size_t>(i) * ds + j];
        dslots.data[static_cast<size_t>(i) * ds + j] +=
            dlogit * classifier_w_.data[static_cast<size_t>(i) * ds + j];
      }
    }

    Tensor<T> dkmat({n, d});
    Tensor<T> dvmat({n, ds});
    const T scale = T(1) / std::sqrt(static_cast<T>(d));

    // attention steps in reverse
    for (int s = static_cast<int>(fw.steps.size()) - 1; s >= 0; --s) {
      const AttnStep& step = fw.steps[s];
      const int rows = step.rows, rb = step.row_begin;
      const bool last = s + 1 == static_cast<int>(fw.steps.size());

      Tensor<T> dupdate({ks, ds});
      Tensor<T> dh_prev({ks, ds});
      if (cfg_.flags.gated_recurrent) {
        gated_backward(step, dslots, dupdate, dh_prev);
      } else {
        dupdate = dslots;
      }

      // dattn from U = attnᵀ·v plus, on the final map, the loss term
      Tensor<T> dattn({rows, ks});
      {
        auto v_rows = fw.vmat.mat(n, ds).middleRows(rb, rows);
        dattn.mat(rows, ks).noalias() = v_rows * dupdate.mat(ks, ds).transpose();
        dvmat.mat(n, ds).middleRows(rb, rows).noalias() +=
            step.attn.mat(rows, ks) * dupdate.mat(ks, ds);
      }
      if (dattn_loss.size()) {
        bool applies = cfg_.flags.update == UpdateMode::kRecurrent || last;
        if (applies) {
          auto dl = dattn_loss.mat(n, ks).middleRows(rb, rows);
          dattn.mat(rows, ks) += dl;
        }
      }

      Tensor<T> dlogits =
          cfg_.flags.attn_norm == AttnNorm::kSlot
              ? softmax_rows_backward(step.attn, dattn, rows, ks)
              : softmax_cols_backward(step.attn, dattn, rows, ks);

      // logits = scale * k_rows · qᵀ
      Tensor<T> dq({ks, d});
      {
        auto k_rows = fw.kmat.mat(n, d).middleRows(rb, rows);
        dq.mat(ks, d).noalias() = dlogits.mat(rows, ks).transpose() * k_rows;
        dq.mat(ks, d) *= scale;
        dkmat.mat(n, d).middleRows(rb, rows).noalias() +=
            scale * (dlogits.mat(rows, ks) * step.q.mat(ks, d));
      }

      Tensor<T> dln_s = wq_.backward(step.ln_out, ks, dq, wq_grad_);
      Tensor<T> dsl = ln_slots_.backward(dln_s, ks, step.ln_cache, ln_slots_grad_);
      if (cfg_.flags.gated_recurrent) {
        auto m = dsl.mat(ks, ds);
        m += dh_prev.mat(ks, ds);
      }
      dslots = dsl;
    }
    // after the loop dslots is the gradient wrt the learned slot bank
    slots_grad_.mat(ks, ds) += dslots.mat(ks, ds);

    // tokens path
    Tensor<T> dln_tok = wk_.backward(fw.ln_tok, n, dkmat, wk_grad_);
    {
      Tensor<T> dv_in = wv_.backward(fw.ln_tok, n, dvmat, wv_grad_);
      dln_tok.mat(n, c) += dv_in.mat(n, c);
    }
    Tensor<T> dtokens =
        ln_tokens_.backward(dln_tok, n, fw.ln_tok_cache, ln_tokens_grad_);
    pos_embed_grad_.mat(n, c) += dtokens.mat(n, c);

    Tensor<T> dfeatures = dtokens;
    if (cfg_.flags.ego_head && dego_probs.size()) {
      Tensor<T> dz = softmax_rows_backward(fw.ego_probs, dego_probs, 1, kNumEgoClasses);
      Tensor<T> dego_feat = ego_fc_.backward(fw.ego_feat, 1, dz, ego_fc_grad_);
      Tensor<T> dego_mid({n, c});
      auto dm = dego_mid.mat(n, c);
      for (int r = 0; r < n; ++r) {
        dm.row(r) = dego_feat.mat(1, c).row(0) / static_cast<T>(n);
      }
      Tensor<T> dmid_in = ego_conv_.backward(fw.features, n, dego_mid, ego_conv_grad_);
      dfeatures.mat(n, c) += dmid_in.mat(n, c);
    }

    backbone_backward(fw, dfeatures);
  }

  // ---- spec-level operations ----

  // Backbone only: [T,H,W,3] -> [N, C] feature tokens (no positional add).
  Tensor<T> extract_features(const Tensor<T>& input, bool training = false,
                             uint64_t dropout_seed = 0) const {
    Forward fw;
    fw.frames = cfg_.clip_len;
    extract_features_impl(input, training, dropout_seed, fw);
    return fw.features;
  }

  // tokens: [N, C] with positional embedding already added. Returns
  // (updated slots [Ks, Ds], attention [N, Ks]).
  std::pair<Tensor<T>, Tensor<T>> slot_attention_parallel(
      const Tensor<T>& tokens) const {
    Forward fw = attention_only(tokens, UpdateMode::kParallel);
    return {fw.slots_out, fw.attention};
  }

  std::pair<Tensor<T>, Tensor<T>> slot_attention_recurrent(
      const Tensor<T>& tokens) const {
    Forward fw = attention_only(tokens, UpdateMode::kRecurrent);
    return {fw.slots_out, fw.attention};
  }

  // probs[c] = sigmoid(w_c · slot_c + b_c); the background row is ignored.
  std::vector<T> classify_slots(const Tensor<T>& slots_out) const {
    const int k = cfg_.num_classes(), ds = cfg_.slot_dim;
    std::vector<T> probs(k);
    for (int i = 0; i < k; ++i) {
      T z = classifier_b_.data[i];
      for (int j = 0; j < ds; ++j) {
        z += classifier_w_.data[static_cast<size_t>(i) * ds + j] *
             slots_out.data[static_cast<size_t>(i) * ds + j];
      }
      probs[i] = sigmoid(z);
    }
    return probs;
  }

  // features: [N, C] -> ego probabilities [4].
  std::vector<T> ego_action_head(const Tensor<T>& features) const {
    Forward fw;
    fw.features = features;
    ego_impl(fw);
    return {fw.ego_probs.data.begin(), fw.ego_probs.data.end()};
  }

  ModelOutput<T> forward_eval(const Tensor<T>& input) const {
    Forward fw;
    forward(input, false, 0, fw);
    ModelOutput<T> out;
    out.probs.assign(fw.probs.data.begin(), fw.probs.data.end());
    out.attention = fw.attention;
    if (cfg_.flags.ego_head) {
      out.ego_probs.assign(fw.ego_probs.data.begin(), fw.ego_probs.data.end());
    }
    out.grid_t = cfg_.clip_len;
    out.grid_h = cfg_.feat_h();
    out.grid_w = cfg_.feat_w();
    return out;
  }

 private:
  void alloc_grads() {
    for (int i = 0; i < 4; ++i) conv_grad_[i] = conv_[i].grad_twin();
    pos_embed_grad_ = Tensor<T>(pos_embed_.shape);
    slots_grad_ = Tensor<T>(slots_.shape);
    ln_tokens_grad_ = ln_tokens_.grad_twin();
    ln_slots_grad_ = ln_slots_.grad_twin();
    wq_grad_ = wq_.grad_twin();
    wk_grad_ = wk_.grad_twin();
    wv_grad_ = wv_.grad_twin();
    classifier_w_grad_ = Tensor<T>(classifier_w_.shape);
    classifier_b_grad_ = Tensor<T>(classifier_b_.shape);
    if (cfg_.flags.ego_head) {
      ego_conv_grad_ = ego_conv_.grad_twin();
      ego_fc_grad_ = ego_fc_.grad_twin();
    }
    if (cfg_.flags.gated_recurrent) {
      gru_wr_grad_ = gru_wr_.grad_twin();
      gru_wz_grad_ = gru_wz_.grad_twin();
      gru_wn_grad_ = gru_wn_.grad_twin();
      gru_rr_grad_ = gru_rr_.grad_twin();
      gru_rz_grad_ = gru_rz_.grad_twin();
      gru_rn_grad_ = gru_rn_.grad_twin();
    }
  }

  void extract_features_impl(const Tensor<T>& input, bool training,
                             uint64_t dropout_seed, Forward& fw) const {
    const int t = cfg_.clip_len;
    if (input.shape != std::vector<int>{t, cfg_.image_h, cfg_.image_w, 3}) {
      throw std::invalid_argument("clip shape does not match model config");
    }
    int h = cfg_.image_h, w = cfg_.image_w;
    Tensor<T> x = input;
    for (int i = 0; i < 4; ++i) {
      x = conv_[i].forward(x, t, h, w, fw.conv_cache[i]);
      relu_inplace(x);
      h = fw.conv_cache[i].out_h;
      w = fw.conv_cache[i].out_w;
      fw.conv_act[i] = x;
    }
    const int n = cfg_.num_tokens(), c = cfg_.feat_dim();
    fw.features = Tensor<T>({n, c});
    std::copy(x.data.begin(), x.data.end(), fw.features.data.begin());
    if (training && cfg_.dropout > 0) {
      Rng rng(dropout_seed);
      fw.dropout_mask = Tensor<T>({n, c});
      const T keep = static_cast<T>(1.0 - cfg_.dropout);
      for (size_t i = 0; i < fw.dropout_mask.data.size(); ++i) {
        fw.dropout_mask.data[i] = rng.uniform_real() < cfg_.dropout ? T(0) : T(1) / keep;
        fw.features.data[i] *= fw.dropout_mask.data[i];
      }
    } else {
      fw.dropout_mask = Tensor<T>();
    }
  }

  void backbone_backward(const Forward& fw, const Tensor<T>& dfeatures) {
    Tensor<T> dx = dfeatures;
    if (fw.dropout_mask.size()) {
      for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= fw.dropout_mask.data[i];
    }
    // reshape [N, C] grad back onto conv4 output layout (identical memory)
    for (int i = 3; i >= 0; --i) {
      relu_backward_inplace(dx, fw.conv_act[i]);
      dx = conv_[i].backward(dx, fw.conv_cache[i], conv_grad_[i]);
    }
  }

  // One attention pass of `slots` over token rows [row_begin, row_begin+rows).
  AttnStep attend(const Tensor<T>& slots, const Forward& fw, int row_begin,
                  int rows) const {
    const int ks = cfg_.num_slots(), ds = cfg_.slot_dim, d = cfg_.attn_dim;
    const int n = cfg_.num_tokens();
    AttnStep step;
    step.row_begin = row_begin;
    step.rows = rows;
    step.ln_out = ln_slots_.forward(slots, ks, step.ln_cache);
    step.q = wq_.forward(step.ln_out, ks);

    step.attn = Tensor<T>({rows, ks});
    const T scale = T(1) / std::sqrt(static_cast<T>(d));
    step.attn.mat(rows, ks).noalias() =
        scale * (fw.kmat.mat(n, d).middleRows(row_begin, rows) *
                 step.q.mat(ks, d).transpose());
    if (cfg_.flags.attn_norm == AttnNorm::kSlot) {
      softmax_rows(step.attn, rows, ks);
    } else {
      softmax_cols(step.attn, rows, ks);
    }

    step.update = Tensor<T>({ks, ds});
    step.update.mat(ks, ds).noalias() =
        step.attn.mat(rows, ks).transpose() *
        fw.vmat.mat(n, ds).middleRows(row_begin, rows);
    return step;
  }

  Tensor<T> gated_update(AttnStep& step) const {
    const int ks = cfg_.num_slots(), ds = cfg_.slot_dim;
    const Tensor<T>& x = step.update;
    const Tensor<T>& h = step.slots_in;
    Tensor<T> r = gru_wr_.forward(x, ks);
    r.mat(ks, ds) += gru_rr_.forward(h, ks).mat(ks, ds);
    Tensor<T> z = gru_wz_.forward(x, ks);
    z.mat(ks, ds) += gru_rz_.forward(h, ks).mat(ks, ds);
    for (auto& v : r.data) v = sigmoid(v);
    for (auto& v : z.data) v = sigmoid(v);
    Tensor<T> rh({ks, ds});
    for (size_t i = 0; i < rh.data.size(); ++i) rh.data[i] = r.data[i] * h.data[i];
    Tensor<T> ng = gru_wn_.forward(x, ks);
    ng.mat(ks, ds) += gru_rn_.forward(rh, ks).mat(ks, ds);
    for (auto& v : ng.data) v = std::tanh(v);
    Tensor<T> out({ks, ds});
    for (size_t i = 0; i < out.data.size(); ++i) {
      out.data[i] = (T(1) - z.data[i]) * ng.data[i] + z.data[i] * h.data[i];
    }
    step.gate_r = std::move(r);
    step.gate_z = std::move(z);
    step.gate_n = std::move(ng);
    step.rh = std::move(rh);
    return out;
  }

  void gated_backward(const AttnStep& step, const Tensor<T>& dout,
                      Tensor<T>& dx, Tensor<T>& dh) {
    const int ks = cfg_.num_slots(), ds = cfg_.slot_dim;
    const Tensor<T>& x = step.update;
    const Tensor<T>& h = step.slots_in;
    Tensor<T> dz({ks, ds}), dn({ks, ds});
    dx = Tensor<T>({ks, ds});
    dh = Tensor<T>({ks, ds});
    for (size_t i = 0; i < dout.data.size(); ++i) {
      dz.data[i] = dout.data[i] * (h.data[i] - step.gate_n.data[i]);
      dn.data[i] = dout.data[i] * (T(1) - step.gate_z.data[i]);
      dh.data[i] += dout.data[i] * step.gate_z.data[i];
    }
    Tensor<T> dn_pre({ks, ds}), dz_pre({ks, ds}), dr_pre({ks, ds});
    Tensor<T> drh({ks, ds});
    for (size_t i = 0; i < dn.data.size(); ++i) {
      dn_pre.data[i] = dn.data[i] * (T(1) - step.gate_n.data[i] * step.gate_n.data[i]);
      dz_pre.data[i] = dz.data[i] * step.gate_z.data[i] * (T(1) - step.gate_z.data[i]);
    }
    {
      Tensor<T> t = gru_wn_.backward(x, ks, dn_pre, gru_wn_grad_);
      dx.mat(ks, ds) += t.mat(ks, ds);
      Tensor<T> t2 = gru_rn_.backward(step.rh, ks, dn_pre, gru_rn_grad_);
      drh = t2;
    }
    Tensor<T> dr({ks, ds});
    for (size_t i = 0; i < drh.data.size(); ++i) {
      dr.data[i] = drh.data[i] * h.data[i];
      dh.data[i] += drh.data[i] * step.gate_r.data[i];
      dr_pre.data[i] = dr.data[i] * step.gate_r.data[i] * (T(1) - step.gate_r.data[i]);
    }
    {
      Tensor<T> t = gru_wz_.backward(x, ks, dz_pre, gru_wz_grad_);
      dx.mat(ks, ds) += t.mat(ks, ds);
      Tensor<T> t2 = gru_rz_.backward(h, ks, dz_pre, gru_rz_grad_);
      dh.mat(ks, ds) += t2.mat(ks, ds);
    }
    {
      Tensor<T> t = gru_wr_.backward(x, ks, dr_pre, gru_wr_grad_);
      dx.mat(ks, ds) += t.mat(ks, ds);
      Tensor<T> t2 = gru_rr_.backward(h, ks, dr_pre, gru_rr_grad_);
      dh.mat(ks, ds) += t2.mat(ks, ds);
    }
  }

  void classify_impl(Forward& fw) const {
    fw.probs = Tensor<T>({cfg_.num_classes()});
    std::vector<T> p = classify_slots(fw.slots_out);
    std::copy(p.begin(), p.end(), fw.probs.data.begin());
  }

  void ego_impl(Forward& fw) const {
    const int n = static_cast<int>(fw.features.size()) / cfg_.feat_dim();
    const int c = cfg_.feat_dim();
    fw.ego_mid = ego_conv_.forward(fw.features, n);
    fw.ego_feat = Tensor<T>({1, c});
    auto mean = fw.ego_feat.mat(1, c);
    mean.row(0) = fw.ego_mid.mat(n, c).colwise().mean();
    fw.ego_probs = ego_fc_.forward(fw.ego_feat, 1);
    softmax_rows(fw.ego_probs, 1, kNumEgoClasses);
  }

  // Runs the configured attention path. Expects fw.kmat/fw.vmat filled.
  void run_attention(Forward& fw, int n, std::optional<UpdateMode> mode_override =
                                             std::nullopt) const {
    UpdateMode mode = mode_override.value_or(cfg_.flags.update);
    if (mode == UpdateMode::kParallel) {
      Tensor<T> slots = slots_;
      for (int m = 0; m < cfg_.iterations; ++m) {
        fw.steps.push_back(attend(slots, fw, 0, n));
        fw.steps.back().slots_in = slots;
        slots = cfg_.flags.gated_recurrent ? gated_update(fw.steps.back())
                                           : fw.steps.back().update;
      }
      fw.attention = fw.steps.back().attn;
      fw.slots_out = slots;
    } else {
      const int hw = cfg_.feat_h() * cfg_.feat_w();
      Tensor<T> slots = slots_;
      fw.attention = Tensor<T>({n, cfg_.num_slots()});
      for (int t = 0; t < cfg_.clip_len; ++t) {
        fw.steps.push_back(attend(slots, fw, t * hw, hw));
        AttnStep& step = fw.steps.back();
        step.slots_in = slots;
        slots = cfg_.flags.gated_recurrent ? gated_update(step) : step.update;
        std::copy(step.attn.data.begin(), step.attn.data.end(),
                  fw.attention.data.begin() +
                      static_cast<size_t>(t) * hw * cfg_.num_slots());
      }
      fw.slots_out = slots;
    }
  }

  Forward attention_only(const Tensor<T>& tokens, UpdateMode mode) const {
    const int n = static_cast<int>(tokens.size()) / cfg_.feat_dim();
    if (n != cfg_.num_tokens()) {
      throw std::invalid_argument("token count does not match model config");
    }
    Forward fw;
    fw.tokens = tokens;
    fw.ln_tok = ln_tokens_.forward(fw.tokens, n, fw.ln_tok_cache);
    fw.kmat = wk_.forward(fw.ln_tok, n);
    fw.vmat = wv_.forward(fw.ln_tok, n);
    run_attention(fw, n, mode);
    return fw;
  }

  ModelConfig cfg_;
  std::array<Conv2d<T>, 4> conv_, conv_grad_;
  Tensor<T> pos_embed_, pos_embed_grad_;
  Tensor<T> slots_, slots_grad_;
  LayerNorm<T> ln_tokens_, ln_tokens_grad_, ln_slots_, ln_slots_grad_;
  Linear<T> wq_, wq_grad_, wk_, wk_grad_, wv_, wv_grad_;
  Tensor<T> classifier_w_, classifier_w_grad_;
  Tensor<T> classifier_b_, classifier_b_grad_;
  Linear<T> ego_conv_, ego_conv_grad_, ego_fc_, ego_fc_grad_;
  Linear<T> gru_wr_, gru_wz_, gru_wn_, gru_rr_, gru_rz_, gru_rn_;
  Linear<T> gru_wr_grad_, gru_wz_grad_, gru_wn_grad_, gru_rr_grad_,
      gru_rz_grad_, gru_rn_grad_;
};

}  // namespace actionslot
