#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "actionslot/labels.hpp"
#include "actionslot/tensor.hpp"

namespace actionslot {

// Log arguments are clamped to [kLossEps, 1 - kLossEps] so losses stay
// finite for attention entries of exactly 0 or 1.
inline constexpr double kLossEps = 1e-7;

struct LossWeights {
  double w_bg = 0.5;
  double w_neg = 1.0;
};

// Per-token background target aligned to the model's token grid: the image
// resolution mask is area-averaged over each block, thresholded at 0.5,
// and replicated across the subsampled frames.
template <typename T>
Tensor<T> background_target(const std::vector<uint8_t>& masks, int frames,
                            int image_h, int image_w, int grid_h, int grid_w) {
  if (image_h % grid_h != 0 || image_w % grid_w != 0) {
    throw std::invalid_argument("mask resolution not divisible by token grid");
  }
  const int bh = image_h / grid_h, bw = image_w / grid_w;
  Tensor<T> target({frames * grid_h * grid_w});
  for (int t = 0; t < frames; ++t) {
    const uint8_t* m = masks.data() + static_cast<size_t>(t) * image_h * image_w;
    for (int gy = 0; gy < grid_h; ++gy) {
      for (int gx = 0; gx < grid_w; ++gx) {
        int sum = 0;
        for (int y = gy * bh; y < (gy + 1) * bh; ++y) {
          for (int x = gx * bw; x < (gx + 1) * bw; ++x) {
            sum += m[static_cast<size_t>(y) * image_w + x];
          }
        }
        double mean = static_cast<double>(sum) / (bh * bw);
        target.data[(static_cast<size_t>(t) * grid_h + gy) * grid_w + gx] =
            mean >= 0.5 ? T(1) : T(0);
      }
    }
  }
  return target;
}

namespace detail {

template <typename T>
T bce_term(T p, T y, T* dp) {
  const T lo = static_cast<T>(kLossEps), hi = T(1) - static_cast<T>(kLossEps);
  T pc = p < lo ? lo : (p > hi ? hi : p);
  T loss = -(y * std::log(pc) + (T(1) - y) * std::log(T(1) - pc));
  if (dp) {
    // zero outside the clamp region: the clamp is part of the function
    *dp = (p > lo && p < hi) ? (-y / pc + (T(1) - y) / (T(1) - pc)) : T(0);
  }
  return loss;
}

}  // namespace detail

// Sum over classes of binary cross-entropy between per-class probabilities
// and the multi-hot label. Optionally fills d(loss)/d(probs).
template <typename T>
T loss_act(const std::vector<T>& probs, const MultiHotLabel& label,
           std::vector<T>* dprobs = nullptr) {
  if (probs.size() != label.size()) {
    throw std::invalid_argument("probability/label length mismatch");
  }
  if (dprobs) dprobs->assign(probs.size(), T(0));
  T total = 0;
  for (size_t c = 0; c < probs.size(); ++c) {
    T dp = 0;
    total += detail::bce_term(probs[c], static_cast<T>(label[c]),
                              dprobs ? &dp : nullptr);
    if (dprobs) (*dprobs)[c] = dp;
  }
  return total;
}

// Mean over tokens of BCE between the background-slot attention column and
// the background target.
template <typename T>
T loss_bg(const std::vector<T>& attention_bg, const Tensor<T>& target,
          std::vector<T>* dattn = nullptr) {
  if (attention_bg.size() != target.size()) {
    throw std::invalid_argument("background attention/target length mismatch");
  }
  if (attention_bg.empty()) {
    throw std::invalid_argument("loss_bg called with no background column");
  }
  const T inv_n = T(1) / static_cast<T>(attention_bg.size());
  if (dattn) dattn->assign(attention_bg.size(), T(0));
  T total = 0;
  for (size_t i = 0; i < attention_bg.size(); ++i) {
    T dp = 0;
    total += detail::bce_term(attention_bg[i], target.data[i],
                              dattn ? &dp : nullptr);
    if (dattn) (*dattn)[i] = dp * inv_n;
  }
  return total * inv_n;
}

// Sum over negative classes of the mean-over-tokens BCE of the class's
// attention column against the all-zero target. attention: [n, slots];
// only the first label.size() columns are action slots.
template <typename T>
T loss_neg(const Tensor<T>& attention, int n, int slots,
           const MultiHotLabel& label, Tensor<T>* dattn = nullptr) {
  if (static_cast<int>(label.size()) > slots) {
    throw std::invalid_argument("more classes than slots");
  }
  if (dattn && dattn->shape != std::vector<int>{n, slots}) {
    *dattn = Tensor<T>({n, slots});
  }
  const T inv_n = T(1) / static_cast<T>(n);
  T total = 0;
  for (size_t c = 0; c < label.size(); ++c) {
    if (label[c]) continue;
    T col = 0;
    for (int r = 0; r < n; ++r) {
      T dp = 0;
      col += detail::bce_term(attention.data[static_cast<size_t>(r) * slots + c],
                              T(0), dattn ? &dp : nullptr);
      if (dattn) {
        dattn->data[static_cast<size_t>(r) * slots + c] += dp * inv_n;
      }
    }
    total += col * inv_n;
  }
  return total;
}

// Categorical cross-entropy of the ego head.
template <typename T>
T loss_ego(const std::vector<T>& ego_probs, int ego_label,
           std::vector<T>* dprobs = nullptr) {
  if (ego_label < 0 || ego_label >= static_cast<int>(ego_probs.size())) {
    throw std::invalid_argument("ego label out of range");
  }
  const T lo = static_cast<T>(kLossEps);
  T p = ego_probs[ego_label];
  T pc = p < lo ? lo : p;
  if (dprobs) {
    dprobs->assign(ego_probs.size(), T(0));
    (*dprobs)[ego_label] = p > lo ? -T(1) / pc : T(0);
  }
  return -std::log(pc);
}

template <typename T>
struct LossBreakdown {
  T act = 0, bg = 0, neg = 0, ego = 0, total = 0;
};

// L_all = L_act + w_bg*L_bg + w_neg*L_neg, plus the ego term (weight 1)
// when an ego label is supplied. Disabled components contribute zero.
// Gradients are written into the optional outputs with weights applied.
template <typename T>
LossBreakdown<T> loss_total(const std::vector<T>& probs, const MultiHotLabel& label,
                            const Tensor<T>& attention, int n, int slots,
                            const Tensor<T>* bg_target, const LossWeights& weights,
                            const std::vector<T>* ego_probs, int ego_label,
                            std::vector<T>* dprobs = nullptr,
                            Tensor<T>* dattn = nullptr,
                            std::vector<T>* dego = nullptr) {
  if (weights.w_bg < 0 || weights.w_neg < 0) {
    throw std::invalid_argument("loss weights must be nonnegative");
  }
  LossBreakdown<T> out;
  out.act = loss_act(probs, label, dprobs);

  if (dattn) *dattn = Tensor<T>({n, slots});
  const bool has_bg = slots == static_cast<int>(label.size()) + 1;
  if (bg_target) {
    if (!has_bg) {
      throw std::invalid_argument("background loss requires the background slot");
    }
    std::vector<T> col(n);
    for (int r = 0; r < n; ++r) {
      col[r] = attention.data[static_cast<size_t>(r) * slots + (slots - 1)];
    }
    std::vector<T> dcol;
    out.bg = loss_bg(col, *bg_target, dattn ? &dcol : nullptr);
    if (dattn) {
      for (int r = 0; r < n; ++r) {
        dattn->data[static_cast<size_t>(r) * slots + (slots - 1)] =
            static_cast<T>(weights.w_bg) * dcol[r];
      }
    }
  }
  if (weights.w_neg > 0) {
    Tensor<T> dneg;
    out.neg = loss_neg(attention, n, slots, label, dattn ? &dneg : nullptr);
    if (dattn) {
      for (size_t i = 0; i < dattn->data.size(); ++i) {
        dattn->data[i] += static_cast<T>(weights.w_neg) * dneg.data[i];
      }
    }
  } else {
    out.neg = loss_neg<T>(attention, n, slots, label, nullptr);
  }

  if (ego_probs && ego_label >= 0) {
    out.ego = loss_ego(*ego_probs, ego_label, dego);
  }

  out.total = out.act + static_cast<T>(weights.w_bg) * out.bg +
              static_cast<T>(weights.w_neg) * out.neg + out.ego;
  return out;
}

}  // namespace actionslot
