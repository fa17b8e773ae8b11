#pragma once

#include <cmath>
#include <vector>

#include "actionslot/model.hpp"
#include "actionslot/tensor.hpp"

namespace actionslot {

// AdamW: adaptive moments with decoupled weight decay.
template <typename T>
class AdamW {
 public:
  AdamW(std::vector<typename ActionSlotModel<T>::ParamRef> params, double lr,
        double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8)
      : params_(std::move(params)),
        lr_(lr),
        wd_(weight_decay),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {
    for (const auto& p : params_) {
      m_.emplace_back(p.value->shape);
      v_.emplace_back(p.value->shape);
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
      Tensor<T>& w = *params_[i].value;
      const Tensor<T>& g = *params_[i].grad;
      Tensor<T>& m = m_[i];
      Tensor<T>& v = v_[i];
      for (size_t j = 0; j < w.data.size(); ++j) {
        double grad = g.data[j];
        double mj = beta1_ * m.data[j] + (1.0 - beta1_) * grad;
        double vj = beta2_ * v.data[j] + (1.0 - beta2_) * grad * grad;
        m.data[j] = static_cast<T>(mj);
        v.data[j] = static_cast<T>(vj);
        double mhat = mj / bc1, vhat = vj / bc2;
        double upd = mhat / (std::sqrt(vhat) + eps_) + wd_ * w.data[j];
        w.data[j] = static_cast<T>(w.data[j] - lr_ * upd);
      }
    }
  }

 private:
  std::vector<typename ActionSlotModel<T>::ParamRef> params_;
  double lr_, wd_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace actionslot
