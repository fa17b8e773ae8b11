#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "actionslot/rng.hpp"
#include "actionslot/tensor.hpp"

namespace actionslot {

// He-style uniform init in [-sqrt(6/fan_in), +sqrt(6/fan_in)].
template <typename T>
void init_uniform(Tensor<T>& w, int fan_in, Rng& rng) {
  double bound = std::sqrt(6.0 / std::max(1, fan_in));
  for (auto& v : w.data) v = static_cast<T>(rng.uniform_real(-bound, bound));
}

template <typename T>
void init_normal(Tensor<T>& w, double sigma, Rng& rng) {
  for (auto& v : w.data) v = static_cast<T>(rng.normal() * sigma);
}

// 2D convolution over a stack of frames, NHWC layout, square kernel,
// zero padding. Forward/backward via im2col + GEMM.
template <typename T>
struct Conv2d {
  int in_c = 0, out_c = 0, ksize = 3, stride = 1, pad = 1;
  Tensor<T> weight;  // [ksize*ksize*in_c, out_c], (ky, kx, c) row order
  Tensor<T> bias;    // [out_c]

  void configure(int in_channels, int out_channels, int k, int s, Rng& rng) {
    in_c = in_channels;
    out_c = out_channels;
    ksize = k;
    stride = s;
    pad = k / 2;
    weight = Tensor<T>({k * k * in_c, out_c});
    bias = Tensor<T>({out_c});
    init_uniform(weight, k * k * in_c, rng);
  }

  Conv2d grad_twin() const {
    Conv2d g = *this;
    g.weight.fill(T(0));
    g.bias.fill(T(0));
    return g;
  }

  struct Cache {
    int frames = 0, in_h = 0, in_w = 0, out_h = 0, out_w = 0;
    Tensor<T> cols;  // [frames*out_h*out_w, ksize*ksize*in_c]
  };

  int out_extent(int in) const { return (in + 2 * pad - ksize) / stride + 1; }

  // x: [frames, in_h, in_w, in_c] flat. Returns [frames, out_h, out_w, out_c].
  Tensor<T> forward(const Tensor<T>& x, int frames, int in_h, int in_w,
                    Cache& cache) const {
    const int oh = out_extent(in_h), ow = out_extent(in_w);
    const int rows = frames * oh * ow, patch = ksize * ksize * in_c;
    cache.frames = frames;
    cache.in_h = in_h;
    cache.in_w = in_w;
    cache.out_h = oh;
    cache.out_w = ow;
    if (cache.cols.shape != std::vector<int>{rows, patch}) {
      cache.cols = Tensor<T>({rows, patch});
    }

    T* cols = cache.cols.ptr();
    const T* in = x.ptr();
    for (int f = 0; f < frames; ++f) {
      const T* frame = in + static_cast<size_t>(f) * in_h * in_w * in_c;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          T* row = cols + (static_cast<size_t>(f) * oh * ow +
                           static_cast<size_t>(oy) * ow + ox) * patch;
          int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
          for (int ky = 0; ky < ksize; ++ky) {
            int iy = iy0 + ky;
            T* dst = row + static_cast<size_t>(ky) * ksize * in_c;
            if (iy < 0 || iy >= in_h) {
              std::fill(dst, dst + ksize * in_c, T(0));
              continue;
            }
            for (int kx = 0; kx < ksize; ++kx) {
              int ix = ix0 + kx;
              if (ix < 0 || ix >= in_w) {
                std::fill(dst + kx * in_c, dst + (kx + 1) * in_c, T(0));
              } else {
                const T* src = frame + (static_cast<size_t>(iy) * in_w + ix) * in_c;
                std::copy(src, src + in_c, dst + kx * in_c);
              }
            }
          }
        }
      }
    }

    Tensor<T> out({frames, oh, ow, out_c});
    auto o = out.mat(rows, out_c);
    o.noalias() = cache.cols.mat(rows, patch) * weight.mat(patch, out_c);
    o.rowwise() += bias.mat(1, out_c).row(0);
    return out;
  }

  // Returns grad wrt x; accumulates weight/bias grads into `grad`.
  Tensor<T> backward(const Tensor<T>& dout, const Cache& cache,
                     Conv2d& grad) const {
    const int rows = cache.frames * cache.out_h * cache.out_w;
    const int patch = ksize * ksize * in_c;
    auto dmat = dout.mat(rows, out_c);

    grad.weight.mat(patch, out_c).noalias() +=
        cache.cols.mat(rows, patch).transpose() * dmat;
    grad.bias.mat(1, out_c).row(0) += dmat.colwise().sum();

    Tensor<T> dcols({rows, patch});
    dcols.mat(rows, patch).noalias() = dmat * weight.mat(patch, out_c).transpose();

    Tensor<T> dx({cache.frames, cache.in_h, cache.in_w, in_c});
    T* dxp = dx.ptr();
    const T* dc = dcols.ptr();
    for (int f = 0; f < cache.frames; ++f) {
      T* dframe = dxp + static_cast<size_t>(f) * cache.in_h * cache.in_w * in_c;
      for (int oy = 0; oy < cache.out_h; ++oy) {
        for (int ox = 0; ox < cache.out_w; ++ox) {
          const T* row = dc + (static_cast<size_t>(f) * cache.out_h * cache.out_w +
                               static_cast<size_t>(oy) * cache.out_w + ox) * patch;
          int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
          for (int ky = 0; ky < ksize; ++ky) {
            int iy = iy0 + ky;
            if (iy < 0 || iy >= cache.in_h) continue;
            for (int kx = 0; kx < ksize; ++kx) {
              int ix = ix0 + kx;
              if (ix < 0 || ix >= cache.in_w) continue;
              T* dst = dframe + (static_cast<size_t>(iy) * cache.in_w + ix) * in_c;
              const T* src = row + (static_cast<size_t>(ky) * ksize + kx) * in_c;
              for (int c = 0; c < in_c; ++c) dst[c] += src[c];
            }
          }
        }
      }
    }
    return dx;
  }
};

template <typename T>
struct Linear {
  int in_dim = 0, out_dim = 0;
  Tensor<T> weight;  // [in, out]
  Tensor<T> bias;    // [out]

  void configure(int in, int out, Rng& rng) {
    in_dim = in;
    out_dim = out;
    weight = Tensor<T>({in, out});
    bias = Tensor<T>({out});
    init_uniform(weight, in, rng);
  }

  Linear grad_twin() const {
    Linear g = *this;
    g.weight.fill(T(0));
    g.bias.fill(T(0));
    return g;
  }

  // x: [n, in] → [n, out]
  Tensor<T> forward(const Tensor<T>& x, int n) const {
    Tensor<T> out({n, out_dim});
    auto o = out.mat(n, out_dim);
    o.noalias() = x.mat(n, in_dim) * weight.mat(in_dim, out_dim);
    o.rowwise() += bias.mat(1, out_dim).row(0);
    return out;
  }

  Tensor<T> backward(const Tensor<T>& x, int n, const Tensor<T>& dout,
                     Linear& grad) const {
    auto dmat = dout.mat(n, out_dim);
    grad.weight.mat(in_dim, out_dim).noalias() +=
        x.mat(n, in_dim).transpose() * dmat;
    grad.bias.mat(1, out_dim).row(0) += dmat.colwise().sum();
    Tensor<T> dx({n, in_dim});
    dx.mat(n, in_dim).noalias() = dmat * weight.mat(in_dim, out_dim).transpose();
    return dx;
  }
};

// Layer normalization over the last dimension with learnable gain/bias.
template <typename T>
struct LayerNorm {
  int dim = 0;
  T eps = T(1e-5);
  Tensor<T> gain, bias;

  void configure(int d) {
    dim = d;
    gain = Tensor<T>({d}, T(1));
    bias = Tensor<T>({d}, T(0));
  }

  LayerNorm grad_twin() const {
    LayerNorm g = *this;
    g.gain.fill(T(0));
    g.bias.fill(T(0));
    return g;
  }

  struct Cache {
    Tensor<T> xhat;          // [n, dim]
    std::vector<T> inv_std;  // [n]
  };

  Tensor<T> forward(const Tensor<T>& x, int n, Cache& cache) const {
    cache.xhat = Tensor<T>({n, dim});
    cache.inv_std.assign(n, T(0));
    Tensor<T> out({n, dim});
    const T* in = x.ptr();
    T* xh = cache.xhat.ptr();
    T* o = out.ptr();
    for (int r = 0; r < n; ++r) {
      const T* row = in + static_cast<size_t>(r) * dim;
      T mean = 0;
      for (int c = 0; c < dim; ++c) mean += row[c];
      mean /= dim;
      T var = 0;
      for (int c = 0; c < dim; ++c) var += (row[c] - mean) * (row[c] - mean);
      var /= dim;
      T istd = T(1) / std::sqrt(var + eps);
      cache.inv_std[r] = istd;
      for (int c = 0; c < dim; ++c) {
        T v = (row[c] - mean) * istd;
        xh[static_cast<size_t>(r) * dim + c] = v;
        o[static_cast<size_t>(r) * dim + c] = v * gain.data[c] + bias.data[c];
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& dout, int n, const Cache& cache,
                     LayerNorm& grad) const {
    Tensor<T> dx({n, dim});
    const T* dy = dout.ptr();
    const T* xh = cache.xhat.ptr();
    T* dxp = dx.ptr();
    for (int r = 0; r < n; ++r) {
      const T* dyr = dy + static_cast<size_t>(r) * dim;
      const T* xhr = xh + static_cast<size_t>(r) * dim;
      T sum_dxhat = 0, sum_dxhat_xhat = 0;
      for (int c = 0; c < dim; ++c) {
        grad.bias.data[c] += dyr[c];
        grad.gain.data[c] += dyr[c] * xhr[c];
        T dxhat = dyr[c] * gain.data[c];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhr[c];
      }
      T istd = cache.inv_std[r];
      for (int c = 0; c < dim; ++c) {
        T dxhat = dyr[c] * gain.data[c];
        dxp[static_cast<size_t>(r) * dim + c] =
            istd * (dxhat - sum_dxhat / dim - xhr[c] * sum_dxhat_xhat / dim);
      }
    }
    return dx;
  }
};

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (auto& v : x.data) v = v > T(0) ? v : T(0);
}

// dz = dout where act > 0 (act is the post-relu activation).
template <typename T>
void relu_backward_inplace(Tensor<T>& dout, const Tensor<T>& act) {
  for (size_t i = 0; i < dout.data.size(); ++i) {
    if (act.data[i] <= T(0)) dout.data[i] = T(0);
  }
}

template <typename T>
T sigmoid(T x) {
  return x >= T(0) ? T(1) / (T(1) + std::exp(-x))
                   : std::exp(x) / (T(1) + std::exp(x));
}

// Row-wise softmax of a [rows, cols] tensor, in place.
template <typename T>
void softmax_rows(Tensor<T>& x, int rows, int cols) {
  T* p = x.ptr();
  for (int r = 0; r < rows; ++r) {
    T* row = p + static_cast<size_t>(r) * cols;
    T mx = row[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    T sum = 0;
    for (int c = 0; c < cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (int c = 0; c < cols; ++c) row[c] /= sum;
  }
}

// Column-wise softmax of a [rows, cols] tensor, in place.
template <typename T>
void softmax_cols(Tensor<T>& x, int rows, int cols) {
  T* p = x.ptr();
  for (int c = 0; c < cols; ++c) {
    T mx = p[c];
    for (int r = 1; r < rows; ++r) {
      mx = std::max(mx, p[static_cast<size_t>(r) * cols + c]);
    }
    T sum = 0;
    for (int r = 0; r < rows; ++r) {
      T& v = p[static_cast<size_t>(r) * cols + c];
      v = std::exp(v - mx);
      sum += v;
    }
    for (int r = 0; r < rows; ++r) p[static_cast<size_t>(r) * cols + c] /= sum;
  }
}

// Backward through row-wise softmax: dlogits = y ⊙ (dy − rowsum(dy ⊙ y)).
template <typename T>
Tensor<T> softmax_rows_backward(const Tensor<T>& y, const Tensor<T>& dy,
                                int rows, int cols) {
  Tensor<T> dx({rows, cols});
  const T* yp = y.ptr();
  const T* dyp = dy.ptr();
  T* dxp = dx.ptr();
  for (int r = 0; r < rows; ++r) {
    size_t off = static_cast<size_t>(r) * cols;
    T dot = 0;
    for (int c = 0; c < cols; ++c) dot += dyp[off + c] * yp[off + c];
    for (int c = 0; c < cols; ++c) {
      dxp[off + c] = yp[off + c] * (dyp[off + c] - dot);
    }
  }
  return dx;
}

template <typename T>
Tensor<T> softmax_cols_backward(const Tensor<T>& y, const Tensor<T>& dy,
                                int rows, int cols) {
  Tensor<T> dx({rows, cols});
  const T* yp = y.ptr();
  const T* dyp = dy.ptr();
  T* dxp = dx.ptr();
  for (int c = 0; c < cols; ++c) {
    T dot = 0;
    for (int r = 0; r < rows; ++r) {
      size_t i = static_cast<size_t>(r) * cols + c;
      dot += dyp[i] * yp[i];
    }
    for (int r = 0; r < rows; ++r) {
      size_t i = static_cast<size_t>(r) * cols + c;
      dxp[i] = yp[i] * (dyp[i] - dot);
    }
  }
  return dx;
}

}  // namespace actionslot
