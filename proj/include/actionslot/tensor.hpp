#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace actionslot {

// Dense row-major tensor over a flat buffer. Heavy math goes through Eigen
// maps on the buffer; this type only owns storage and shape.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(count(shape), T(0));
  }
  Tensor(std::vector<int> s, T fill) : shape(std::move(s)) {
    data.assign(count(shape), fill);
  }

  static size_t count(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("negative tensor extent");
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  size_t size() const { return data.size(); }
  int dim(int i) const { return shape.at(i); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  // 2D views; rows*cols must equal size().
  using MatrixMap =
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstMatrixMap = Eigen::Map<
      const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  MatrixMap mat(int rows, int cols) {
    if (static_cast<size_t>(rows) * cols != size()) {
      throw std::invalid_argument("tensor view shape mismatch");
    }
    return MatrixMap(data.data(), rows, cols);
  }
  ConstMatrixMap mat(int rows, int cols) const {
    if (static_cast<size_t>(rows) * cols != size()) {
      throw std::invalid_argument("tensor view shape mismatch");
    }
    return ConstMatrixMap(data.data(), rows, cols);
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

}  // namespace actionslot
