#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dsgp4kit/error.hpp"

namespace dsgp4kit {

/// Fully connected network: tanh hidden layers, linear output layer. All
/// parameters live in one flat vector; layer l stores its weights row-major
/// [out][in] followed by its biases. The output layer starts at zero so a
/// fresh network maps every input to 0.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int inputs, std::vector<int> hidden, int outputs, std::uint64_t seed);
  /// Layer widths including input and output; parameters must match.
  Mlp(std::vector<int> sizes, std::vector<double> params);

  [[nodiscard]] const std::vector<int>& sizes() const { return sizes_; }
  [[nodiscard]] int inputs() const { return sizes_.empty() ? 0 : sizes_.front(); }
  [[nodiscard]] int outputs() const { return sizes_.empty() ? 0 : sizes_.back(); }
  [[nodiscard]] int layers() const { return static_cast<int>(sizes_.size()) - 1; }
  [[nodiscard]] std::size_t parameter_count() const { return params_.size(); }
  [[nodiscard]] std::span<double> parameters() { return params_; }
  [[nodiscard]] std::span<const double> parameters() const { return params_; }
  [[nodiscard]] bool empty() const { return sizes_.empty(); }

  /// Generic forward pass (double, long double). For T = double the result is
  /// bitwise equal to the taped pass.
  template <typename T>
  std::vector<T> forward(std::span<const T> x) const;

  /// Post-activation values per layer; act[0] is the input.
  struct Tape {
    std::vector<std::vector<double>> act;
  };
  void forward(std::span<const double> x, Tape& tape, std::span<double> y) const;

  /// Adds dL/dtheta into `grad` (size parameter_count) and writes dL/dx into
  /// `dx` when it is non-empty.
  void backward(const Tape& tape, std::span<const double> dy, std::span<double> grad, std::span<double> dx) const;

 private:
  void layout();
  [[nodiscard]] std::size_t layer_offset(int l) const { return offsets_[static_cast<std::size_t>(l)]; }

  std::vector<int> sizes_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

template <typename T>
std::vector<T> Mlp::forward(std::span<const T> x) const {
  using std::tanh;
  if (static_cast<int>(x.size()) != inputs()) throw Error(ErrorCode::ShapeMismatch, "network input width mismatch");
  std::vector<T> a(x.begin(), x.end());
  for (int l = 0; l < layers(); ++l) {
    const int nin = sizes_[static_cast<std::size_t>(l)];
    const int nout = sizes_[static_cast<std::size_t>(l) + 1];
    const double* w = params_.data() + layer_offset(l);
    const double* b = w + static_cast<std::size_t>(nin) * static_cast<std::size_t>(nout);
    std::vector<T> z(static_cast<std::size_t>(nout));
    for (int o = 0; o < nout; ++o) {
      T acc = T(b[o]);
      const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(nin);
      for (int i = 0; i < nin; ++i) acc += T(row[i]) * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = l + 1 < layers() ? T(tanh(acc)) : acc;
    }
    a = std::move(z);
  }
  return a;
}

/// Adam with the usual bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad);
  [[nodiscard]] long steps() const { return t_; }

 private:
  double lr_ = 3e-3;
  double b1_ = 0.9;
  double b2_ = 0.999;
  double eps_ = 1e-8;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

/// Plain gradient descent, theta -= lr * grad.
void sgd_step(std::span<double> params, std::span<const double> grad, double lr);

}  // namespace dsgp4kit
