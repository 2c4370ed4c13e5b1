#include "dsgp4kit/mlp.hpp"

#include <random>

namespace dsgp4kit {

namespace {

// Uniform in [-limit, limit) from raw 64-bit draws, identical on every
// standard library.
double uniform(std::mt19937_64& rng, double limit) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * limit;
}

}  // namespace

Mlp::Mlp(int inputs, std::vector<int> hidden, int outputs, std::uint64_t seed) {
  if (inputs < 1 || outputs < 1) throw Error(ErrorCode::InvalidArgument, "network needs inputs and outputs");
  sizes_.push_back(inputs);
  for (int h : hidden) {
    if (h < 1) throw Error(ErrorCode::InvalidArgument, "hidden layer width must be positive");
    sizes_.push_back(h);
  }
  sizes_.push_back(outputs);
  layout();
  std::mt19937_64 rng(seed);
  for (int l = 0; l + 1 < layers(); ++l) {
    const int nin = sizes_[static_cast<std::size_t>(l)];
    const int nout = sizes_[static_cast<std::size_t>(l) + 1];
    const double limit = std::sqrt(6.0 / (nin + nout));
    double* w = params_.data() + layer_offset(l);
    for (int k = 0; k < nin * nout; ++k) w[k] = uniform(rng, limit);
  }
}

Mlp::Mlp(std::vector<int> sizes, std::vector<double> params) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw Error(ErrorCode::InvalidArgument, "network needs at least two layer widths");
  layout();
  if (params.size() != params_.size()) throw Error(ErrorCode::ShapeMismatch, "parameter count does not match layer sizes");
  params_ = std::move(params);
}

void Mlp::layout() {
  offsets_.clear();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(n);
    n += static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]) + static_cast<std::size_t>(sizes_[l + 1]);
  }
  params_.assign(n, 0.0);
}

void Mlp::forward(std::span<const double> x, Tape& tape, std::span<double> y) const {
  if (static_cast<int>(x.size()) != inputs() || static_cast<int>(y.size()) != outputs()) {
    throw Error(ErrorCode::ShapeMismatch, "network input/output width mismatch");
  }
  tape.act.resize(sizes_.size());
  tape.act[0].assign(x.begin(), x.end());
  for (int l = 0; l < layers(); ++l) {
    const int nin = sizes_[static_cast<std::size_t>(l)];
    const int nout = sizes_[static_cast<std::size_t>(l) + 1];
    const double* w = params_.data() + layer_offset(l);
    const double* b = w + static_cast<std::size_t>(nin) * static_cast<std::size_t>(nout);
    const std::vector<double>& a = tape.act[static_cast<std::size_t>(l)];
    std::vector<double>& z = tape.act[static_cast<std::size_t>(l) + 1];
    z.resize(static_cast<std::size_t>(nout));
    for (int o = 0; o < nout; ++o) {
      double acc = b[o];
      const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(nin);
      for (int i = 0; i < nin; ++i) acc += row[i] * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = l + 1 < layers() ? std::tanh(acc) : acc;
    }
  }
  std::copy(tape.act.back().begin(), tape.act.back().end(), y.begin());
}

void Mlp::backward(const Tape& tape, std::span<const double> dy, std::span<double> grad, std::span<double> dx) const {
  if (grad.size() != params_.size()) throw Error(ErrorCode::ShapeMismatch, "gradient buffer size mismatch");
  std::vector<double> delta(dy.begin(), dy.end());  // dL/dz for the current layer
  for (int l = layers() - 1; l >= 0; --l) {
    const int nin = sizes_[static_cast<std::size_t>(l)];
    const int nout = sizes_[static_cast<std::size_t>(l) + 1];
    const std::size_t off = layer_offset(l);
    const double* w = params_.data() + off;
    double* gw = grad.data() + off;
    double* gb = gw + static_cast<std::size_t>(nin) * static_cast<std::size_t>(nout);
    const std::vector<double>& a = tape.act[static_cast<std::size_t>(l)];
    for (int o = 0; o < nout; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      gb[o] += d;
      double* grow = gw + static_cast<std::size_t>(o) * static_cast<std::size_t>(nin);
      for (int i = 0; i < nin; ++i) grow[i] += d * a[static_cast<std::size_t>(i)];
    }
    if (l == 0 && dx.empty()) break;
    std::vector<double> prev(static_cast<std::size_t>(nin), 0.0);
    for (int o = 0; o < nout; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(nin);
      for (int i = 0; i < nin; ++i) prev[static_cast<std::size_t>(i)] += row[i] * d;
    }
    if (l > 0) {
      // Through tanh of the previous layer: d tanh = 1 - a^2.
      for (int i = 0; i < nin; ++i) {
        const double ai = a[static_cast<std::size_t>(i)];
        prev[static_cast<std::size_t>(i)] *= 1.0 - ai * ai;
      }
    } else {
      std::copy(prev.begin(), prev.end(), dx.begin());
    }
    delta = std::move(prev);
  }
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw Error(ErrorCode::ShapeMismatch, "optimizer size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = b1_ * m_[k] + (1.0 - b1_) * grad[k];
    v_[k] = b2_ * v_[k] + (1.0 - b2_) * grad[k] * grad[k];
    const double mh = m_[k] / c1;
    const double vh = v_[k] / c2;
    params[k] -= lr_ * mh / (std::sqrt(vh) + eps_);
  }
}

void sgd_step(std::span<double> params, std::span<const double> grad, double lr) {
  for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k];
}

}  // namespace dsgp4kit
