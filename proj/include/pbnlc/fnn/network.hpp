#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pbnlc/core/types.hpp"

namespace pbnlc {

enum class Activation { kTanh, kRelu, kIdentity };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw Error("unknown activation '" + s + "'");
}

enum class FnnMode { kAdditive, kAm };

inline const char* to_string(FnnMode m) { return m == FnnMode::kAdditive ? "additive" : "am"; }

inline FnnMode fnn_mode_from_string(const std::string& s) {
  if (s == "additive") return FnnMode::kAdditive;
  if (s == "am") return FnnMode::kAm;
  throw Error("unknown FNN mode '" + s + "'");
}

struct FnnConfig {
  std::vector<int> hidden{16, 8};
  Activation activation = Activation::kTanh;
  FnnMode mode = FnnMode::kAdditive;
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 128;
  std::uint64_t rng_seed = 1;

  int output_width() const { return mode == FnnMode::kAdditive ? 2 : 3; }

  void validate() const {
    if (hidden.empty()) throw Error("FnnConfig: at least one hidden layer is required");
    for (const int w : hidden)
      if (w < 1) throw Error("FnnConfig: layer widths must be >= 1");
    if (!(learning_rate > 0.0)) throw Error("FnnConfig: learning rate must be positive");
    if (epochs < 1 || batch_size < 1) throw Error("FnnConfig: epochs and batch size must be >= 1");
  }
};

/// Dense feedforward network with per-weight prune masks and input
/// standardization. The output is scaled by `output_scale`: the additive
/// head predicts delta = s (y0 + j y1), the AM head also phi = s y2.
struct FnnModel {
  FnnConfig config;
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;
  std::vector<Eigen::MatrixXd> masks;  // 1 = active, 0 = pruned
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;
  double output_scale = 1.0;
  double loss_norm = 1.0;  // loss is divided by this (mean |d|^2 of the training targets)
  std::vector<double> train_history;
  std::vector<double> validation_history;

  int input_width() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int output_width() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }
  std::size_t layers() const { return weights.size(); }

  std::size_t total_weights() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    return n;
  }

  std::size_t active_weights() const {
    std::size_t n = 0;
    for (const auto& m : masks) n += static_cast<std::size_t>((m.array() != 0.0).count());
    return n;
  }

  double sparsity() const { return 1.0 - static_cast<double>(active_weights()) / static_cast<double>(total_weights()); }

  void apply_masks() {
    for (std::size_t l = 0; l < weights.size(); ++l) weights[l] = weights[l].cwiseProduct(masks[l]);
  }

  void validate() const {
    if (weights.size() != biases.size() || weights.size() != masks.size() || weights.empty())
      throw Error("FnnModel: inconsistent layer count");
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (biases[l].size() != weights[l].rows() || masks[l].rows() != weights[l].rows() ||
          masks[l].cols() != weights[l].cols())
        throw Error("FnnModel: inconsistent layer shapes");
      if (l > 0 && weights[l].cols() != weights[l - 1].rows()) throw Error("FnnModel: layer widths do not chain");
      if (!weights[l].allFinite() || !biases[l].allFinite()) throw Error("FnnModel: non-finite parameter");
      if (((masks[l].array() == 0.0) && (weights[l].array() != 0.0)).any())
        throw Error("FnnModel: masked weight is not zero");
    }
    if (input_mean.size() != input_width() || input_scale.size() != input_width())
      throw Error("FnnModel: standardization statistics do not match the input width");
  }
};

/// Glorot-uniform initialized network for `inputs` features.
inline FnnModel fnn_init(int inputs, const FnnConfig& cfg) {
  cfg.validate();
  if (inputs < 1) throw Error("fnn_init: input width must be >= 1");
  FnnModel m;
  m.config = cfg;
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<int> widths{inputs};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(cfg.output_width());
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    const double lim = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-lim, lim);
    Eigen::MatrixXd w(out, in);
    for (int j = 0; j < in; ++j)
      for (int i = 0; i < out; ++i) w(i, j) = u(rng);
    m.weights.push_back(w);
    m.biases.push_back(Eigen::VectorXd::Zero(out));
    m.masks.push_back(Eigen::MatrixXd::Ones(out, in));
  }
  m.input_mean = Eigen::VectorXd::Zero(inputs);
  m.input_scale = Eigen::VectorXd::Ones(inputs);
  return m;
}

namespace detail {

inline Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::kTanh: return z.array().tanh().matrix();
    case Activation::kRelu: return z.cwiseMax(0.0);
    case Activation::kIdentity: return z;
  }
  return z;
}

/// Derivative expressed through the activation output h (and input z for relu).
inline Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& h, Activation a) {
  switch (a) {
    case Activation::kTanh: return (1.0 - h.array().square()).matrix();
    case Activation::kRelu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kIdentity: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

}  // namespace detail

/// Forward pass on standardized inputs (one column per sample). Returns the
/// raw head outputs; `pre` and `post` receive per-layer pre- and
/// post-activation values when given.
inline Eigen::MatrixXd fnn_forward(const FnnModel& m, const Eigen::MatrixXd& x,
                                   std::vector<Eigen::MatrixXd>* pre = nullptr,
                                   std::vector<Eigen::MatrixXd>* post = nullptr) {
  Eigen::MatrixXd h = x;
  if (post) post->assign(1, x);
  if (pre) pre->clear();
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Eigen::MatrixXd z = m.weights[l] * h;
    z.colwise() += m.biases[l];
    if (pre) pre->push_back(z);
    h = l + 1 < m.weights.size() ? detail::activate(z, m.config.activation) : z;
    if (post) post->push_back(h);
  }
  return h;
}

/// Per-sample compensation loss |(r - delta) exp(-j phi) - s|^2 / loss_norm
/// and its gradient with respect to the raw head outputs.
inline double fnn_sample_loss(const FnnModel& m, const Eigen::Ref<const Eigen::VectorXd>& y, cd r, cd s,
                              Eigen::Ref<Eigen::VectorXd> dy) {
  const double sc = m.output_scale;
  const cd delta{sc * y(0), sc * y(1)};
  const bool am = y.size() == 3;
  const double phi = am ? sc * y(2) : 0.0;
  const cd rot = std::polar(1.0, -phi);
  const cd u = r - delta;
  const cd e = u * rot - s;
  const double inv = 1.0 / m.loss_norm;
  const cd ce = std::conj(e);
  dy(0) = inv * sc * -2.0 * (ce * rot).real();
  dy(1) = inv * sc * -2.0 * (ce * cd{0.0, 1.0} * rot).real();
  if (am) dy(2) = inv * sc * 2.0 * (ce * cd{0.0, -1.0} * u * rot).real();
  return inv * std::norm(e);
}

struct FnnGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean loss over the batch and its gradient (masked weights get zero gradient).
inline double fnn_loss_and_gradient(const FnnModel& m, const Eigen::MatrixXd& x, const cvec& r, const cvec& s,
                                    FnnGradients* g) {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> post;
  const Eigen::MatrixXd y = fnn_forward(m, x, &pre, &post);
  const auto batch = static_cast<double>(x.cols());
  Eigen::MatrixXd dy(y.rows(), y.cols());
  double loss = 0.0;
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    loss += fnn_sample_loss(m, y.col(c), r[static_cast<std::size_t>(c)], s[static_cast<std::size_t>(c)], dy.col(c));
  }
  loss /= batch;
  if (!g) return loss;
  dy /= batch;
  const std::size_t nl = m.weights.size();
  g->weights.resize(nl);
  g->biases.resize(nl);
  Eigen::MatrixXd delta = dy;
  for (std::size_t l = nl; l-- > 0;) {
    g->weights[l] = (delta * post[l].transpose()).cwiseProduct(m.masks[l]);
    g->biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = m.weights[l].transpose() * delta;
      delta = back.cwiseProduct(detail::activation_grad(pre[l - 1], post[l], m.config.activation));
    }
  }
  return loss;
}

/// Relative difference between the analytic gradient and central finite
/// differences with step h over every parameter:
/// ||g_analytic - g_fd|| / max(||g_analytic||, ||g_fd||).
inline double fnn_gradient_check(FnnModel m, const Eigen::MatrixXd& x, const cvec& r, const cvec& s, double h = 1e-4) {
  FnnGradients g;
  fnn_loss_and_gradient(m, x, r, s, &g);
  double diff = 0.0;
  double na = 0.0;
  double nf = 0.0;
  const auto probe = [&](double& p, double analytic) {
    const double keep = p;
    p = keep + h;
    const double lp = fnn_loss_and_gradient(m, x, r, s, nullptr);
    p = keep - h;
    const double lm = fnn_loss_and_gradient(m, x, r, s, nullptr);
    p = keep;
    const double fd = (lp - lm) / (2.0 * h);
    diff += (fd - analytic) * (fd - analytic);
    na += analytic * analytic;
    nf += fd * fd;
  };
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j)
      for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i)
        if (m.masks[l](i, j) != 0.0) probe(m.weights[l](i, j), g.weights[l](i, j));
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) probe(m.biases[l](i), g.biases[l](i));
  }
  const double denom = std::sqrt(std::max(na, nf));
  return denom > 0.0 ? std::sqrt(diff) / denom : std::sqrt(diff);
}

}  // namespace pbnlc
