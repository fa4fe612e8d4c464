#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "pbnlc/fnn/network.hpp"
#include "pbnlc/nlc/engines.hpp"
#include "pbnlc/triplets/compute.hpp"

namespace pbnlc {

/// Inference form of a model: input standardization folded into the first
/// layer, output scale folded into the last, and only active weights stored
/// (row-wise), so one real multiplication is spent per active weight.
class FoldedFnn {
 public:
  explicit FoldedFnn(const FnnModel& m) : activation_(m.config.activation) {
    m.validate();
    const std::size_t nl = m.weights.size();
    for (std::size_t l = 0; l < nl; ++l) {
      Eigen::MatrixXd w = m.weights[l];
      Eigen::VectorXd b = m.biases[l];
      if (l == 0) {
        w = w * m.input_scale.cwiseInverse().asDiagonal();
        b -= w * m.input_mean;
      }
      if (l + 1 == nl) {
        w *= m.output_scale;
        b *= m.output_scale;
      }
      Layer layer;
      layer.bias.assign(b.data(), b.data() + b.size());
      layer.row_start.push_back(0);
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
          if (m.masks[l](i, j) == 0.0) continue;
          layer.col.push_back(static_cast<int>(j));
          layer.value.push_back(w(i, j));
        }
        layer.row_start.push_back(layer.col.size());
      }
      layers_.push_back(std::move(layer));
    }
    inputs_ = m.input_width();
  }

  int input_width() const { return inputs_; }
  int output_width() const { return static_cast<int>(layers_.back().bias.size()); }

  std::size_t mults_per_evaluation() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.value.size();
    return n;
  }

  /// Forward pass; `mults` is incremented by the real multiplications spent.
  void evaluate(const double* x, std::vector<double>& out, std::uint64_t* mults = nullptr) const {
    std::vector<double> cur(x, x + inputs_);
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& layer = layers_[l];
      next.assign(layer.bias.begin(), layer.bias.end());
      for (std::size_t i = 0; i < next.size(); ++i) {
        double z = next[i];
        for (std::size_t p = layer.row_start[i]; p < layer.row_start[i + 1]; ++p)
          z += layer.value[p] * cur[static_cast<std::size_t>(layer.col[p])];
        next[i] = l + 1 < layers_.size() ? activate(z) : z;
      }
      if (mults) *mults += layer.value.size();
      cur.swap(next);
    }
    out = std::move(cur);
  }

 private:
  struct Layer {
    std::vector<double> bias;
    std::vector<std::size_t> row_start;
    std::vector<int> col;
    std::vector<double> value;
  };

  double activate(double z) const {
    switch (activation_) {
      case Activation::kTanh: return std::tanh(z);
      case Activation::kRelu: return z > 0.0 ? z : 0.0;
      case Activation::kIdentity: return z;
    }
    return z;
  }

  Activation activation_;
  int inputs_ = 0;
  std::vector<Layer> layers_;
};

/// Real multiplications per symbol and polarization of the network stage:
/// one per active weight (activations from a table, standardization and
/// output scale folded into the weights).
inline std::size_t fnn_mult_count(const FnnModel& m) { return m.active_weights(); }

/// Compensation with a trained network: additive a - delta, or
/// (a - delta) exp(-j phi) in AM mode. In additive mode the phase head of an
/// AM model is ignored.
template <class Arith>
SymbolSequence fnn_apply(const SymbolSequence& s, const FnnModel& model, const TripletSet& set, FnnMode mode,
                         const NlcOptions& opt, Arith& ar, DistortionEstimate* est = nullptr) {
  const FoldedFnn net(model);
  if (net.input_width() != 2 * static_cast<int>(set.size()))
    throw Error("fnn_apply: model input width " + std::to_string(net.input_width()) + " does not match 2 x " +
                std::to_string(set.size()) + " triplets");
  if (mode == FnnMode::kAm && net.output_width() < 3) throw Error("fnn_apply: AM mode needs a phase output");
  const SymbolRange r = detail::resolve_range(s, set, opt.range);
  detail::init_estimate(est, r, mode == FnnMode::kAm);
  SymbolSequence out = s;
  std::vector<double> feat(static_cast<std::size_t>(net.input_width()));
  std::vector<double> y;
  std::uint64_t mults = 0;
  const auto one = [&](const cvec& t, cd a, cd& delta, double& phi) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      feat[2 * i] = t[i].real();
      feat[2 * i + 1] = t[i].imag();
    }
    net.evaluate(feat.data(), y, &mults);
    delta = {y[0], y[1]};
    phi = mode == FnnMode::kAm ? y[2] : 0.0;
    return mode == FnnMode::kAm ? ar.mul(a - delta, std::polar(1.0, -phi)) : a - delta;
  };
  stream_triplets(s, r, set, opt.use_cb, ar, [&](std::size_t k, const TripletFeatures& f) {
    cd dh;
    cd dv;
    double ph = 0.0;
    double pv = 0.0;
    out.x_pol[k] = one(f.h, s.x_pol[k], dh, ph);
    out.y_pol[k] = one(f.v, s.y_pol[k], dv, pv);
    if (est) {
      est->h[k - r.begin] = dh;
      est->v[k - r.begin] = dv;
      if (mode == FnnMode::kAm) {
        est->phase_h[k - r.begin] = ph;
        est->phase_v[k - r.begin] = pv;
      }
    }
  });
  ar.note_real_mults(mults);
  return out;
}

inline SymbolSequence fnn_apply(const SymbolSequence& s, const FnnModel& model, const TripletSet& set, FnnMode mode,
                                const NlcOptions& opt = {}, DistortionEstimate* est = nullptr) {
  PlainArith ar;
  return fnn_apply(s, model, set, mode, opt, ar, est);
}

}  // namespace pbnlc
