#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "pbnlc/fnn/network.hpp"
#include "pbnlc/triplets/compute.hpp"

namespace pbnlc {

/// Training samples for the compensator: input features, the received
/// value r and the reference s. The loss drives (r - delta) exp(-j phi)
/// towards s.
class FnnDataset {
 public:
  virtual ~FnnDataset() = default;
  virtual std::size_t size() const = 0;
  virtual int input_width() const = 0;
  /// Writes the features of samples idx[0..count) as columns of x and their
  /// received/reference values.
  virtual void fill(const std::size_t* idx, std::size_t count, Eigen::MatrixXd& x, cvec& r, cvec& s) const = 0;
};

/// In-memory dataset (features as columns).
class DenseFnnDataset : public FnnDataset {
 public:
  DenseFnnDataset(Eigen::MatrixXd x, cvec r, cvec s) : x_(std::move(x)), r_(std::move(r)), s_(std::move(s)) {
    if (static_cast<std::size_t>(x_.cols()) != r_.size() || r_.size() != s_.size())
      throw Error("DenseFnnDataset: inconsistent sample counts");
  }
  std::size_t size() const override { return r_.size(); }
  int input_width() const override { return static_cast<int>(x_.rows()); }
  void fill(const std::size_t* idx, std::size_t count, Eigen::MatrixXd& x, cvec& r, cvec& s) const override {
    x.resize(x_.rows(), static_cast<Eigen::Index>(count));
    r.resize(count);
    s.resize(count);
    for (std::size_t c = 0; c < count; ++c) {
      x.col(static_cast<Eigen::Index>(c)) = x_.col(static_cast<Eigen::Index>(idx[c]));
      r[c] = r_[idx[c]];
      s[c] = s_[idx[c]];
    }
  }

 private:
  Eigen::MatrixXd x_;
  cvec r_;
  cvec s_;
};

/// Triplet features of a symbol range, computed on demand. Sample 2i is the
/// H output of symbol range.begin + i, sample 2i+1 the V output; features
/// are (Re t, Im t) interleaved in canonical index order.
class TripletFnnDataset : public FnnDataset {
 public:
  TripletFnnDataset(const SymbolSequence& received, const SymbolSequence& sent, SymbolRange range,
                    const TripletSet& set)
      : rx_(&received), tx_(&sent), range_(range), set_(&set) {
    const SymbolRange valid = triplet_valid_range(received.size(), set);
    if (range.begin < valid.begin || range.end > valid.end) throw Error("TripletFnnDataset: range outside the sequence");
    if (sent.size() != received.size()) throw Error("TripletFnnDataset: sequence length mismatch");
  }
  std::size_t size() const override { return 2 * range_.size(); }
  int input_width() const override { return 2 * static_cast<int>(set_->size()); }
  void fill(const std::size_t* idx, std::size_t count, Eigen::MatrixXd& x, cvec& r, cvec& s) const override {
    x.resize(input_width(), static_cast<Eigen::Index>(count));
    r.resize(count);
    s.resize(count);
    TripletFeatures f;
    PlainArith ar;
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t k = range_.begin + idx[c] / 2;
      const bool v = idx[c] % 2 == 1;
      compute_triplets_brute(*rx_, k, *set_, f, ar);
      write_features(v ? f.v : f.h, x.col(static_cast<Eigen::Index>(c)));
      r[c] = v ? rx_->y_pol[k] : rx_->x_pol[k];
      s[c] = v ? tx_->y_pol[k] : tx_->x_pol[k];
    }
  }

  static void write_features(const cvec& t, Eigen::Ref<Eigen::VectorXd> col) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      col(static_cast<Eigen::Index>(2 * i)) = t[i].real();
      col(static_cast<Eigen::Index>(2 * i + 1)) = t[i].imag();
    }
  }

 private:
  const SymbolSequence* rx_;
  const SymbolSequence* tx_;
  SymbolRange range_;
  const TripletSet* set_;
};

/// Training failure (non-finite loss); carries the last stable model.
class FnnDivergence : public Error {
 public:
  FnnDivergence(const std::string& what, FnnModel last) : Error(what), last_stable(std::move(last)) {}
  FnnModel last_stable;
};

namespace detail {

constexpr std::size_t kStatsBlock = 1024;

/// Per-feature mean and scale over the dataset, and mean |r - s|^2.
inline void dataset_statistics(const FnnDataset& data, Eigen::VectorXd& mean, Eigen::VectorXd& scale,
                               double& target_power) {
  const int w = data.input_width();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(w);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(w);
  target_power = 0.0;
  std::vector<std::size_t> idx;
  Eigen::MatrixXd x;
  cvec r;
  cvec s;
  for (std::size_t b = 0; b < data.size(); b += kStatsBlock) {
    const std::size_t n = std::min(kStatsBlock, data.size() - b);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), b);
    data.fill(idx.data(), n, x, r, s);
    sum += x.rowwise().sum();
    sq += x.array().square().matrix().rowwise().sum();
    for (std::size_t i = 0; i < n; ++i) target_power += std::norm(r[i] - s[i]);
  }
  const auto n = static_cast<double>(data.size());
  mean = sum / n;
  scale = ((sq / n).array() - mean.array().square()).max(0.0).sqrt().matrix();
  for (Eigen::Index i = 0; i < scale.size(); ++i)
    if (!(scale(i) > 0.0)) scale(i) = 1.0;
  target_power /= n;
}

inline void standardize(const FnnModel& m, Eigen::MatrixXd& x) {
  x.colwise() -= m.input_mean;
  x = m.input_scale.cwiseInverse().asDiagonal() * x;
}

inline double dataset_loss(const FnnModel& m, const FnnDataset& data) {
  double loss = 0.0;
  std::vector<std::size_t> idx;
  Eigen::MatrixXd x;
  cvec r;
  cvec s;
  for (std::size_t b = 0; b < data.size(); b += kStatsBlock) {
    const std::size_t n = std::min(kStatsBlock, data.size() - b);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), b);
    data.fill(idx.data(), n, x, r, s);
    standardize(m, x);
    loss += fnn_loss_and_gradient(m, x, r, s, nullptr) * static_cast<double>(n);
  }
  return loss / static_cast<double>(data.size());
}

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;

  explicit AdamState(const FnnModel& m) {
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
      mw.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
      vw.push_back(mw.back());
      mb.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
      vb.push_back(mb.back());
    }
  }
};

inline void adam_update(FnnModel& m, AdamState& st, const FnnGradients& g, double lr) {
  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  constexpr double eps = 1e-8;
  ++st.step;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    st.mw[l] = b1 * st.mw[l] + (1.0 - b1) * g.weights[l];
    st.vw[l] = b2 * st.vw[l] + (1.0 - b2) * g.weights[l].cwiseAbs2();
    m.weights[l].array() -= lr * (st.mw[l].array() / c1) / ((st.vw[l].array() / c2).sqrt() + eps);
    st.mb[l] = b1 * st.mb[l] + (1.0 - b1) * g.biases[l];
    st.vb[l] = b2 * st.vb[l] + (1.0 - b2) * g.biases[l].cwiseAbs2();
    m.biases[l].array() -= lr * (st.mb[l].array() / c1) / ((st.vb[l].array() / c2).sqrt() + eps);
  }
  m.apply_masks();
}

}  // namespace detail

/// Adam with cosine learning-rate decay from cfg.learning_rate to zero over
/// `epochs` epochs, starting from `model`. The model with the lowest
/// validation loss (evaluated after every epoch) is returned.
inline FnnModel fnn_fit(FnnModel model, const FnnDataset& train, const FnnDataset& validation, int epochs,
                        std::uint64_t shuffle_seed) {
  const auto& cfg = model.config;
  const std::size_t n = train.size();
  if (n == 0 || validation.size() == 0) throw Error("fnn_fit: empty training or validation set");
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t batches = (n + bs - 1) / bs;
  const double total_steps = static_cast<double>(batches) * epochs;
  std::mt19937_64 rng(shuffle_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  detail::AdamState adam(model);
  FnnModel best = model;
  double best_val = detail::dataset_loss(model, validation);
  FnnModel last_stable = model;
  Eigen::MatrixXd x;
  cvec r;
  cvec s;
  FnnGradients g;
  long step = 0;
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * bs;
      const std::size_t count = std::min(bs, n - begin);
      train.fill(order.data() + begin, count, x, r, s);
      detail::standardize(model, x);
      const double loss = fnn_loss_and_gradient(model, x, r, s, &g);
      if (!std::isfinite(loss))
        throw FnnDivergence("fnn_fit: non-finite loss at epoch " + std::to_string(e), last_stable);
      epoch_loss += loss * static_cast<double>(count);
      const double lr = cfg.learning_rate * 0.5 * (1.0 + std::cos(constants::kPi * static_cast<double>(step) / total_steps));
      detail::adam_update(model, adam, g, lr);
      ++step;
    }
    const double val = detail::dataset_loss(model, validation);
    if (!std::isfinite(val)) throw FnnDivergence("fnn_fit: non-finite validation loss at epoch " + std::to_string(e), last_stable);
    last_stable = model;
    model.train_history.push_back(epoch_loss / static_cast<double>(n));
    model.validation_history.push_back(val);
    if (val < best_val) {
      best_val = val;
      best = model;
    }
  }
  best.train_history = model.train_history;
  best.validation_history = model.validation_history;
  return best;
}

/// Fresh network trained on `train`; standardization statistics, output
/// scale and loss normalization come from the training set only.
inline FnnModel fnn_train(const FnnDataset& train, const FnnDataset& validation, const FnnConfig& cfg) {
  cfg.validate();
  if (validation.input_width() != train.input_width()) throw Error("fnn_train: feature width mismatch");
  FnnModel m = fnn_init(train.input_width(), cfg);
  double target_power = 0.0;
  detail::dataset_statistics(train, m.input_mean, m.input_scale, target_power);
  m.output_scale = target_power > 0.0 ? std::sqrt(target_power) : 1.0;
  m.loss_norm = target_power > 0.0 ? target_power : 1.0;
  return fnn_fit(std::move(m), train, validation, cfg.epochs, cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
}

struct PruneSchedule {
  double target_sparsity = 0.5;
  int rounds = 5;
  int fine_tune_epochs = 5;

  void validate() const {
    if (!(target_sparsity >= 0.0 && target_sparsity < 1.0)) throw Error("PruneSchedule: target sparsity in [0, 1)");
    if (rounds < 1) throw Error("PruneSchedule: rounds must be >= 1");
    if (fine_tune_epochs < 0) throw Error("PruneSchedule: fine_tune_epochs must be >= 0");
  }

  /// Active weights after round r (1-based): ceil(total (1 - s)^(r / rounds)).
  std::size_t keep_after_round(std::size_t total, int r) const {
    const double frac = std::pow(1.0 - target_sparsity, static_cast<double>(r) / rounds);
    return static_cast<std::size_t>(std::ceil(static_cast<double>(total) * frac - 1e-9));
  }
};

/// Keeps the `keep` largest-magnitude active weights across all layers;
/// ties are broken by layer, column and row order.
inline void prune_to(FnnModel& m, std::size_t keep) {
  struct Entry {
    double mag;
    std::size_t layer;
    Eigen::Index i, j;
  };
  std::vector<Entry> active;
  for (std::size_t l = 0; l < m.weights.size(); ++l)
    for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j)
      for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i)
        if (m.masks[l](i, j) != 0.0) active.push_back({std::abs(m.weights[l](i, j)), l, i, j});
  if (keep >= active.size()) return;
  std::stable_sort(active.begin(), active.end(), [](const Entry& a, const Entry& b) { return a.mag > b.mag; });
  for (std::size_t e = keep; e < active.size(); ++e) m.masks[active[e].layer](active[e].i, active[e].j) = 0.0;
  m.apply_masks();
  for (std::size_t l = 0; l < m.masks.size(); ++l)
    if ((m.masks[l].array() != 0.0).count() == 0)
      throw Error("fnn_prune: layer " + std::to_string(l) + " has no remaining weights");
}

/// Gradual magnitude pruning: in every round the smallest active weights
/// are masked (global ranking) down to the geometric schedule, the learning
/// rate schedule and optimizer state are rewound to their start, and the
/// network is fine-tuned with the mask enforced.
inline FnnModel fnn_prune(FnnModel model, const PruneSchedule& schedule, const FnnDataset& train,
                          const FnnDataset& validation) {
  schedule.validate();
  model.validate();
  if (schedule.target_sparsity == 0.0) return model;
  const std::size_t total = model.total_weights();
  for (int r = 1; r <= schedule.rounds; ++r) {
    prune_to(model, schedule.keep_after_round(total, r));
    if (schedule.fine_tune_epochs > 0) {
      const std::uint64_t seed = model.config.rng_seed + static_cast<std::uint64_t>(r);
      model = fnn_fit(std::move(model), train, validation, schedule.fine_tune_epochs, seed);
    }
  }
  return model;
}

}  // namespace pbnlc
