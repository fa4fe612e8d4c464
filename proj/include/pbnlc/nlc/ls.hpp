#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/core/types.hpp"
#include "pbnlc/triplets/compute.hpp"

namespace pbnlc {

struct LsOptions {
  bool per_polarization = false;  // separate H and V coefficient tables
  bool use_cb = true;
  double condition_limit = 1e10;  // above this the normal equations are not trusted
  bool force_qr = false;
  std::size_t block_rows = 512;
};

struct LsFitReport {
  double residual_norm = 0.0;  // ||d - T c||
  double target_norm = 0.0;    // ||d||
  double orthogonality = 0.0;  // ||T^H (d - T c)|| / ||T^H d||
  double condition = 0.0;      // of the column-equilibrated normal matrix
  std::size_t training_symbols = 0;
  std::size_t rows = 0;
  std::size_t rank = 0;
  bool rank_deficient = false;
  std::string solver;
};

/// Streaming least-squares solver for min ||d - T c||. Rows are supplied by
/// a replayable source: source(emit) must call emit(const cd* row, cd target)
/// for every row, identically on every call. The normal matrix is built in
/// blocks and solved by Cholesky after column equilibration when it is well
/// conditioned; otherwise the rows are streamed again through a blocked
/// Householder QR and the minimum-norm solution of R c = Q^H d is taken by
/// complete orthogonal decomposition.
class StreamingLeastSquares {
 public:
  using Mat = Eigen::MatrixXcd;
  using Vec = Eigen::VectorXcd;

  StreamingLeastSquares(std::size_t n, const LsOptions& opt) : n_(n), opt_(opt) {
    if (n == 0) throw Error("least squares: no unknowns");
  }

  template <class Source>
  cvec solve(Source&& source, LsFitReport* report = nullptr) {
    const auto n = static_cast<Eigen::Index>(n_);
    Mat gram = Mat::Zero(n, n);
    Vec rhs = Vec::Zero(n);
    std::size_t rows = 0;
    double target_sq = 0.0;
    for_blocks(source, [&](const Mat& a, const Vec& y) {
      gram.selfadjointView<Eigen::Lower>().rankUpdate(a.adjoint());
      rhs.noalias() += a.adjoint() * y;
      rows += static_cast<std::size_t>(a.rows());
      target_sq += y.squaredNorm();
    });
    const Mat g = gram.selfadjointView<Eigen::Lower>();

    Eigen::VectorXd scale(n);
    bool zero_column = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = g(i, i).real();
      zero_column |= !(d > 0.0);
      scale(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
    }
    const Mat gs = scale.asDiagonal() * g * scale.asDiagonal();
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Mat>(gs, Eigen::EigenvaluesOnly).eigenvalues();
    const double cond = (zero_column || !(ev(0) > 0.0)) ? std::numeric_limits<double>::infinity() : ev(n - 1) / ev(0);

    Vec c;
    LsFitReport rep;
    rep.condition = cond;
    rep.rows = rows;
    rep.target_norm = std::sqrt(target_sq);
    if (!opt_.force_qr && cond < opt_.condition_limit) {
      const Vec z = gs.llt().solve(scale.asDiagonal() * rhs);
      c = scale.asDiagonal() * z;
      rep.solver = "normal-equations";
      rep.rank = n_;
    } else {
      Mat r = Mat::Zero(0, n);
      Vec qy = Vec::Zero(0);
      for_blocks(source, [&](const Mat& a, const Vec& y) {
        Mat stacked(r.rows() + a.rows(), n);
        stacked << r, a;
        Vec sy(qy.size() + y.size());
        sy << qy, y;
        Eigen::HouseholderQR<Mat> qr(stacked);
        const Eigen::Index keep = std::min<Eigen::Index>(n, stacked.rows());
        const Vec proj = qr.householderQ().adjoint() * sy;
        r = qr.matrixQR().topRows(keep).template triangularView<Eigen::Upper>();
        qy = proj.head(keep);
      });
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(r.rows(), r.cols());
      cod.setThreshold(1e-12);
      cod.compute(r);
      c = cod.solve(qy);
      rep.solver = "streaming-qr";
      rep.rank = static_cast<std::size_t>(cod.rank());
    }
    rep.rank_deficient = rep.rank < n_;

    // Residual pass.
    double res_sq = 0.0;
    Vec thr = Vec::Zero(n);
    for_blocks(source, [&](const Mat& a, const Vec& y) {
      const Vec e = y - a * c;
      res_sq += e.squaredNorm();
      thr.noalias() += a.adjoint() * e;
    });
    rep.residual_norm = std::sqrt(res_sq);
    const double rn = rhs.norm();
    rep.orthogonality = rn > 0.0 ? thr.norm() / rn : thr.norm();
    if (report) *report = rep;
    return cvec(c.data(), c.data() + c.size());
  }

 private:
  template <class Source, class Consumer>
  void for_blocks(Source& source, Consumer&& consume) {
    const auto n = static_cast<Eigen::Index>(n_);
    const auto b = static_cast<Eigen::Index>(opt_.block_rows);
    Mat a(b, n);
    Vec y(b);
    Eigen::Index fill = 0;
    source([&](const cd* row, cd target) {
      for (Eigen::Index j = 0; j < n; ++j) a(fill, j) = row[j];
      y(fill) = target;
      if (++fill == b) {
        consume(a, y);
        fill = 0;
      }
    });
    if (fill > 0) consume(Mat(a.topRows(fill)), Vec(y.head(fill)));
  }

  std::size_t n_;
  LsOptions opt_;
};

/// Least-squares perturbation coefficients from a training segment:
/// minimizes sum_k |d_k - sum c(m,n) t_{m,n}(k)|^2 with d = received - sent,
/// triplets from the received symbols, rows of both polarizations stacked.
/// The result absorbs all scaling.
inline CoefficientSet ls_fit(const SymbolSequence& received, const SymbolSequence& sent, SymbolRange train,
                             const TripletSet& set, const LsOptions& opt = {}, LsFitReport* report = nullptr) {
  if (sent.size() != received.size()) throw Error("ls_fit: received and sent sequences differ in length");
  const SymbolRange valid = triplet_valid_range(received.size(), set);
  if (train.begin < valid.begin || train.end > valid.end || train.size() == 0)
    throw Error("ls_fit: training range needs symbols outside the sequence");
  if (train.size() < 4 * set.size())
    throw Error("ls_fit: " + std::to_string(train.size()) + " training symbols for " + std::to_string(set.size()) +
                " coefficients; at least 4x are required");
  const auto make_source = [&](int pol_mask) {
    return [&, pol_mask](auto&& emit) {
      stream_triplets(received, train, set, opt.use_cb, [&](std::size_t k, const TripletFeatures& f) {
        if (pol_mask & 1) emit(f.h.data(), received.x_pol[k] - sent.x_pol[k]);
        if (pol_mask & 2) emit(f.v.data(), received.y_pol[k] - sent.y_pol[k]);
      });
    };
  };
  CoefficientSet out;
  out.set = set;
  out.scaling = CoefficientScaling::kAbsorbed;
  out.symbol_rate = received.symbol_rate;
  out.pulse_description = "least-squares fit";
  LsFitReport rep;
  if (!opt.per_polarization) {
    StreamingLeastSquares ls(set.size(), opt);
    out.values = ls.solve(make_source(3), &rep);
  } else {
    StreamingLeastSquares ls(set.size(), opt);
    LsFitReport rv;
    out.values = ls.solve(make_source(1), &rep);
    out.values_v = ls.solve(make_source(2), &rv);
    rep.residual_norm = std::hypot(rep.residual_norm, rv.residual_norm);
    rep.target_norm = std::hypot(rep.target_norm, rv.target_norm);
    rep.orthogonality = std::max(rep.orthogonality, rv.orthogonality);
    rep.condition = std::max(rep.condition, rv.condition);
    rep.rows += rv.rows;
    rep.rank = std::min(rep.rank, rv.rank);
    rep.rank_deficient = rep.rank_deficient || rv.rank_deficient;
  }
  rep.training_symbols = train.size();
  if (report) *report = rep;
  return out;
}

/// Least-squares objective sum |d - sum c t|^2 over `range` for given
/// effective coefficients (both polarizations).
inline double ls_objective(const SymbolSequence& received, const SymbolSequence& sent, SymbolRange range,
                           const TripletSet& set, const EffectiveCoefficients& c, bool use_cb = true) {
  double obj = 0.0;
  stream_triplets(received, range, set, use_cb, [&](std::size_t k, const TripletFeatures& f) {
    cd dh{0.0, 0.0};
    cd dv{0.0, 0.0};
    for (std::size_t i = 0; i < f.h.size(); ++i) {
      dh += c.h[i] * f.h[i];
      dv += c.v[i] * f.v[i];
    }
    obj += std::norm(received.x_pol[k] - sent.x_pol[k] - dh) + std::norm(received.y_pol[k] - sent.y_pol[k] - dv);
  });
  return obj;
}

}  // namespace pbnlc
