#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/core/types.hpp"
#include "pbnlc/triplets/compute.hpp"
#include "pbnlc/triplets/triplet_set.hpp"

namespace pbnlc {

/// Estimated distortion per symbol of the evaluated range; `phase` is
/// filled by the additive-multiplicative engines only.
struct DistortionEstimate {
  SymbolRange range;
  cvec h;
  cvec v;
  std::vector<double> phase_h;
  std::vector<double> phase_v;
};

struct NlcOptions {
  bool use_cb = true;
  SymbolRange range;  // empty: every symbol with a complete triplet window
};

/// K-means quantized coefficient table. assignment[i] is the cluster of
/// entry i, or -1 when the entry keeps its own value from `exact`.
struct QuantizedCoefficients {
  TripletSet set;
  cvec centroids;
  std::vector<int> assignment;
  cvec exact;
  CoefficientScaling scaling = CoefficientScaling::kAnalytic;
  double inertia = 0.0;
  int iterations = 0;
  std::string notice;

  std::size_t k() const { return centroids.size(); }

  void validate() const {
    if (assignment.size() != set.size()) throw Error("QuantizedCoefficients: assignment does not cover the index set");
    if (!exact.empty() && exact.size() != set.size()) throw Error("QuantizedCoefficients: exact table size mismatch");
    for (const int a : assignment) {
      if (a < -1 || a >= static_cast<int>(centroids.size()))
        throw Error("QuantizedCoefficients: assignment outside the centroid table");
      if (a == -1 && exact.empty()) throw Error("QuantizedCoefficients: unassigned entry without an exact value");
    }
  }

  /// Coefficient table with every entry replaced by its centroid.
  CoefficientSet dequantized() const {
    validate();
    CoefficientSet c;
    c.set = set;
    c.scaling = scaling;
    c.values.resize(set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
      c.values[i] = assignment[i] >= 0 ? centroids[static_cast<std::size_t>(assignment[i])] : exact[i];
    return c;
  }
};

namespace detail {

inline SymbolRange resolve_range(const SymbolSequence& s, const TripletSet& set, SymbolRange r) {
  const SymbolRange valid = triplet_valid_range(s.size(), set);
  if (r.size() == 0) return valid;
  if (r.begin < valid.begin || r.end > valid.end)
    throw Error("NLC: evaluation range [" + std::to_string(r.begin) + ", " + std::to_string(r.end) +
                ") needs symbols outside the sequence");
  return r;
}

inline void check_same_set(const TripletSet& a, const TripletSet& b) {
  if (!(a == b)) throw Error("NLC: coefficient and triplet index sets differ");
}

inline void init_estimate(DistortionEstimate* est, SymbolRange r, bool phase) {
  if (!est) return;
  est->range = r;
  est->h.assign(r.size(), cd{0.0, 0.0});
  est->v.assign(r.size(), cd{0.0, 0.0});
  est->phase_h.assign(phase ? r.size() : 0, 0.0);
  est->phase_v.assign(phase ? r.size() : 0, 0.0);
}

}  // namespace detail

/// Additive compensation: a_k - sum c(m,n) t_{m,n}(k) per polarization,
/// with c = j (8/9) gamma P_pol C for analytic sets and c = C for absorbed ones.
template <class Arith>
SymbolSequence conv_apply(const SymbolSequence& s, const TripletSet& set, const CoefficientSet& coeffs,
                          double nl_scale, const NlcOptions& opt, Arith& ar, DistortionEstimate* est = nullptr) {
  detail::check_same_set(set, coeffs.set);
  const EffectiveCoefficients c = effective_coefficients(coeffs, nl_scale);
  const SymbolRange r = detail::resolve_range(s, set, opt.range);
  detail::init_estimate(est, r, false);
  SymbolSequence out = s;
  stream_triplets(s, r, set, opt.use_cb, ar, [&](std::size_t k, const TripletFeatures& f) {
    cd dh{0.0, 0.0};
    cd dv{0.0, 0.0};
    for (std::size_t i = 0; i < f.h.size(); ++i) {
      dh += ar.mul(c.h[i], f.h[i]);
      dv += ar.mul(c.v[i], f.v[i]);
    }
    out.x_pol[k] = s.x_pol[k] - dh;
    out.y_pol[k] = s.y_pol[k] - dv;
    if (est) {
      est->h[k - r.begin] = dh;
      est->v[k - r.begin] = dv;
    }
  });
  return out;
}

inline SymbolSequence conv_apply(const SymbolSequence& s, const TripletSet& set, const CoefficientSet& coeffs,
                                 double nl_scale, const NlcOptions& opt = {}, DistortionEstimate* est = nullptr) {
  PlainArith ar;
  return conv_apply(s, set, coeffs, nl_scale, opt, ar, est);
}

/// Additive-multiplicative compensation. The degenerate entries (n = 0)
/// have triplets P_m a_k with P_m = |a_H,k+m|^2 + |a_V,k+m|^2 real, so
/// c(m,0) t_{m,0} = Re c P_m a_k + j Im c P_m a_k. The second part is a
/// first-order phase rotation and is applied as exp(-j theta) with
/// theta = sum_m Im c(m,0) P_m; everything else is subtracted:
///   a_k' = (a_k - sum_{n != 0} c t - sum_m Re c(m,0) t_{m,0}) exp(-j theta).
/// Per degenerate entry this costs 3 real multiplications, plus one complex
/// multiplication for the rotation; exp is taken from a table (not counted).
/// With `degenerate_empty` every entry is additive and the result equals
/// conv_apply exactly.
template <class Arith>
SymbolSequence conv_am_apply(const SymbolSequence& s, const TripletSet& set, const CoefficientSet& coeffs,
                             double nl_scale, const NlcOptions& opt, Arith& ar, DistortionEstimate* est = nullptr,
                             bool degenerate_empty = false) {
  if (degenerate_empty) return conv_apply(s, set, coeffs, nl_scale, opt, ar, est);
  detail::check_same_set(set, coeffs.set);
  const EffectiveCoefficients c = effective_coefficients(coeffs, nl_scale);
  const SymbolRange r = detail::resolve_range(s, set, opt.range);
  detail::init_estimate(est, r, true);
  std::vector<char> degenerate(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) degenerate[i] = set[i].n == 0;
  SymbolSequence out = s;
  stream_triplets(s, r, set, opt.use_cb, ar, [&](std::size_t k, const TripletFeatures& f) {
    cd dh{0.0, 0.0};
    cd dv{0.0, 0.0};
    double th = 0.0;
    double tv = 0.0;
    for (std::size_t i = 0; i < f.h.size(); ++i) {
      if (degenerate[i]) {
        const double p = f.pair[i].real();
        dh += c.h[i].real() * f.h[i];
        dv += c.v[i].real() * f.v[i];
        th += c.h[i].imag() * p;
        tv += c.v[i].imag() * p;
        ar.note_real_mults(6);
      } else {
        dh += ar.mul(c.h[i], f.h[i]);
        dv += ar.mul(c.v[i], f.v[i]);
      }
    }
    out.x_pol[k] = ar.mul(s.x_pol[k] - dh, std::polar(1.0, -th));
    out.y_pol[k] = ar.mul(s.y_pol[k] - dv, std::polar(1.0, -tv));
    if (est) {
      est->h[k - r.begin] = dh;
      est->v[k - r.begin] = dv;
      est->phase_h[k - r.begin] = th;
      est->phase_v[k - r.begin] = tv;
    }
  });
  return out;
}

inline SymbolSequence conv_am_apply(const SymbolSequence& s, const TripletSet& set, const CoefficientSet& coeffs,
                                    double nl_scale, const NlcOptions& opt = {}, DistortionEstimate* est = nullptr,
                                    bool degenerate_empty = false) {
  PlainArith ar;
  return conv_am_apply(s, set, coeffs, nl_scale, opt, ar, est, degenerate_empty);
}

/// Quantized compensation: per-cluster triplet sums (additions only), then
/// one complex multiplication per cluster. Entries without a cluster keep
/// their exact coefficient. In `am` mode degenerate entries must be
/// unassigned and are applied as in conv_am_apply.
template <class Arith>
SymbolSequence quantized_apply(const SymbolSequence& s, const TripletSet& set, const QuantizedCoefficients& q,
                               double nl_scale, const NlcOptions& opt, Arith& ar, bool am = false,
                               DistortionEstimate* est = nullptr) {
  q.validate();
  detail::check_same_set(set, q.set);
  const cd f = q.scaling == CoefficientScaling::kAnalytic ? cd{0.0, nl_scale} : cd{1.0, 0.0};
  cvec cent(q.k());
  for (std::size_t j = 0; j < q.k(); ++j) cent[j] = f * q.centroids[j];
  cvec own(set.size(), cd{0.0, 0.0});
  for (std::size_t i = 0; i < set.size(); ++i)
    if (q.assignment[i] < 0) own[i] = f * q.exact[i];
  if (am) {
    for (std::size_t i = 0; i < set.size(); ++i)
      if (set[i].n == 0 && q.assignment[i] >= 0)
        throw Error("quantized_apply: AM mode needs the degenerate entries excluded from clustering");
  }
  const SymbolRange r = detail::resolve_range(s, set, opt.range);
  detail::init_estimate(est, r, am);
  cvec sum_h(q.k());
  cvec sum_v(q.k());
  SymbolSequence out = s;
  stream_triplets(s, r, set, opt.use_cb, ar, [&](std::size_t k, const TripletFeatures& t) {
    std::fill(sum_h.begin(), sum_h.end(), cd{0.0, 0.0});
    std::fill(sum_v.begin(), sum_v.end(), cd{0.0, 0.0});
    cd dh{0.0, 0.0};
    cd dv{0.0, 0.0};
    double th = 0.0;
    for (std::size_t i = 0; i < t.h.size(); ++i) {
      const int a = q.assignment[i];
      if (a >= 0) {
        sum_h[static_cast<std::size_t>(a)] += t.h[i];
        sum_v[static_cast<std::size_t>(a)] += t.v[i];
      } else if (am && set[i].n == 0) {
        dh += own[i].real() * t.h[i];
        dv += own[i].real() * t.v[i];
        th += own[i].imag() * t.pair[i].real();
        ar.note_real_mults(6);
      } else {
        dh += ar.mul(own[i], t.h[i]);
        dv += ar.mul(own[i], t.v[i]);
      }
    }
    for (std::size_t j = 0; j < q.k(); ++j) {
      dh += ar.mul(cent[j], sum_h[j]);
      dv += ar.mul(cent[j], sum_v[j]);
    }
    if (am) {
      const cd rot = std::polar(1.0, -th);
      out.x_pol[k] = ar.mul(s.x_pol[k] - dh, rot);
      out.y_pol[k] = ar.mul(s.y_pol[k] - dv, rot);
    } else {
      out.x_pol[k] = s.x_pol[k] - dh;
      out.y_pol[k] = s.y_pol[k] - dv;
    }
    if (est) {
      est->h[k - r.begin] = dh;
      est->v[k - r.begin] = dv;
      if (am) {
        est->phase_h[k - r.begin] = th;
        est->phase_v[k - r.begin] = th;
      }
    }
  });
  return out;
}

inline SymbolSequence quantized_apply(const SymbolSequence& s, const TripletSet& set, const QuantizedCoefficients& q,
                                      double nl_scale, const NlcOptions& opt = {}, bool am = false,
                                      DistortionEstimate* est = nullptr) {
  PlainArith ar;
  return quantized_apply(s, set, q, nl_scale, opt, ar, am, est);
}

}  // namespace pbnlc
