#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/core/hash.hpp"
#include "pbnlc/core/types.hpp"
#include "pbnlc/triplets/triplet_set.hpp"

namespace pbnlc {

/// How the stored values relate to the distortion estimate.
///  kAnalytic: delta = j * (8/9) gamma * P_pol * sum C t (C in metres, power-independent).
///  kAbsorbed: delta = sum C t (all scaling learned, e.g. by least squares).
enum class CoefficientScaling { kAnalytic, kAbsorbed };

inline const char* to_string(CoefficientScaling s) { return s == CoefficientScaling::kAnalytic ? "analytic" : "absorbed"; }

inline CoefficientScaling scaling_from_string(const std::string& s) {
  if (s == "analytic") return CoefficientScaling::kAnalytic;
  if (s == "absorbed") return CoefficientScaling::kAbsorbed;
  throw Error("unknown coefficient scaling '" + s + "'");
}

/// Perturbation coefficients C(m,n) aligned with a TripletSet. `values_v`
/// is empty when both polarizations share coefficients, otherwise it holds
/// the V-output coefficients.
struct CoefficientSet {
  TripletSet set;
  cvec values;
  cvec values_v;
  CoefficientScaling scaling = CoefficientScaling::kAnalytic;
  double symbol_rate = 0.0;
  std::uint64_t link_hash = 0;
  std::string link_summary;
  std::string pulse_description;

  std::size_t size() const { return values.size(); }
  bool per_polarization() const { return !values_v.empty(); }
  const cvec& for_pol(int p) const { return p == 0 || values_v.empty() ? values : values_v; }

  cd at(int m, int n) const {
    const long i = set.find(m, n);
    if (i < 0) throw Error("CoefficientSet: (" + std::to_string(m) + "," + std::to_string(n) + ") not present");
    return values[static_cast<std::size_t>(i)];
  }

  double max_abs() const {
    double mx = 0.0;
    for (const auto& c : values) mx = std::max(mx, std::abs(c));
    return mx;
  }

  void validate() const {
    if (values.size() != set.size()) throw Error("CoefficientSet: value count does not match the index set");
    if (!values_v.empty() && values_v.size() != set.size())
      throw Error("CoefficientSet: V-polarization value count does not match the index set");
    for (const auto& c : values)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw Error("CoefficientSet: non-finite value");
    for (const auto& c : values_v)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw Error("CoefficientSet: non-finite value");
  }

  /// Copy restricted to `subset`, which must be contained in this set.
  CoefficientSet restrict_to(const TripletSet& subset) const {
    CoefficientSet out = *this;
    out.set = subset;
    out.values.resize(subset.size());
    if (!values_v.empty()) out.values_v.resize(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) {
      const long j = set.find(subset[i].m, subset[i].n);
      if (j < 0) throw Error("CoefficientSet::restrict_to: subset index not present");
      out.values[i] = values[static_cast<std::size_t>(j)];
      if (!values_v.empty()) out.values_v[i] = values_v[static_cast<std::size_t>(j)];
    }
    return out;
  }
};

/// Effective per-polarization coefficients c such that delta = sum c * t.
struct EffectiveCoefficients {
  cvec h;
  cvec v;
};

/// `nl_scale` is (8/9) gamma * P_pol in 1/m; it is ignored for absorbed sets.
inline EffectiveCoefficients effective_coefficients(const CoefficientSet& c, double nl_scale) {
  c.validate();
  EffectiveCoefficients e;
  const cd f = c.scaling == CoefficientScaling::kAnalytic ? cd{0.0, nl_scale} : cd{1.0, 0.0};
  e.h.resize(c.size());
  e.v.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    e.h[i] = f * c.values[i];
    e.v[i] = f * c.for_pol(1)[i];
  }
  return e;
}

/// Nonlinear scale (8/9) gamma * P_pol for a launch power per channel.
inline double nonlinear_scale(const LinkParams& link, double launch_power_dbm) {
  return link.span.manakov_gamma_per_w_m() * 0.5 * dbm_to_watt(launch_power_dbm);
}

/// Signal power profile along the link: exp(-alpha z) within each span,
/// reset to 1 by the amplifier at every span boundary.
struct PowerProfile {
  int spans = 1;
  double span_length_m = 100e3;
  double alpha_per_m = 0.0;

  static PowerProfile of(const LinkParams& link) {
    return {link.spans, link.span.length_m(), link.span.alpha_per_m()};
  }

  double total_length() const { return spans * span_length_m; }

  double operator()(double z) const {
    if (z < 0.0 || z > total_length()) throw Error("PowerProfile: position outside the link");
    double local = std::fmod(z, span_length_m);
    if (z == total_length()) local = span_length_m;
    return std::exp(-alpha_per_m * local);
  }

  /// Effective length of one span.
  double effective_length() const {
    const double al = alpha_per_m * span_length_m;
    if (al < 1e-9) return span_length_m;
    return -std::expm1(-al) / alpha_per_m;
  }
};

/// One row of the decay summary: the largest |C| among entries with a given |m n|.
struct DecayRow {
  long band = 0;
  std::size_t count = 0;
  double max_abs = 0.0;
  double envelope = 0.0;  // max_abs over this and all higher bands: non-increasing
};

inline std::vector<DecayRow> coefficient_decay_profile(const CoefficientSet& c) {
  if (c.size() == 0) throw Error("coefficient_decay_profile: empty set");
  std::vector<DecayRow> rows;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const long band = std::labs(static_cast<long>(c.set[i].m) * c.set[i].n);
    auto it = std::lower_bound(rows.begin(), rows.end(), band, [](const DecayRow& r, long b) { return r.band < b; });
    if (it == rows.end() || it->band != band) it = rows.insert(it, DecayRow{band, 0, 0.0, 0.0});
    ++it->count;
    it->max_abs = std::max(it->max_abs, std::abs(c.values[i]));
  }
  double env = 0.0;
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    env = std::max(env, it->max_abs);
    it->envelope = env;
  }
  return rows;
}

/// Normalized magnitude used for truncation. C(-m,n) = conj C(m,n) exactly,
/// so magnitudes come in tied groups; entries with opposite-sign offsets
/// (m n < 0) are weighted by (1 - 1e-9) so that a threshold can separate a
/// tied group into its same-sign and opposite-sign halves.
inline double truncation_magnitude(TripletIndex t, cd c, double max_abs) {
  constexpr double kOppositeSignWeight = 1.0 - 1e-9;
  const double r = std::abs(c) / max_abs;
  return static_cast<long>(t.m) * t.n < 0 ? r * kOppositeSignWeight : r;
}

/// Keeps the entries of the coefficient grid with |C| >= rho * max|C|
/// (magnitudes as in truncation_magnitude).
inline TripletSet generate_triplet_set(int window, double rho, const CoefficientSet& coeffs) {
  if (window < 1 || window % 2 == 0) throw Error("generate_triplet_set: window must be a positive odd integer");
  const int h = window / 2;
  for (int m = -h; m <= h; ++m)
    for (int n = -h; n <= h; ++n)
      if (!coeffs.set.contains(m, n)) throw Error("generate_triplet_set: coefficients do not cover the window grid");
  const double mx = coeffs.max_abs();
  if (!(mx > 0.0)) throw Error("generate_triplet_set: all coefficients are zero");
  std::vector<TripletIndex> kept;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto t = coeffs.set[i];
    if (std::abs(t.m) <= h && std::abs(t.n) <= h && truncation_magnitude(t, coeffs.values[i], mx) >= rho)
      kept.push_back(t);
  }
  if (kept.empty()) throw Error("generate_triplet_set: threshold removes every index");
  return TripletSet(std::move(kept), window, rho);
}

/// Threshold that retains exactly `target` entries of the window grid. The
/// returned rho is the geometric mean of the target-th and (target+1)-th
/// largest truncation magnitudes; targets that would split a group of equal
/// magnitudes are unreachable.
inline double calibrate_rho(int window, std::size_t target, const CoefficientSet& coeffs) {
  const int h = window / 2;
  std::vector<double> mags;
  const double mx = coeffs.max_abs();
  if (!(mx > 0.0)) throw Error("calibrate_rho: all coefficients are zero");
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto t = coeffs.set[i];
    if (std::abs(t.m) <= h && std::abs(t.n) <= h) mags.push_back(truncation_magnitude(t, coeffs.values[i], mx));
  }
  if (target == 0 || target > mags.size()) throw Error("calibrate_rho: target outside [1, grid size]");
  std::sort(mags.begin(), mags.end(), std::greater<>());
  if (target == mags.size()) return mags.back() * 0.5;
  const double hi = mags[target - 1];
  const double lo = mags[target];
  if (!(hi > lo))
    throw Error("calibrate_rho: " + std::to_string(target) + " entries cannot be separated (tie at " +
                exact_decimal(hi) + ")");
  return std::sqrt(hi * lo);
}

}  // namespace pbnlc
