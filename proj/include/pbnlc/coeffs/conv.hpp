#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/core/fft.hpp"
#include "pbnlc/core/filters.hpp"
#include "pbnlc/core/hash.hpp"
#include "pbnlc/triplets/triplet_set.hpp"

namespace pbnlc {

/// Transmit pulse: RRC with a fraction of the link dispersion compensated
/// at the transmitter.
struct PulseSpec {
  double symbol_rate = 32e9;
  double rolloff = 0.1;
  int rrc_span_symbols = 64;
  double pre_cdc_fraction = 0.5;

  std::string describe() const {
    std::ostringstream os;
    os << "rrc rolloff=" << rolloff << " span=" << rrc_span_symbols << " pre_cdc=" << pre_cdc_fraction
       << " rate=" << symbol_rate;
    return os.str();
  }
};

struct CoeffQuadrature {
  int z_steps_per_span = 20;
  int samples_per_symbol = 16;
  int support_windows = 8;  // time support in units of the symbol window
  bool check_convergence = false;

  void validate() const {
    if (z_steps_per_span < 4) throw Error("CoeffQuadrature: at least 4 z-steps per span are required");
    if (samples_per_symbol < 8) throw Error("CoeffQuadrature: at least 8 samples per symbol are required");
    if (support_windows < 1) throw Error("CoeffQuadrature: support_windows must be >= 1");
  }
};

inline std::string link_summary(const LinkParams& link) {
  std::ostringstream os;
  os.precision(17);
  os << "spans=" << link.spans << " length_km=" << link.span.length_km << " alpha_db_km=" << link.span.alpha_db_per_km
     << " D_ps_nm_km=" << link.span.dispersion_ps_nm_km << " gamma_w_km=" << link.span.gamma_per_w_km
     << " wavelength_m=" << link.span.reference_wavelength_m;
  return os.str();
}

inline std::uint64_t link_hash(const LinkParams& link, const PulseSpec& pulse) {
  return fnv1a(link_summary(link) + "|" + pulse.describe());
}

namespace detail {

/// Distinct z nodes of the link and their quadrature weights. Between nodes
/// the overlap integral is interpolated piecewise quadratically (linearly on
/// a trailing odd interval) and integrated against the exact exponential
/// power profile; nodes at span boundaries merge the contributions of both
/// adjacent spans.
struct ZQuadrature {
  std::vector<double> z;
  std::vector<double> w;
};

/// int_0^len s^k e^{-a s} ds for k = 0, 1, 2.
inline std::array<double, 3> exp_moments(double a, double len) {
  std::array<double, 3> m{};
  const double al = a * len;
  if (al < 1.0) {
    for (int k = 0; k < 3; ++k) {
      double term = std::pow(len, k + 1);
      double sum = 0.0;
      for (int j = 0; j < 40; ++j) {
        sum += term / (k + j + 1);
        term *= -al / (j + 1);
      }
      m[static_cast<std::size_t>(k)] = sum;
    }
    return m;
  }
  const double e = std::exp(-al);
  m[0] = (1.0 - e) / a;
  m[1] = (1.0 - e * (1.0 + al)) / (a * a);
  m[2] = (2.0 - e * (2.0 + 2.0 * al + al * al)) / (a * a * a);
  return m;
}

inline ZQuadrature z_quadrature(const LinkParams& link, int steps_per_span) {
  const double ls = link.span.length_m();
  const double a = link.span.alpha_per_m();
  const double h = ls / steps_per_span;
  // Lagrange weights on [0, 2h] through nodes 0, h, 2h, and linear on [0, h].
  const auto q2 = exp_moments(a, 2.0 * h);
  const double w20 = (q2[2] - 3.0 * h * q2[1] + 2.0 * h * h * q2[0]) / (2.0 * h * h);
  const double w21 = -(q2[2] - 2.0 * h * q2[1]) / (h * h);
  const double w22 = (q2[2] - h * q2[1]) / (2.0 * h * h);
  const auto q1 = exp_moments(a, h);
  const double w10 = q1[0] - q1[1] / h;
  const double w11 = q1[1] / h;

  ZQuadrature q;
  const int nodes = link.spans * steps_per_span + 1;
  q.z.resize(static_cast<std::size_t>(nodes));
  q.w.assign(static_cast<std::size_t>(nodes), 0.0);
  for (int i = 0; i < nodes; ++i) q.z[static_cast<std::size_t>(i)] = i * h;
  q.z.back() = link.total_length_m();
  for (int s = 0; s < link.spans; ++s) {
    int i = 0;
    for (; i + 2 <= steps_per_span; i += 2) {
      const double f = std::exp(-a * i * h);
      const auto node = static_cast<std::size_t>(s * steps_per_span + i);
      q.w[node] += f * w20;
      q.w[node + 1] += f * w21;
      q.w[node + 2] += f * w22;
    }
    if (i < steps_per_span) {
      const double f = std::exp(-a * i * h);
      const auto node = static_cast<std::size_t>(s * steps_per_span + i);
      q.w[node] += f * w10;
      q.w[node + 1] += f * w11;
    }
  }
  return q;
}

/// Images of (m,n) under swap and point reflection, which leave C unchanged,
/// in canonical order.
inline std::array<TripletIndex, 4> equal_orbit(TripletIndex t) {
  std::array<TripletIndex, 4> o{{{t.m, t.n}, {t.n, t.m}, {-t.m, -t.n}, {-t.n, -t.m}}};
  std::sort(o.begin(), o.end());
  return o;
}

/// The set plus every index whose coefficient is tied to one of its entries:
/// the equal orbit and the conjugate orbit of (-m, n).
inline TripletSet symmetric_closure(const TripletSet& set) {
  std::set<TripletIndex> all;
  for (const auto& t : set.indices()) {
    for (const auto& u : equal_orbit(t)) all.insert(u);
    for (const auto& u : equal_orbit({-t.m, t.n})) all.insert(u);
  }
  return TripletSet(std::vector<TripletIndex>(all.begin(), all.end()), set.window(), set.truncation_param());
}

}  // namespace detail

/// Analytic perturbation coefficients
///   C(m,n) = (1/T) int_0^L f(z) int g*(z,t) g(z,t-mT) g*(z,t-(m+n)T) g(z,t-nT) dt dz
/// with g the transmit pulse (normalized to int |g|^2 dt = T) propagated to
/// z by dispersion only, and f the power profile. The time integral is
/// evaluated for every m at once as an autocorrelation of
/// B_n(t) = g(t) g*(t - nT). The result is averaged over the exact
/// symmetries C(m,n) = C(n,m) = C(-m,-n) = conj C(-m,n), in a fixed order so
/// that symmetric entries are bitwise equal (or conjugate).
inline CoefficientSet conv_coefficients(const PulseSpec& pulse, const LinkParams& link, const TripletSet& set,
                                        const CoeffQuadrature& quad = {}) {
  link.validate();
  quad.validate();
  if (set.empty()) throw Error("conv_coefficients: empty index set");
  const TripletSet full = detail::symmetric_closure(set);
  const int sps = quad.samples_per_symbol;
  const double t_sym = 1.0 / pulse.symbol_rate;
  const double fs = pulse.symbol_rate * sps;
  const double dt = t_sym / sps;
  const double beta2 = link.span.beta2();
  const double total = link.total_length_m();
  const double pre = pulse.pre_cdc_fraction * total;

  // Time support: the window requirement, or enough for the dispersed pulse
  // plus every shift, whichever is larger.
  const double max_acc = std::max(pre, total - pre);
  const double spread = std::abs(beta2) * max_acc * 2.0 * constants::kPi * (1.0 + pulse.rolloff) * pulse.symbol_rate;
  const int reach = full.max_reach();
  const long need = pulse.rrc_span_symbols + 2 * static_cast<long>(std::ceil(spread / t_sym)) + 2 * reach + 8;
  const long nsym = std::max<long>(static_cast<long>(quad.support_windows) * set.window(), need);
  const auto nt = static_cast<std::size_t>(nsym * sps);

  cvec g0 = centered_frequency_response(rrc_taps(pulse.rolloff, pulse.rrc_span_symbols, sps), nt);
  for (auto& v : g0) v *= std::sqrt(static_cast<double>(sps));

  std::map<int, std::vector<std::size_t>> by_n;
  for (std::size_t i = 0; i < full.size(); ++i) by_n[full[i].n].push_back(i);

  const auto zq = detail::z_quadrature(link, quad.z_steps_per_span);
  cvec acc(full.size(), cd{0.0, 0.0});
  cvec g(nt);
  cvec b(nt);
  const auto nn = static_cast<long long>(nt);
  for (std::size_t zi = 0; zi < zq.z.size(); ++zi) {
    const cvec d = dispersion_response(nt, fs, 0.0, beta2, zq.z[zi] - pre);
    for (std::size_t k = 0; k < nt; ++k) g[k] = g0[k] * d[k];
    fft::inverse(g);
    const double wz = zq.w[zi];
    for (const auto& [n, members] : by_n) {
      const long long shift = static_cast<long long>(n) * sps;
      for (long long t = 0; t < nn; ++t) {
        const auto lag = static_cast<std::size_t>(((t - shift) % nn + nn) % nn);
        b[static_cast<std::size_t>(t)] = g[static_cast<std::size_t>(t)] * std::conj(g[lag]);
      }
      fft::forward(b);
      for (auto& v : b) v = std::norm(v);
      fft::inverse(b);
      // b[s] = sum_t conj(B(t)) B(t+s); the overlap integral needs s = -mT.
      for (const std::size_t i : members) {
        const long long s = -static_cast<long long>(full[i].m) * sps;
        acc[i] += wz * dt * b[static_cast<std::size_t>((s % nn + nn) % nn)];
      }
    }
  }
  for (auto& v : acc) v /= t_sym;

  CoefficientSet out;
  out.set = set;
  out.values.resize(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto orbit_sum = [&](TripletIndex t) {
      cd s{0.0, 0.0};
      for (const auto& u : detail::equal_orbit(t)) s += acc[static_cast<std::size_t>(full.find(u.m, u.n))];
      return s;
    };
    const cd own = orbit_sum(set[i]);
    const cd mirror = orbit_sum({-set[i].m, set[i].n});
    out.values[i] = 0.125 * (own + std::conj(mirror));
  }
  out.scaling = CoefficientScaling::kAnalytic;
  out.symbol_rate = pulse.symbol_rate;
  out.link_hash = link_hash(link, pulse);
  out.link_summary = link_summary(link);
  out.pulse_description = pulse.describe();

  if (quad.check_convergence) {
    CoeffQuadrature fine = quad;
    fine.check_convergence = false;
    fine.z_steps_per_span *= 2;
    fine.samples_per_symbol *= 2;
    const CoefficientSet ref = conv_coefficients(pulse, link, set, fine);
    const double scale = ref.max_abs();
    for (std::size_t i = 0; i < set.size(); ++i)
      if (std::abs(ref.values[i] - out.values[i]) > 1e-3 * scale)
        throw Error("conv_coefficients: quadrature not converged at (" + std::to_string(set[i].m) + "," +
                    std::to_string(set[i].n) + "); increase z_steps_per_span or samples_per_symbol");
  }
  return out;
}

/// Largest change of any coefficient, relative to max|C|, when both the
/// z-step count and the time resolution are doubled.
inline double coefficient_convergence_error(const PulseSpec& pulse, const LinkParams& link, const TripletSet& set,
                                            const CoeffQuadrature& quad = {}) {
  CoeffQuadrature base = quad;
  base.check_convergence = false;
  CoeffQuadrature fine = base;
  fine.z_steps_per_span *= 2;
  fine.samples_per_symbol *= 2;
  const CoefficientSet a = conv_coefficients(pulse, link, set, base);
  const CoefficientSet b = conv_coefficients(pulse, link, set, fine);
  double err = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) err = std::max(err, std::abs(a.values[i] - b.values[i]));
  return err / b.max_abs();
}

}  // namespace pbnlc
