#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pbnlc/channel/amplifier.hpp"
#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/complexity/complexity.hpp"
#include "pbnlc/core/filters.hpp"
#include "pbnlc/core/hash.hpp"
#include "pbnlc/fnn/apply.hpp"
#include "pbnlc/fnn/network.hpp"
#include "pbnlc/harness/runner.hpp"
#include "pbnlc/nlc/engines.hpp"
#include "pbnlc/nlc/kmeans.hpp"
#include "pbnlc/nlc/ls.hpp"
#include "pbnlc/triplets/compute.hpp"

// Second implementations for cross-checking the production code paths:
// direct sums, naive DFTs, no caching.

namespace pbnlc {

enum class OracleScale { kUnit, kDesk };

inline OracleScale oracle_scale_from_string(const std::string& s) {
  if (s == "unit") return OracleScale::kUnit;
  if (s == "desk") return OracleScale::kDesk;
  throw Error("unknown oracle scale '" + s + "'");
}

struct OracleReport {
  std::string name;
  bool pass = false;
  double deviation = 0.0;
  double tolerance = 0.0;
  std::string inputs_digest;
};

inline OracleReport make_report(std::string name, double deviation, double tolerance, const std::string& inputs) {
  OracleReport r;
  r.name = std::move(name);
  r.deviation = deviation;
  r.tolerance = tolerance;
  r.pass = deviation <= tolerance;
  r.inputs_digest = hex64(fnv1a(inputs));
  return r;
}

inline nlohmann::json to_json(const OracleReport& r) {
  return {{"name", r.name},
          {"status", r.pass ? "pass" : "fail"},
          {"deviation", r.deviation},
          {"tolerance", r.tolerance},
          {"inputs_digest", r.inputs_digest}};
}

namespace oracle {

inline cvec random_cvec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  cvec v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

inline SymbolSequence random_symbols(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SymbolSequence s;
  s.symbol_rate = 32e9;
  s.x_pol = random_cvec(n, rng);
  s.y_pol = random_cvec(n, rng);
  return s;
}

/// Band-limited random waveform (RRC-shaped Gaussian symbols) at `sps`.
inline SampledWaveform random_waveform(std::size_t symbols, int sps, double power_w, std::uint64_t seed) {
  SymbolSequence s = random_symbols(symbols, seed);
  SampledWaveform w;
  w.sample_rate = s.symbol_rate * sps;
  w.x_pol.assign(symbols * static_cast<std::size_t>(sps), cd{0.0, 0.0});
  w.y_pol = w.x_pol;
  for (std::size_t k = 0; k < symbols; ++k) {
    w.x_pol[k * static_cast<std::size_t>(sps)] = s.x_pol[k];
    w.y_pol[k * static_cast<std::size_t>(sps)] = s.y_pol[k];
  }
  w = apply_filter_fft(w, rrc_taps(0.1, 32, sps));
  const double scale = std::sqrt(power_w / w.power());
  for (auto& v : w.x_pol) v *= scale;
  for (auto& v : w.y_pol) v *= scale;
  return w;
}

inline double max_abs_diff(const cvec& a, const cvec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs(const cvec& a) {
  double d = 0.0;
  for (const auto& v : a) d = std::max(d, std::abs(v));
  return d;
}

inline double energy(const SampledWaveform& w) {
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) e += std::norm(w.x_pol[i]) + std::norm(w.y_pol[i]);
  return e;
}

/// Naive DFT; sign -1 forward, +1 inverse (inverse scaled by 1/N).
inline cvec naive_dft(const cvec& x, int sign) {
  const std::size_t n = x.size();
  cvec out(n, cd{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    cd acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const double ph = sign * 2.0 * constants::kPi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * cd{std::cos(ph), std::sin(ph)};
    }
    out[k] = sign > 0 ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

/// Direct triplet sum for one symbol and polarization.
inline cd direct_triplet(const SymbolSequence& s, std::size_t k, int m, int n, int pol) {
  const auto kk = static_cast<long long>(k);
  const auto at = [&](const cvec& v, long long i) { return v[static_cast<std::size_t>(i)]; };
  const cd pair = at(s.x_pol, kk + m) * std::conj(at(s.x_pol, kk + m + n)) +
                  at(s.y_pol, kk + m) * std::conj(at(s.y_pol, kk + m + n));
  return pair * at(pol == 0 ? s.x_pol : s.y_pol, kk + n);
}

/// Deterministic subset of the window grid (about `fraction` of it, always
/// including the degenerate row n = 0).
inline TripletSet random_subset(int window, double fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TripletIndex> idx;
  const int h = window / 2;
  for (int m = -h; m <= h; ++m)
    for (int n = -h; n <= h; ++n)
      if (n == 0 || u(rng) < fraction) idx.push_back({m, n});
  return TripletSet(std::move(idx), window);
}

inline CoefficientSet random_coefficients(const TripletSet& set, std::uint64_t seed,
                                          CoefficientScaling scaling = CoefficientScaling::kAbsorbed) {
  std::mt19937_64 rng(seed);
  CoefficientSet c;
  c.set = set;
  c.scaling = scaling;
  c.symbol_rate = 32e9;
  c.values = random_cvec(set.size(), rng);
  return c;
}

}  // namespace oracle

inline OracleReport oracle_filter_convolution(OracleScale scale) {
  const std::size_t symbols = scale == OracleScale::kUnit ? 128 : 1024;
  const SampledWaveform w = oracle::random_waveform(symbols, 4, 1.0, 11);
  const FilterTaps taps = rrc_taps(0.25, 16, 4);
  const SampledWaveform y = apply_filter_fft(w, taps);
  const std::size_t n = w.size();
  const std::size_t c = (taps.size() - 1) / 2;
  cvec direct(n, cd{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < taps.size(); ++l) direct[i] += taps.coefficients[l] * w.x_pol[(i + n + c - l) % n];
  return make_report("filter_fft_vs_direct_convolution", oracle::max_abs_diff(y.x_pol, direct) / oracle::max_abs(direct),
                     1e-12, "rrc0.25x16x4 n=" + std::to_string(n));
}

inline OracleReport oracle_dispersion_linear(OracleScale scale) {
  const std::size_t symbols = scale == OracleScale::kUnit ? 64 : 256;
  const SampledWaveform w = oracle::random_waveform(symbols, 4, 1e-3, 12);
  FiberSpanParams span;
  span.gamma_per_w_km = 0.0;
  span.alpha_db_per_km = 0.0;
  span.pmd_ps_sqrt_km = 0.0;
  span.length_km = 80.0;
  const SampledWaveform out = ssfm_propagate(w, span, PmdRealization::none());
  const std::size_t n = w.size();
  cvec spec = oracle::naive_dft(w.x_pol, -1);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    const double om = 2.0 * constants::kPi * kk * w.sample_rate / static_cast<double>(n);
    const double ph = 0.5 * span.beta2() * om * om * span.length_m();
    spec[k] *= cd{std::cos(ph), std::sin(ph)};
  }
  const cvec expect = oracle::naive_dft(spec, +1);
  return make_report("ssfm_linear_limit_vs_analytic_dispersion",
                     oracle::max_abs_diff(out.x_pol, expect) / oracle::max_abs(expect), 1e-9,
                     "80km D=17 n=" + std::to_string(n));
}

/// Pure Kerr (no dispersion): A(L) = A(0) e^{-alpha L/2} exp(j (8/9) gamma P L_eff).
inline OracleReport oracle_pure_kerr(OracleScale scale) {
  const std::size_t symbols = scale == OracleScale::kUnit ? 256 : 4096;
  const SampledWaveform w = oracle::random_waveform(symbols, 4, 10e-3, 13);
  FiberSpanParams span;
  span.dispersion_ps_nm_km = 0.0;
  span.pmd_ps_sqrt_km = 0.0;
  span.step_km = 1.0;
  const SampledWaveform out = ssfm_propagate(w, span, PmdRealization::none());
  const double a = span.alpha_per_m();
  const double l = span.length_m();
  const double l_eff = -std::expm1(-a * l) / a;
  const double g = 8.0 / 9.0 * span.gamma_per_w_km * 1e-3;
  double dev = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p = std::norm(w.x_pol[i]) + std::norm(w.y_pol[i]);
    const double phi = g * p * l_eff;
    const cd expect = w.x_pol[i] * std::exp(-0.5 * a * l) * cd{std::cos(phi), std::sin(phi)};
    dev = std::max(dev, std::abs(out.x_pol[i] - expect));
    ref = std::max(ref, std::abs(expect));
  }
  return make_report("ssfm_pure_kerr_closed_form", dev / ref, 1e-9, "100km 10mW n=" + std::to_string(w.size()));
}

/// Lossless propagation (dispersion, Kerr and PMD) conserves energy.
inline OracleReport oracle_ssfm_energy(OracleScale scale) {
  const std::size_t symbols = scale == OracleScale::kUnit ? 512 : 4096;
  const SampledWaveform w = oracle::random_waveform(symbols, 4, 10e-3, 36);
  FiberSpanParams span;
  span.alpha_db_per_km = 0.0;
  span.step_km = 1.0;
  const SampledWaveform out = ssfm_propagate(w, span, PmdRealization::draw(span, 37));
  return make_report("ssfm_lossless_energy", std::abs(oracle::energy(out) / oracle::energy(w) - 1.0), 1e-9,
                     "100km 10mW pmd n=" + std::to_string(w.size()));
}

/// Linear propagation over 100 km at 0.2 dB/km attenuates power by 1e-2.
inline OracleReport oracle_ssfm_attenuation(OracleScale scale) {
  const std::size_t symbols = scale == OracleScale::kUnit ? 512 : 4096;
  const SampledWaveform w = oracle::random_waveform(symbols, 4, 1e-3, 38);
  FiberSpanParams span;
  span.length_km = 100.0;
  span.alpha_db_per_km = 0.2;
  span.gamma_per_w_km = 0.0;
  const SampledWaveform out = ssfm_propagate(w, span, PmdRealization::draw(span, 39));
  return make_report("ssfm_attenuation", std::abs(oracle::energy(out) / oracle::energy(w) / 1e-2 - 1.0), 1e-9,
                     "100km 0.2dB/km n=" + std::to_string(w.size()));
}

/// Halving the step size changes the output by less than 1e-4 (relative
/// L2 norm) for a 100 km span at 4 dBm.
inline OracleReport oracle_ssfm_step_halving(OracleScale scale) {
  const std::size_t symbols = scale == OracleScale::kUnit ? 1024 : 8192;
  const SampledWaveform w = oracle::random_waveform(symbols, 4, dbm_to_watt(4.0), 40);
  FiberSpanParams span;
  span.pmd_ps_sqrt_km = 0.0;
  span.step_km = 0.1;
  const SampledWaveform a = ssfm_propagate(w, span, PmdRealization::none());
  span.step_km = 0.05;
  const SampledWaveform b = ssfm_propagate(w, span, PmdRealization::none());
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += std::norm(a.x_pol[i] - b.x_pol[i]) + std::norm(a.y_pol[i] - b.y_pol[i]);
  return make_report("ssfm_step_halving", std::sqrt(num / oracle::energy(b)), 1e-4,
                     "100km 4dBm step 0.1/0.05km n=" + std::to_string(w.size()));
}

inline OracleReport oracle_ase_variance(OracleScale scale) {
  const std::size_t n = scale == OracleScale::kUnit ? (1u << 16) : (1u << 20);
  SampledWaveform w;
  w.sample_rate = 128e9;
  w.x_pol.assign(n, cd{0.0, 0.0});
  w.y_pol = w.x_pol;
  std::mt19937_64 rng(14);
  const SampledWaveform out = edfa_amplify(w, 20.0, 5.0, rng);
  const double expect = ase_psd_per_pol(20.0, 5.0) * w.sample_rate;
  double var = 0.0;
  for (const auto& v : out.x_pol) var += std::norm(v);
  var /= static_cast<double>(n);
  // 5 standard errors of the sample variance of |v|^2 (exponential, var = mean^2).
  return make_report("ase_variance", std::abs(var / expect - 1.0), 5.0 / std::sqrt(static_cast<double>(n)),
                     "G=20dB NF=5dB n=" + std::to_string(n));
}

inline OracleReport oracle_wiener_increments(OracleScale scale) {
  const std::size_t n = scale == OracleScale::kUnit ? (1u << 16) : (1u << 20);
  std::mt19937_64 rng(15);
  const auto ph = wiener_phase(n, 100e3, 32e9, rng);
  double var = 0.0;
  for (std::size_t i = 1; i < n; ++i) var += (ph[i] - ph[i - 1]) * (ph[i] - ph[i - 1]);
  var /= static_cast<double>(n - 1);
  const double expect = 2.0 * constants::kPi * 100e3 / 32e9;
  return make_report("wiener_increment_variance", std::abs(var / expect - 1.0),
                     5.0 * std::sqrt(2.0 / static_cast<double>(n - 1)), "100kHz@32GBd n=" + std::to_string(n));
}

/// Cyclic-buffer triplets against direct sums; with `tamper` set, the
/// buffer is perturbed and the deviation is expected to be nonzero.
inline double cb_deviation(const SymbolSequence& s, const TripletSet& set, double tamper = 0.0) {
  CyclicTripletBuffer buf(set);
  buf.set_tamper(tamper);
  const SymbolRange r = triplet_valid_range(s.size(), set);
  TripletFeatures f;
  double dev = 0.0;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    buf.next(s, k, f);
    for (std::size_t i = 0; i < set.size(); ++i) {
      dev = std::max(dev, std::abs(f.h[i] - oracle::direct_triplet(s, k, set[i].m, set[i].n, 0)));
      dev = std::max(dev, std::abs(f.v[i] - oracle::direct_triplet(s, k, set[i].m, set[i].n, 1)));
    }
  }
  return dev;
}

inline OracleReport oracle_cb_equivalence(OracleScale scale) {
  const std::size_t n = scale == OracleScale::kUnit ? 2000 : 10000;
  const SymbolSequence s = oracle::random_symbols(n, 16);
  const TripletSet set = oracle::random_subset(21, 0.5, 17);
  // Bit identity against the production brute-force path, and agreement
  // with the direct sums up to rounding (different association order).
  CyclicTripletBuffer buf(set);
  const SymbolRange r = triplet_valid_range(n, set);
  TripletFeatures f;
  double bit_dev = 0.0;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    buf.next(s, k, f);
    const TripletFeatures b = compute_triplets_brute(s, k, set);
    if (!(f == b)) bit_dev = std::max(bit_dev, std::max(oracle::max_abs_diff(f.h, b.h), 1e-300));
  }
  const double direct_dev = cb_deviation(s, set);
  OracleReport rep = make_report("cb_vs_brute_triplets", bit_dev, 0.0, "w21 n=" + std::to_string(n));
  if (direct_dev > 1e-12) {
    rep.pass = false;
    rep.deviation = direct_dev;
  }
  return rep;
}

/// Mutation smoke test: a 1e-3 perturbation in the buffer must be caught.
inline OracleReport oracle_cb_tamper(OracleScale) {
  const SymbolSequence s = oracle::random_symbols(500, 18);
  const TripletSet set = oracle::random_subset(15, 0.5, 19);
  const double dev = cb_deviation(s, set, 1e-3);
  return make_report("cb_tamper_detected", dev >= 1e-4 ? 0.0 : 1.0, 0.0, "w15 tamper=1e-3");
}

/// Exact recovery: sent = received - sum c t(received), so the LS target is
/// realizable with zero residual.
inline OracleReport oracle_ls_recovery(OracleScale scale) {
  const std::size_t n = scale == OracleScale::kUnit ? 2000 : 20000;
  const SymbolSequence r = oracle::random_symbols(n, 20);
  const TripletSet set = oracle::random_subset(9, 0.6, 21);
  const CoefficientSet truth = oracle::random_coefficients(set, 22);
  const SymbolRange valid = triplet_valid_range(n, set);
  SymbolSequence sent = r;
  for (std::size_t k = valid.begin; k < valid.end; ++k) {
    cd dh{0.0, 0.0};
    cd dv{0.0, 0.0};
    for (std::size_t i = 0; i < set.size(); ++i) {
      dh += truth.values[i] * oracle::direct_triplet(r, k, set[i].m, set[i].n, 0);
      dv += truth.values[i] * oracle::direct_triplet(r, k, set[i].m, set[i].n, 1);
    }
    sent.x_pol[k] = r.x_pol[k] - dh;
    sent.y_pol[k] = r.y_pol[k] - dv;
  }
  const CoefficientSet fit = ls_fit(r, sent, valid, set);
  return make_report("ls_exact_recovery", oracle::max_abs_diff(fit.values, truth.values) / oracle::max_abs(truth.values),
                     1e-9, "w9 n=" + std::to_string(n));
}

inline OracleReport oracle_gradient(OracleScale) {
  double worst = 0.0;
  for (const FnnMode mode : {FnnMode::kAdditive, FnnMode::kAm}) {
    FnnConfig cfg;
    cfg.hidden = {3};
    cfg.mode = mode;
    cfg.rng_seed = 23;
    FnnModel m = fnn_init(3, cfg);
    m.output_scale = 0.7;
    m.loss_norm = 1.3;
    std::mt19937_64 rng(24);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& b : m.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.3 * g(rng);
    Eigen::MatrixXd x(3, 16);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
    const cvec r = oracle::random_cvec(16, rng);
    const cvec s = oracle::random_cvec(16, rng);
    worst = std::max(worst, fnn_gradient_check(m, x, r, s, 1e-4));
  }
  return make_report("fnn_gradient_vs_finite_differences", worst, 1e-5, "3-3-2 and 3-3-3 tanh h=1e-4");
}

/// K = |set| on distinct coefficients reproduces the unquantized engine.
inline OracleReport oracle_quantization_exact(OracleScale) {
  const SymbolSequence s = oracle::random_symbols(600, 25);
  const TripletSet set = oracle::random_subset(11, 0.4, 26);
  const CoefficientSet c = oracle::random_coefficients(set, 27);
  const QuantizedCoefficients q = kmeans_quantize(c, static_cast<int>(set.size()), 28);
  const SymbolSequence a = conv_apply(s, set, c, 0.0);
  const SymbolSequence b = quantized_apply(s, set, q, 0.0);
  const double dev = std::max(oracle::max_abs_diff(a.x_pol, b.x_pol), oracle::max_abs_diff(a.y_pol, b.y_pol));
  const double deq = oracle::max_abs_diff(q.dequantized().values, c.values);
  return make_report("quantization_full_k_exact", std::max(dev, deq), 0.0, "w11 k=|set|");
}

/// Instrumented multiplication counts of every engine against the analytic report.
inline OracleReport oracle_complexity_instrumentation(OracleScale scale) {
  const TripletSet set = scale == OracleScale::kUnit ? oracle::random_subset(21, 0.4, 29) : oracle::random_subset(37, 0.5, 29);
  const SymbolSequence s = oracle::random_symbols(400 + 2 * static_cast<std::size_t>(set.max_reach()), 30);
  const CoefficientSet c = oracle::random_coefficients(set, 31, CoefficientScaling::kAnalytic);
  const std::size_t reach = static_cast<std::size_t>(set.max_reach());
  KmeansOptions am_opt;
  am_opt.exclude_degenerate = true;
  const QuantizedCoefficients q = kmeans_quantize(c, 16, 32);
  const QuantizedCoefficients qam = kmeans_quantize(c, 16, 32, am_opt);
  FnnConfig fc;
  fc.hidden = {8, 4};
  FnnModel additive = fnn_init(2 * static_cast<int>(set.size()), fc);
  prune_to(additive, additive.total_weights() / 2);
  fc.mode = FnnMode::kAm;
  const FnnModel am_model = fnn_init(2 * static_cast<int>(set.size()), fc);

  double worst = 0.0;
  for (const bool cb : {false, true}) {
    const auto check = [&](Technique t, int clusters, std::size_t nn, auto&& engine) {
      ComplexityOptions co;
      co.cb = cb;
      co.clusters = clusters;
      co.nn_active_weights = nn;
      const double analytic = static_cast<double>(total_complexity(t, set, co).total);
      const double measured = instrumented_mults_per_symbol([&](CountingArith& ar, std::size_t n) {
        NlcOptions opt;
        opt.use_cb = cb;
        opt.range = {reach, reach + n};
        engine(ar, opt);
      });
      worst = std::max(worst, std::abs(measured - analytic));
    };
    check(Technique::kConv, 0, 0, [&](CountingArith& ar, const NlcOptions& o) { conv_apply(s, set, c, 1e-3, o, ar); });
    check(Technique::kConvAm, 0, 0, [&](CountingArith& ar, const NlcOptions& o) { conv_am_apply(s, set, c, 1e-3, o, ar); });
    check(Technique::kLs, 16, 0, [&](CountingArith& ar, const NlcOptions& o) { quantized_apply(s, set, q, 1e-3, o, ar); });
    check(Technique::kConvAm, 16, 0,
          [&](CountingArith& ar, const NlcOptions& o) { quantized_apply(s, set, qam, 1e-3, o, ar, true); });
    check(Technique::kFnn, 0, additive.active_weights(),
          [&](CountingArith& ar, const NlcOptions& o) { fnn_apply(s, additive, set, FnnMode::kAdditive, o, ar); });
    check(Technique::kFnnAm, 0, am_model.active_weights(),
          [&](CountingArith& ar, const NlcOptions& o) { fnn_apply(s, am_model, set, FnnMode::kAm, o, ar); });
  }
  return make_report("complexity_instrumented_vs_analytic", worst, 0.0,
                     "triplets=" + std::to_string(set.size()) + " k=16");
}

/// The AM form agrees with the additive form to first order: their
/// difference is quadratic in the nonlinear scale, so halving the scale
/// divides it by 4.
inline OracleReport oracle_am_taylor(OracleScale) {
  const SymbolSequence s = oracle::random_symbols(800, 33);
  const TripletSet set = oracle::random_subset(11, 0.5, 34);
  CoefficientSet c = oracle::random_coefficients(set, 35, CoefficientScaling::kAnalytic);
  const auto diff = [&](double scale) {
    const SymbolSequence a = conv_apply(s, set, c, scale);
    const SymbolSequence b = conv_am_apply(s, set, c, scale);
    return std::max(oracle::max_abs_diff(a.x_pol, b.x_pol), oracle::max_abs_diff(a.y_pol, b.y_pol));
  };
  const double ratio = diff(2e-4) / diff(1e-4);
  return make_report("am_taylor_consistency", std::abs(ratio / 4.0 - 1.0), 0.02, "w11 scale=1e-4");
}

/// Every oracle, evaluated concurrently; the report order is fixed.
inline std::vector<OracleReport> run_all_oracles(OracleScale scale, int workers = 1) {
  const std::vector<std::function<OracleReport(OracleScale)>> checks{
      oracle_filter_convolution, oracle_dispersion_linear, oracle_pure_kerr,
      oracle_ssfm_energy,        oracle_ssfm_attenuation,  oracle_ssfm_step_halving,
      oracle_ase_variance,       oracle_wiener_increments, oracle_cb_equivalence,
      oracle_cb_tamper,          oracle_ls_recovery,       oracle_gradient,
      oracle_quantization_exact, oracle_complexity_instrumentation, oracle_am_taylor};
  std::vector<OracleReport> out(checks.size());
  run_jobs(checks.size(), workers, [&](std::size_t i) {
    try {
      out[i] = checks[i](scale);
    } catch (const std::exception& e) {
      out[i] = make_report("check_" + std::to_string(i), 1.0, 0.0, e.what());
      out[i].pass = false;
    }
  });
  return out;
}

inline nlohmann::json oracle_report_json(const std::vector<OracleReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(to_json(r));
  return {{"software_version", kSoftwareVersion}, {"checks", j}};
}

}  // namespace pbnlc
