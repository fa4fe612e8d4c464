#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pbnlc/core/fft.hpp"
#include "pbnlc/core/filters.hpp"
#include "pbnlc/core/types.hpp"

namespace pbnlc {

/// One fiber span. Values are in the customary engineering units; the
/// accessor functions convert to SI.
struct FiberSpanParams {
  double length_km = 100.0;
  double alpha_db_per_km = 0.2;
  double dispersion_ps_nm_km = 17.0;
  double gamma_per_w_km = 1.2;
  double pmd_ps_sqrt_km = 0.1;
  double step_km = 0.1;
  int pmd_sections = 50;
  double reference_wavelength_m = constants::kReferenceWavelength;

  double length_m() const { return length_km * 1e3; }
  double alpha_per_m() const { return alpha_db_per_km * std::log(10.0) / 10.0 / 1e3; }
  double beta2() const { return beta2_from_dispersion(dispersion_ps_nm_km, reference_wavelength_m); }
  /// Manakov-averaged nonlinear coefficient (8/9) gamma in 1/(W m).
  double manakov_gamma_per_w_m() const { return 8.0 / 9.0 * gamma_per_w_km * 1e-3; }
  double loss_db() const { return alpha_db_per_km * length_km; }

  void validate() const {
    if (!(length_km > 0.0)) throw Error("FiberSpanParams: length must be positive");
    if (alpha_db_per_km < 0.0 || dispersion_ps_nm_km < 0.0 || gamma_per_w_km < 0.0 || pmd_ps_sqrt_km < 0.0)
      throw Error("FiberSpanParams: physical parameters must be non-negative");
    if (!(step_km > 0.0)) throw Error("FiberSpanParams: step size must be positive");
    if (pmd_sections < 1) throw Error("FiberSpanParams: at least one PMD section is required");
  }
};

struct LinkParams {
  int spans = 10;
  FiberSpanParams span;
  double edfa_noise_figure_db = 6.0;
  std::optional<double> edfa_gain_db;  // defaults to the span loss

  double gain_db() const { return edfa_gain_db.value_or(span.loss_db()); }
  double total_length_m() const { return spans * span.length_m(); }

  void validate() const {
    if (spans < 1) throw Error("LinkParams: spans must be >= 1");
    span.validate();
  }
};

/// Random waveplate: Jones rotation followed by a differential group delay
/// between the two rotated axes.
struct PmdSection {
  std::array<cd, 4> rotation{cd{1, 0}, cd{0, 0}, cd{0, 0}, cd{1, 0}};  // row-major 2x2 unitary
  double dgd_s = 0.0;
};

struct PmdRealization {
  std::vector<PmdSection> sections;
  std::uint64_t rng_seed = 0;

  bool empty() const { return sections.empty(); }

  static PmdRealization none() { return {}; }

  /// Coarse-step waveplate emulator. Every section has DGD
  /// sqrt(3 pi / 8) * PMD * sqrt(L_section), so that the mean DGD of the
  /// whole span equals PMD * sqrt(L_span); rotations are Haar-distributed.
  static PmdRealization draw(const FiberSpanParams& span, std::uint64_t seed) {
    span.validate();
    PmdRealization r;
    r.rng_seed = seed;
    if (span.pmd_ps_sqrt_km == 0.0) return r;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double section_km = span.length_km / span.pmd_sections;
    const double dgd = std::sqrt(3.0 * constants::kPi / 8.0) * span.pmd_ps_sqrt_km * std::sqrt(section_km) * 1e-12;
    r.sections.resize(static_cast<std::size_t>(span.pmd_sections));
    for (auto& s : r.sections) {
      double q[4];
      double norm = 0.0;
      for (double& v : q) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      const cd a{q[0] / norm, q[1] / norm};
      const cd b{q[2] / norm, q[3] / norm};
      s.rotation = {a, -std::conj(b), b, std::conj(a)};
      s.dgd_s = dgd;
    }
    return r;
  }
};

enum class AliasPolicy { kIgnore, kWarn, kError };

struct SsfmOptions {
  AliasPolicy alias_policy = AliasPolicy::kWarn;
  double guard_fraction = 0.05;    // outer fraction of the band that must stay empty
  double guard_threshold_db = -40.0;
};

struct SsfmDiagnostics {
  int steps = 0;
  double input_guard_level_db = -300.0;
  double output_guard_level_db = -300.0;
  bool alias_warning = false;
};

namespace detail {

// Peak spectral density inside the guard region relative to the peak of the
// whole spectrum, in dB. Inputs are spectra in FFT order.
inline double guard_level_db(const cvec& sx, const cvec& sy, double guard_fraction) {
  const std::size_t n = sx.size();
  double peak = 0.0;
  double guard = 0.0;
  const double edge = 0.5 * (1.0 - guard_fraction) * static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double p = std::norm(sx[k]) + std::norm(sy[k]);
    peak = std::max(peak, p);
    const double kk = static_cast<double>(k < (n + 1) / 2 ? k : n - k);
    if (kk > edge) guard = std::max(guard, p);
  }
  if (peak == 0.0 || guard == 0.0) return -300.0;
  return 10.0 * std::log10(guard / peak);
}

inline void apply_pmd_section(cvec& sx, cvec& sy, const PmdSection& s, const std::vector<double>& omega) {
  const auto& u = s.rotation;
  for (std::size_t k = 0; k < sx.size(); ++k) {
    const cd x = sx[k];
    const cd y = sy[k];
    const double half = 0.5 * omega[k] * s.dgd_s;
    const cd px{std::cos(half), std::sin(half)};
    sx[k] = (u[0] * x + u[1] * y) * px;
    sy[k] = (u[2] * x + u[3] * y) * std::conj(px);
  }
}

}  // namespace detail

/// Symmetric split-step Fourier solution of the Manakov equation over one
/// span: linear half step (dispersion and loss in the frequency domain),
/// nonlinear phase exp(j (8/9) gamma (|Ax|^2 + |Ay|^2) L_eff), linear half
/// step. Adjacent linear half steps are merged. PMD waveplates are applied
/// at the step boundary nearest to each section end; all linear operators
/// commute in the frequency domain, so their order within a merged linear
/// step is immaterial. With gamma == 0 the propagation is done in a single
/// frequency-domain pass.
inline SampledWaveform ssfm_propagate(const SampledWaveform& wave, const FiberSpanParams& span,
                                      const PmdRealization& pmd, const SsfmOptions& options = {},
                                      SsfmDiagnostics* diagnostics = nullptr) {
  wave.validate();
  span.validate();
  const std::size_t n = wave.size();
  const double length = span.length_m();
  const double alpha = span.alpha_per_m();
  const double beta2 = span.beta2();
  const double gamma = span.manakov_gamma_per_w_m();

  const auto f = fft::bin_frequencies(n, wave.sample_rate);
  std::vector<double> omega(n);
  for (std::size_t k = 0; k < n; ++k) omega[k] = 2.0 * constants::kPi * (f[k] + wave.center_freq_offset);

  auto linear = [&](double dz) {
    cvec h(n);
    const double amp = std::exp(-0.5 * alpha * dz);
    for (std::size_t k = 0; k < n; ++k) {
      const double phase = 0.5 * beta2 * omega[k] * omega[k] * dz;
      h[k] = amp * cd{std::cos(phase), std::sin(phase)};
    }
    return h;
  };
  auto apply = [](cvec& s, const cvec& h) {
    for (std::size_t k = 0; k < s.size(); ++k) s[k] *= h[k];
  };

  SsfmDiagnostics diag;
  SampledWaveform out = wave;
  cvec& sx = out.x_pol;
  cvec& sy = out.y_pol;
  fft::forward(sx);
  fft::forward(sy);

  diag.input_guard_level_db = detail::guard_level_db(sx, sy, options.guard_fraction);

  const int nsec = static_cast<int>(pmd.sections.size());

  if (gamma == 0.0) {
    // Linear channel: waveplates interleaved with fiber pieces, all in the
    // frequency domain.
    const int pieces = std::max(nsec, 1);
    const cvec h = linear(length / pieces);
    for (int s = 0; s < pieces; ++s) {
      apply(sx, h);
      apply(sy, h);
      if (s < nsec) detail::apply_pmd_section(sx, sy, pmd.sections[static_cast<std::size_t>(s)], omega);
    }
    diag.steps = pieces;
  } else {
    const int steps = std::max(1, static_cast<int>(std::ceil(length / (span.step_km * 1e3) - 1e-9)));
    const double h_nominal = length / steps;
    // Section s (1-based) ends after step round(s * steps / nsec).
    std::vector<int> boundary(static_cast<std::size_t>(nsec));
    for (int s = 0; s < nsec; ++s)
      boundary[static_cast<std::size_t>(s)] =
          std::max(1, static_cast<int>(std::lround(static_cast<double>(s + 1) * steps / nsec)));
    const cvec half = linear(0.5 * h_nominal);
    const cvec full = linear(h_nominal);
    const double l_eff = alpha > 0.0 ? 2.0 * std::sinh(0.5 * alpha * h_nominal) / alpha : h_nominal;

    apply(sx, half);
    apply(sy, half);
    std::size_t next_section = 0;
    for (int i = 0; i < steps; ++i) {
      fft::inverse(sx);
      fft::inverse(sy);
      for (std::size_t k = 0; k < n; ++k) {
        const double phi = gamma * (std::norm(sx[k]) + std::norm(sy[k])) * l_eff;
        const cd rot{std::cos(phi), std::sin(phi)};
        sx[k] *= rot;
        sy[k] *= rot;
      }
      fft::forward(sx);
      fft::forward(sy);
      while (next_section < pmd.sections.size() && boundary[next_section] == i + 1) {
        detail::apply_pmd_section(sx, sy, pmd.sections[next_section], omega);
        ++next_section;
      }
      const cvec& h = (i + 1 < steps) ? full : half;
      apply(sx, h);
      apply(sy, h);
    }
    diag.steps = steps;
  }

  diag.output_guard_level_db = detail::guard_level_db(sx, sy, options.guard_fraction);
  diag.alias_warning = diag.input_guard_level_db > options.guard_threshold_db ||
                       diag.output_guard_level_db > options.guard_threshold_db;
  if (diag.alias_warning && options.alias_policy == AliasPolicy::kError)
    throw Error("ssfm_propagate: spectral energy near the band edge exceeds the aliasing guard (" +
                std::to_string(std::max(diag.input_guard_level_db, diag.output_guard_level_db)) + " dB)");

  fft::inverse(sx);
  fft::inverse(sy);
  if (diagnostics) *diagnostics = diag;
  return out;
}

}  // namespace pbnlc
