#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "pbnlc/core/types.hpp"

namespace pbnlc {

/// Optical carrier frequency for the reference wavelength.
inline double carrier_frequency(double wavelength_m = constants::kReferenceWavelength) {
  return constants::kSpeedOfLight / wavelength_m;
}

/// One-sided ASE power spectral density per polarization, (G-1) h nu n_sp,
/// with n_sp = 10^(NF/10) / 2. NF = -inf disables the noise.
inline double ase_psd_per_pol(double gain_db, double noise_figure_db,
                              double wavelength_m = constants::kReferenceWavelength) {
  if (std::isinf(noise_figure_db) && noise_figure_db < 0) return 0.0;
  const double g = db_to_linear(gain_db);
  const double nsp = db_to_linear(noise_figure_db) / 2.0;
  return (g - 1.0) * constants::kPlanck * carrier_frequency(wavelength_m) * nsp;
}

/// Scales the field by sqrt(G) and adds circular white Gaussian ASE to each
/// polarization; the noise power per polarization is PSD x sample rate.
template <class Rng>
SampledWaveform edfa_amplify(const SampledWaveform& wave, double gain_db, double noise_figure_db, Rng& rng) {
  wave.validate();
  if (gain_db < 0.0) throw Error("edfa_amplify: gain must be >= 0 dB");
  const double amp = std::sqrt(db_to_linear(gain_db));
  const double noise_power = ase_psd_per_pol(gain_db, noise_figure_db) * wave.sample_rate;
  SampledWaveform out = wave;
  for (auto& s : out.x_pol) s *= amp;
  for (auto& s : out.y_pol) s *= amp;
  if (noise_power > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * noise_power));
    for (auto& s : out.x_pol) s += cd{normal(rng), normal(rng)};
    for (auto& s : out.y_pol) s += cd{normal(rng), normal(rng)};
  }
  return out;
}

/// Wiener phase process with increment variance 2 pi linewidth / rate,
/// starting at zero.
template <class Rng>
std::vector<double> wiener_phase(std::size_t n, double linewidth_hz, double rate_hz, Rng& rng) {
  if (linewidth_hz < 0.0) throw Error("laser_phase_noise: linewidth must be >= 0");
  std::vector<double> phase(n, 0.0);
  if (linewidth_hz == 0.0 || n == 0) return phase;
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * constants::kPi * linewidth_hz / rate_hz));
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    phase[i] = acc;
    acc += normal(rng);
  }
  return phase;
}

namespace detail {
inline void rotate_both(cvec& x, cvec& y, const std::vector<double>& phase) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const cd r{std::cos(phase[i]), std::sin(phase[i])};
    x[i] *= r;
    y[i] *= r;
  }
}
}  // namespace detail

/// Laser phase noise applied identically to both polarizations. The drawn
/// phase track is returned through `phase_out` when given.
template <class Rng>
SampledWaveform laser_phase_noise(const SampledWaveform& wave, double linewidth_hz, Rng& rng,
                                  std::vector<double>* phase_out = nullptr) {
  wave.validate();
  auto phase = wiener_phase(wave.size(), linewidth_hz, wave.sample_rate, rng);
  SampledWaveform out = wave;
  if (linewidth_hz > 0.0) detail::rotate_both(out.x_pol, out.y_pol, phase);
  if (phase_out) *phase_out = std::move(phase);
  return out;
}

template <class Rng>
SymbolSequence laser_phase_noise(const SymbolSequence& symbols, double linewidth_hz, Rng& rng,
                                 std::vector<double>* phase_out = nullptr) {
  symbols.validate();
  auto phase = wiener_phase(symbols.size(), linewidth_hz, symbols.symbol_rate, rng);
  SymbolSequence out = symbols;
  if (linewidth_hz > 0.0) detail::rotate_both(out.x_pol, out.y_pol, phase);
  if (phase_out) *phase_out = std::move(phase);
  return out;
}

}  // namespace pbnlc
