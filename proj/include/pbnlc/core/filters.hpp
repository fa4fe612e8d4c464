#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "pbnlc/core/fft.hpp"
#include "pbnlc/core/types.hpp"

namespace pbnlc {

/// Group-velocity dispersion beta2 (s^2/m) from the dispersion parameter D
/// in ps/(nm km) at the given wavelength: beta2 = -D lambda^2 / (2 pi c).
inline double beta2_from_dispersion(double d_ps_nm_km, double wavelength_m = constants::kReferenceWavelength) {
  const double d_si = d_ps_nm_km * 1e-6;  // s/m^2
  return -d_si * wavelength_m * wavelength_m / (2.0 * constants::kPi * constants::kSpeedOfLight);
}

/// Root-raised-cosine taps sampled at `samples_per_symbol`, spanning
/// `span_symbols` symbols (span*sps + 1 taps), real, even, unit energy.
inline FilterTaps rrc_taps(double rolloff, int span_symbols, int samples_per_symbol) {
  if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw Error("rrc_taps: rolloff must lie in [0, 1]");
  if (span_symbols < 4) throw Error("rrc_taps: span_symbols must be >= 4");
  if (samples_per_symbol < 2) throw Error("rrc_taps: samples_per_symbol must be >= 2");

  const int n = span_symbols * samples_per_symbol + 1;
  const int mid = n / 2;
  const double b = rolloff;
  const double pi = constants::kPi;
  FilterTaps taps;
  taps.description = "rrc(beta=" + std::to_string(rolloff) + ",span=" + std::to_string(span_symbols) +
                     ",sps=" + std::to_string(samples_per_symbol) + ")";
  taps.coefficients.resize(static_cast<std::size_t>(n));
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i - mid) / samples_per_symbol;  // in symbol periods
    double h;
    if (std::abs(t) < 1e-12) {
      h = 1.0 - b + 4.0 * b / pi;
    } else if (b > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-12) {
      h = b / std::sqrt(2.0) *
          ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * b)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * b)));
    } else {
      h = (std::sin(pi * t * (1.0 - b)) + 4.0 * b * t * std::cos(pi * t * (1.0 + b))) /
          (pi * t * (1.0 - (4.0 * b * t) * (4.0 * b * t)));
    }
    taps.coefficients[static_cast<std::size_t>(i)] = h;
    energy += h * h;
  }
  const double norm = 1.0 / std::sqrt(energy);
  for (auto& c : taps.coefficients) c *= norm;
  return taps;
}

/// Frequency response of `taps` on an n-point grid, with tap index
/// (L-1)/2 placed at time zero (zero-delay alignment).
inline cvec centered_frequency_response(const FilterTaps& taps, std::size_t n) {
  const std::size_t len = taps.size();
  const std::size_t center = (len - 1) / 2;
  cvec h(n, cd{0.0, 0.0});
  for (std::size_t l = 0; l < len; ++l) {
    const std::size_t pos = (l + n - center % n) % n;
    h[pos] += taps.coefficients[l];
  }
  fft::forward(h);
  return h;
}

inline void apply_response(cvec& x, const cvec& response) {
  fft::forward(x);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] *= response[k];
  fft::inverse(x);
}

/// Circular convolution of both polarizations with `taps`, zero-delay
/// aligned: y[n] = sum_l h[l] x[(n - l + c) mod N], c = (L-1)/2.
/// Waveforms are treated as one period of a periodic signal (the same
/// convention as the split-step channel), so there is no edge transient and
/// the output length equals the input length.
inline SampledWaveform apply_filter_fft(const SampledWaveform& wave, const FilterTaps& taps) {
  wave.validate();
  taps.validate();
  if (taps.size() > wave.size()) throw Error("apply_filter_fft: more taps than waveform samples");
  const cvec response = centered_frequency_response(taps, wave.size());
  SampledWaveform out = wave;
  apply_response(out.x_pol, response);
  apply_response(out.y_pol, response);
  return out;
}

/// All-pass quadratic-phase response exp(j * sign_phase * beta2/2 * w^2 * length)
/// on the absolute angular-frequency grid of an n-point waveform.
inline cvec dispersion_response(std::size_t n, double sample_rate, double center_freq_offset, double beta2,
                                double signed_length) {
  const auto f = fft::bin_frequencies(n, sample_rate);
  cvec h(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 2.0 * constants::kPi * (f[k] + center_freq_offset);
    const double phase = 0.5 * beta2 * w * w * signed_length;
    h[k] = {std::cos(phase), std::sin(phase)};
  }
  return h;
}

/// Chromatic-dispersion filter. sign = +1 emulates fiber dispersion over
/// fraction*total_length, sign = -1 compensates it.
inline SampledWaveform cdc_filter(const SampledWaveform& wave, double beta2, double total_length, double fraction,
                                  int sign) {
  wave.validate();
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error("cdc_filter: fraction must lie in [0, 1]");
  if (sign != 1 && sign != -1) throw Error("cdc_filter: sign must be +1 or -1");
  if (fraction == 0.0) return wave;
  const cvec h = dispersion_response(wave.size(), wave.sample_rate, wave.center_freq_offset, beta2,
                                     static_cast<double>(sign) * fraction * total_length);
  SampledWaveform out = wave;
  apply_response(out.x_pol, h);
  apply_response(out.y_pol, h);
  return out;
}

namespace detail {

// Band-limited periodic resampling of one polarization by spectrum
// truncation / zero padding.
inline cvec resample_spectrum(const cvec& x, std::size_t m) {
  const std::size_t n = x.size();
  cvec spec = fft::fft(x);
  cvec out(m, cd{0.0, 0.0});
  const std::size_t k = std::min(n, m);
  const std::size_t half = (k - 1) / 2;  // strictly positive/negative bins kept in full
  out[0] = spec[0];
  for (std::size_t i = 1; i <= half; ++i) {
    out[i] = spec[i];
    out[m - i] = spec[n - i];
  }
  if (k % 2 == 0) {
    const std::size_t ny = k / 2;
    if (m < n) {
      out[ny] = spec[ny] + spec[n - ny];
    } else if (m > n) {
      out[ny] = 0.5 * spec[ny];
      out[m - ny] = 0.5 * spec[ny];
    } else {
      out[ny] = spec[ny];
    }
  }
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  fft::inverse(out);
  return out;
}

}  // namespace detail

/// Band-limited resampling. The new length N*new_rate/rate must be an
/// integer (rational resampling of a periodic record); anything else is
/// rejected.
inline SampledWaveform resample(const SampledWaveform& wave, double new_rate) {
  wave.validate();
  if (!(new_rate > 0.0)) throw Error("resample: new_rate must be positive");
  if (new_rate == wave.sample_rate) return wave;
  const double exact = static_cast<double>(wave.size()) * new_rate / wave.sample_rate;
  const double rounded = std::round(exact);
  if (rounded < 1.0 || std::abs(exact - rounded) > 1e-6)
    throw Error("resample: rate ratio does not map the record to an integer length");
  const auto m = static_cast<std::size_t>(rounded);
  SampledWaveform out;
  out.sample_rate = new_rate;
  out.center_freq_offset = wave.center_freq_offset;
  out.x_pol = detail::resample_spectrum(wave.x_pol, m);
  out.y_pol = detail::resample_spectrum(wave.y_pol, m);
  return out;
}

}  // namespace pbnlc
