#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "pbnlc/core/fft.hpp"
#include "pbnlc/core/filters.hpp"
#include "pbnlc/core/types.hpp"

namespace pbnlc {

/// Frequency offset of channel `index` out of `count`, center channel at 0.
inline double wdm_channel_offset(int index, int count, double spacing_hz) {
  return (static_cast<double>(index) - 0.5 * static_cast<double>(count - 1)) * spacing_hz;
}

namespace detail {

inline long long bins_for_offset(double offset_hz, std::size_t n, double sample_rate) {
  const double exact = offset_hz * static_cast<double>(n) / sample_rate;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-6)
    throw Error("wdm: channel offset is not an integer number of DFT bins of the record");
  return static_cast<long long>(rounded);
}

// Circular shift of the spectrum by `shift` bins (exact frequency shift of a
// periodic record).
inline void shift_spectrum(const cvec& spec, long long shift, cvec& acc) {
  const auto n = static_cast<long long>(spec.size());
  for (long long k = 0; k < n; ++k) {
    const long long dst = ((k + shift) % n + n) % n;
    acc[static_cast<std::size_t>(dst)] += spec[static_cast<std::size_t>(k)];
  }
}

}  // namespace detail

/// Sums frequency-shifted channels; channel i of N sits at
/// (i - (N-1)/2) * spacing. `channel_bandwidth` is the occupied bandwidth of
/// one channel used for the band-overflow check (defaults to the spacing).
inline SampledWaveform wdm_mux(const std::vector<SampledWaveform>& channels, double spacing_hz,
                               std::optional<double> channel_bandwidth = std::nullopt) {
  if (channels.empty()) throw Error("wdm_mux: no channels");
  const auto& first = channels.front();
  first.validate();
  const int count = static_cast<int>(channels.size());
  const double bw = channel_bandwidth.value_or(spacing_hz);
  if ((count - 1) * spacing_hz + bw > first.sample_rate * (1.0 + 1e-12))
    throw Error("wdm_mux: occupied band exceeds the simulation bandwidth");
  const std::size_t n = first.size();
  SampledWaveform out;
  out.sample_rate = first.sample_rate;
  out.center_freq_offset = 0.0;
  out.x_pol.assign(n, cd{0.0, 0.0});
  out.y_pol.assign(n, cd{0.0, 0.0});
  for (int i = 0; i < count; ++i) {
    const auto& ch = channels[static_cast<std::size_t>(i)];
    ch.validate();
    if (ch.size() != n || ch.sample_rate != first.sample_rate)
      throw Error("wdm_mux: channels must share length and sample rate");
    const long long shift = detail::bins_for_offset(wdm_channel_offset(i, count, spacing_hz), n, first.sample_rate);
    detail::shift_spectrum(fft::fft(ch.x_pol), shift, out.x_pol);
    detail::shift_spectrum(fft::fft(ch.y_pol), shift, out.y_pol);
  }
  fft::inverse(out.x_pol);
  fft::inverse(out.y_pol);
  return out;
}

/// Ideal band-select filter |f| <= bandwidth/2 around the center channel,
/// optionally followed by band-limited resampling to `output_rate`.
inline SampledWaveform wdm_demux_center(const SampledWaveform& wave, double spacing_hz, double bandwidth_hz,
                                        std::optional<double> output_rate = std::nullopt) {
  wave.validate();
  if (!(bandwidth_hz > 0.0) || bandwidth_hz > wave.sample_rate)
    throw Error("wdm_demux_center: bandwidth must lie in (0, sample_rate]");
  (void)spacing_hz;  // the center channel is always at offset 0
  const auto f = fft::bin_frequencies(wave.size(), wave.sample_rate);
  SampledWaveform out = wave;
  for (cvec* pol : {&out.x_pol, &out.y_pol}) {
    fft::forward(*pol);
    for (std::size_t k = 0; k < f.size(); ++k)
      if (std::abs(f[k]) > 0.5 * bandwidth_hz) (*pol)[k] = 0.0;
    fft::inverse(*pol);
  }
  if (output_rate) return resample(out, *output_rate);
  return out;
}

}  // namespace pbnlc
