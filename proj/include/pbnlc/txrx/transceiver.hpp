#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pbnlc/channel/amplifier.hpp"
#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/channel/wdm.hpp"
#include "pbnlc/core/filters.hpp"
#include "pbnlc/core/types.hpp"
#include "pbnlc/txrx/config.hpp"
#include "pbnlc/txrx/cpr.hpp"
#include "pbnlc/txrx/equalizer.hpp"
#include "pbnlc/txrx/qam.hpp"

namespace pbnlc {

struct TxResult {
  SampledWaveform wave;
  std::vector<SymbolSequence> channel_symbols;
  int center_index = 0;

  const SymbolSequence& center_symbols() const { return channel_symbols[static_cast<std::size_t>(center_index)]; }
};

/// Zero-stuffs symbols to `sps` samples per symbol (symbol k at sample k*sps).
inline SampledWaveform upsample_symbols(const SymbolSequence& s, int sps) {
  SampledWaveform w;
  w.sample_rate = s.symbol_rate * sps;
  w.x_pol.assign(s.size() * static_cast<std::size_t>(sps), cd{0.0, 0.0});
  w.y_pol.assign(w.x_pol.size(), cd{0.0, 0.0});
  for (std::size_t k = 0; k < s.size(); ++k) {
    w.x_pol[k * static_cast<std::size_t>(sps)] = s.x_pol[k];
    w.y_pol[k * static_cast<std::size_t>(sps)] = s.y_pol[k];
  }
  return w;
}

/// Transmitter of one channel: RRC shaping, pre-CDC and power setting.
/// The launch power is split equally over both polarizations; with unit
/// energy symbols and unit energy taps the mean power is exact in expectation.
inline SampledWaveform shape_channel(const SymbolSequence& symbols, const TxConfig& tx, const LinkParams& link) {
  const FilterTaps taps = rrc_taps(tx.rolloff, tx.rrc_span_symbols, tx.samples_per_symbol);
  SampledWaveform w = apply_filter_fft(upsample_symbols(symbols, tx.samples_per_symbol), taps);
  w = cdc_filter(w, link.span.beta2(), link.total_length_m(), tx.pre_cdc_fraction, -1);
  const double amp = std::sqrt(0.5 * dbm_to_watt(tx.launch_power_dbm_per_channel) * tx.samples_per_symbol);
  for (auto& v : w.x_pol) v *= amp;
  for (auto& v : w.y_pol) v *= amp;
  return w;
}

/// Full transmitter: the center channel carries `center_bits` (first half on
/// X, second half on Y); the other channels carry random data from
/// tx.rng_seed. Each channel gets an independent transmit laser.
inline TxResult transmit(const Bits& center_bits, const TxConfig& tx, const LinkParams& link) {
  tx.validate();
  link.validate();
  TxResult res;
  res.center_index = tx.num_channels / 2;
  const SymbolSequence center = qam16_map(center_bits, tx.symbol_rate);
  std::mt19937_64 rng(tx.rng_seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<SampledWaveform> shaped;
  for (int c = 0; c < tx.num_channels; ++c) {
    SymbolSequence syms;
    if (c == res.center_index) {
      syms = center;
    } else {
      Bits bits(center_bits.size());
      for (auto& b : bits) b = coin(rng) ? 1 : 0;
      syms = qam16_map(bits, tx.symbol_rate);
    }
    SampledWaveform w = shape_channel(syms, tx, link);
    if (tx.laser_linewidth_hz > 0.0) w = laser_phase_noise(w, tx.laser_linewidth_hz, rng);
    res.channel_symbols.push_back(std::move(syms));
    shaped.push_back(std::move(w));
  }
  if (tx.num_channels == 1) {
    res.wave = std::move(shaped.front());
  } else {
    res.wave = wdm_mux(shaped, tx.channel_spacing_hz, tx.channel_bandwidth());
  }
  return res;
}

struct RxResult {
  SymbolSequence symbols;  // 1 sample/symbol after LMS and BPS
  LmsReport lms;
  std::vector<double> cpr_phase;
};

/// Linear front end up to (and including) the matched filter: LO phase
/// noise, center-channel selection with resampling to 2 samples/symbol,
/// post-CDC and RRC matched filtering. Output is normalized to unit mean
/// power per polarization at the symbol instants.
template <class Rng>
SampledWaveform receiver_front_end(const SampledWaveform& wave, const TxConfig& tx, const RxConfig& rx,
                                   const LinkParams& link, Rng& rng) {
  SampledWaveform w = wave;
  if (tx.laser_linewidth_hz > 0.0) w = laser_phase_noise(w, tx.laser_linewidth_hz, rng);
  w = wdm_demux_center(w, tx.channel_spacing_hz, tx.channel_bandwidth(), 2.0 * tx.symbol_rate);
  w = cdc_filter(w, link.span.beta2(), link.total_length_m(), rx.post_cdc_fraction, -1);
  w = apply_filter_fft(w, rrc_taps(tx.rolloff, tx.rrc_span_symbols, 2));
  double p = 0.0;
  for (std::size_t i = 0; i < w.size(); i += 2) p += std::norm(w.x_pol[i]) + std::norm(w.y_pol[i]);
  p /= static_cast<double>(w.size());  // N/2 instants x 2 pols
  const double scale = 1.0 / std::sqrt(p);
  for (auto& v : w.x_pol) v *= scale;
  for (auto& v : w.y_pol) v *= scale;
  return w;
}

/// Complete coherent receiver for the center channel: front end, 2x2 LMS
/// trained on `known`, BPS with the pi/2 ambiguity resolved on `pilots`.
template <class Rng>
RxResult receive(const SampledWaveform& wave, const TxConfig& tx, const RxConfig& rx, const LinkParams& link,
                 const SymbolSequence& known, SymbolRange pilots, Rng& rng) {
  rx.validate();
  const SampledWaveform front = receiver_front_end(wave, tx, rx, link, rng);
  RxResult res;
  const SymbolSequence eq = lms_equalize_2x2(front, tx.symbol_rate, known, rx, &res.lms);
  BpsResult cpr = bps_cpr(eq, rx, &known, pilots);
  res.symbols = std::move(cpr.symbols);
  res.cpr_phase = std::move(cpr.phase);
  return res;
}

}  // namespace pbnlc
