#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pbnlc/core/types.hpp"
#include "pbnlc/txrx/config.hpp"
#include "pbnlc/txrx/qam.hpp"

namespace pbnlc {

struct LmsReport {
  double final_training_mse = 0.0;
  double final_phase = 0.0;
  std::vector<cd> taps_xx, taps_xy, taps_yx, taps_yy;
};

/// 2x2 butterfly LMS equalizer. Input is sampled at 2 samples/symbol with
/// symbol k at sample 2k; output is one sample per symbol. The first
/// cfg.lms_train_symbols outputs are trained against `known` (data-aided),
/// the remainder is decision-directed. Errors are formed after removing a
/// common carrier phase tracked by a first-order decision-directed loop, so
/// the taps model the polarization channel rather than the laser phase; the
/// returned symbols are not derotated.
inline SymbolSequence lms_equalize_2x2(const SampledWaveform& in, double symbol_rate, const SymbolSequence& known,
                                       const RxConfig& cfg, LmsReport* report = nullptr) {
  in.validate();
  cfg.validate();
  if (in.size() % 2 != 0) throw Error("lms_equalize_2x2: input must hold an even number of samples (2 sps)");
  const std::size_t nsym = in.size() / 2;
  const std::size_t train = std::min(cfg.lms_train_symbols, nsym);
  if (known.size() < train) throw Error("lms_equalize_2x2: training prefix shorter than lms_train_symbols");

  const int ntaps = cfg.lms_taps;
  const int center = ntaps / 2;
  std::vector<cd> hxx(static_cast<std::size_t>(ntaps)), hxy(hxx.size()), hyx(hxx.size()), hyy(hxx.size());
  hxx[static_cast<std::size_t>(center)] = 1.0;
  hyy[static_cast<std::size_t>(center)] = 1.0;

  const auto n = static_cast<long long>(in.size());
  // Targets have unit energy, so the reference level is at least 1.
  const double in_power = std::max(0.5 * in.power(), 1.0);
  const double mu = cfg.lms_step;
  double phase = 0.0;

  SymbolSequence out;
  out.symbol_rate = symbol_rate;
  out.x_pol.resize(nsym);
  out.y_pol.resize(nsym);

  std::vector<cd> wx(hxx.size()), wy(hxx.size());
  double block_power = 0.0;
  double train_mse = 0.0;
  std::size_t train_count = 0;
  constexpr std::size_t kBlock = 1024;

  for (std::size_t k = 0; k < nsym; ++k) {
    const long long base = 2 * static_cast<long long>(k) + center;
    for (int i = 0; i < ntaps; ++i) {
      const auto idx = static_cast<std::size_t>(((base - i) % n + n) % n);
      wx[static_cast<std::size_t>(i)] = in.x_pol[idx];
      wy[static_cast<std::size_t>(i)] = in.y_pol[idx];
    }
    cd yx{0.0, 0.0};
    cd yy{0.0, 0.0};
    for (std::size_t i = 0; i < wx.size(); ++i) {
      yx += hxx[i] * wx[i] + hxy[i] * wy[i];
      yy += hyx[i] * wx[i] + hyy[i] * wy[i];
    }
    out.x_pol[k] = yx;
    out.y_pol[k] = yy;

    const cd derot{std::cos(phase), -std::sin(phase)};
    const cd ux = yx * derot;
    const cd uy = yy * derot;
    const bool training = k < train;
    const cd dx = training ? known.x_pol[k] : qam16::decide(ux);
    const cd dy = training ? known.y_pol[k] : qam16::decide(uy);
    const cd rot = std::conj(derot);
    const cd ex = (dx - ux) * rot;
    const cd ey = (dy - uy) * rot;
    if (training && k + 2048 >= train) {
      train_mse += 0.5 * (std::norm(dx - ux) + std::norm(dy - uy));
      ++train_count;
    }
    for (std::size_t i = 0; i < wx.size(); ++i) {
      const cd cx = std::conj(wx[i]);
      const cd cy = std::conj(wy[i]);
      hxx[i] += mu * ex * cx;
      hxy[i] += mu * ex * cy;
      hyx[i] += mu * ey * cx;
      hyy[i] += mu * ey * cy;
    }
    const double detector = (ux * std::conj(dx)).imag() / std::max(std::norm(dx), 1e-12) +
                            (uy * std::conj(dy)).imag() / std::max(std::norm(dy), 1e-12);
    phase += 0.5 * cfg.lms_phase_gain * detector;

    block_power += 0.5 * (std::norm(yx) + std::norm(yy));
    if ((k + 1) % kBlock == 0) {
      const double mean = block_power / kBlock;
      if (!std::isfinite(mean) || mean > 10.0 * in_power)
        throw Error("lms_equalize_2x2: divergence detected at symbol " + std::to_string(k) +
                    " (output power " + std::to_string(mean) + " vs input power " + std::to_string(in_power) +
                    "); reduce lms_step");
      block_power = 0.0;
    }
  }
  if (report) {
    report->final_training_mse = train_count ? train_mse / static_cast<double>(train_count) : 0.0;
    report->final_phase = phase;
    report->taps_xx = hxx;
    report->taps_xy = hxy;
    report->taps_yx = hyx;
    report->taps_yy = hyy;
  }
  return out;
}

}  // namespace pbnlc
