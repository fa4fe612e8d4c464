#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "pbnlc/core/types.hpp"
#include "pbnlc/txrx/config.hpp"
#include "pbnlc/txrx/qam.hpp"

namespace pbnlc {

struct BpsResult {
  SymbolSequence symbols;
  std::vector<double> phase;  // applied derotation per symbol, ambiguity included
  int quadrant = 0;           // pi/2 ambiguity chosen from the pilots
};

/// Blind phase search carrier recovery. For every symbol the test phase in
/// [0, pi/2) minimizing the windowed decision distance (summed over both
/// polarizations, which share one laser) is selected, the track is
/// unwrapped, and the residual pi/2 ambiguity is resolved by majority
/// agreement with the known pilots in `pilot_range`.
inline BpsResult bps_cpr(const SymbolSequence& in, const RxConfig& cfg, const SymbolSequence* pilots = nullptr,
                         SymbolRange pilot_range = {}) {
  in.validate();
  cfg.validate();
  const std::size_t n = in.size();
  const int nb = cfg.bps_test_phases;
  const double step = 0.5 * constants::kPi / nb;
  BpsResult res;
  res.symbols = in;
  res.phase.assign(n, 0.0);
  if (n == 0) return res;

  std::vector<cd> rot(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) rot[static_cast<std::size_t>(b)] = {std::cos(b * step), -std::sin(b * step)};

  // dist[b * n + k]: decision distance of symbol k at test phase b.
  std::vector<double> dist(static_cast<std::size_t>(nb) * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (int b = 0; b < nb; ++b) {
      const cd r = rot[static_cast<std::size_t>(b)];
      const cd ux = in.x_pol[k] * r;
      const cd uy = in.y_pol[k] * r;
      dist[static_cast<std::size_t>(b) * n + k] = std::norm(ux - qam16::decide(ux)) + std::norm(uy - qam16::decide(uy));
    }
  }

  // Circular sliding window of cfg.bps_window symbols starting at k - window/2.
  const auto w = static_cast<long long>(std::min<std::size_t>(static_cast<std::size_t>(cfg.bps_window), n));
  const long long lead = w / 2;
  const auto nn = static_cast<long long>(n);
  std::vector<double> window_sum(static_cast<std::size_t>(nb), 0.0);
  for (int b = 0; b < nb; ++b) {
    const double* d = &dist[static_cast<std::size_t>(b) * n];
    double s = 0.0;
    for (long long i = -lead; i < w - lead; ++i) s += d[static_cast<std::size_t>((i % nn + nn) % nn)];
    window_sum[static_cast<std::size_t>(b)] = s;
  }

  const double quarter = 0.5 * constants::kPi;
  double previous = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    int best = 0;
    for (int b = 1; b < nb; ++b)
      if (window_sum[static_cast<std::size_t>(b)] < window_sum[static_cast<std::size_t>(best)]) best = b;
    double est = best * step;
    if (k > 0) est += quarter * std::round((previous - est) / quarter);
    res.phase[k] = est;
    previous = est;
    // Slide the window by one symbol.
    const auto kk = static_cast<long long>(k);
    const auto out_idx = static_cast<std::size_t>(((kk - lead) % nn + nn) % nn);
    const auto in_idx = static_cast<std::size_t>(((kk - lead + w) % nn + nn) % nn);
    for (int b = 0; b < nb; ++b) {
      const double* d = &dist[static_cast<std::size_t>(b) * n];
      window_sum[static_cast<std::size_t>(b)] += d[in_idx] - d[out_idx];
    }
  }

  if (pilots && pilot_range.size() > 0) {
    if (pilot_range.end > n || pilots->size() < pilot_range.end) throw Error("bps_cpr: pilot range out of bounds");
    int best_q = 0;
    std::size_t best_hits = 0;
    for (int q = 0; q < 4; ++q) {
      std::size_t hits = 0;
      for (std::size_t k = pilot_range.begin; k < pilot_range.end; ++k) {
        const double ph = res.phase[k] + q * quarter;
        const cd r{std::cos(ph), -std::sin(ph)};
        hits += qam16::decide(in.x_pol[k] * r) == pilots->x_pol[k];
        hits += qam16::decide(in.y_pol[k] * r) == pilots->y_pol[k];
      }
      if (hits > best_hits) {
        best_hits = hits;
        best_q = q;
      }
    }
    res.quadrant = best_q;
    for (auto& p : res.phase) p += best_q * quarter;
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (res.phase[k] == 0.0) continue;
    const cd r{std::cos(res.phase[k]), -std::sin(res.phase[k])};
    res.symbols.x_pol[k] = in.x_pol[k] * r;
    res.symbols.y_pol[k] = in.y_pol[k] * r;
  }
  return res;
}

}  // namespace pbnlc
