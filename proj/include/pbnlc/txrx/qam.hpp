#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pbnlc/core/types.hpp"

namespace pbnlc {

using Bits = std::vector<std::uint8_t>;

namespace qam16 {

inline const double kScale = 1.0 / std::sqrt(10.0);

// Gray-coded PAM-4 level for a bit pair (b0 b1): 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
inline double level(std::uint8_t b0, std::uint8_t b1) {
  static constexpr std::array<double, 4> kLevels{-3.0, -1.0, 3.0, 1.0};
  return kLevels[static_cast<std::size_t>((b0 << 1) | b1)];
}

// Index of the nearest PAM-4 level (0..3 for -3,-1,+1,+3) of an unscaled coordinate.
inline int nearest_level_index(double v) {
  if (v < -2.0) return 0;
  if (v < 0.0) return 1;
  if (v < 2.0) return 2;
  return 3;
}

inline void level_bits(int index, std::uint8_t& b0, std::uint8_t& b1) {
  static constexpr std::array<std::uint8_t, 8> kBits{0, 0, 0, 1, 1, 1, 1, 0};
  b0 = kBits[static_cast<std::size_t>(2 * index)];
  b1 = kBits[static_cast<std::size_t>(2 * index + 1)];
}

/// Gray-mapped 16-QAM point for 4 bits (I pair first), unit average energy.
inline cd map(const std::uint8_t* b) { return cd{level(b[0], b[1]), level(b[2], b[3])} * kScale; }

/// Nearest constellation point.
inline cd decide(cd s) {
  static constexpr std::array<double, 4> kLv{-3.0, -1.0, 1.0, 3.0};
  const int i = nearest_level_index(s.real() / kScale);
  const int q = nearest_level_index(s.imag() / kScale);
  return cd{kLv[static_cast<std::size_t>(i)], kLv[static_cast<std::size_t>(q)]} * kScale;
}

inline void demap(cd s, std::uint8_t* out) {
  level_bits(nearest_level_index(s.real() / kScale), out[0], out[1]);
  level_bits(nearest_level_index(s.imag() / kScale), out[2], out[3]);
}

inline std::array<cd, 16> constellation() {
  std::array<cd, 16> pts{};
  for (int v = 0; v < 16; ++v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>((v >> 3) & 1), static_cast<std::uint8_t>((v >> 2) & 1),
                               static_cast<std::uint8_t>((v >> 1) & 1), static_cast<std::uint8_t>(v & 1)};
    pts[static_cast<std::size_t>(v)] = map(b);
  }
  return pts;
}

}  // namespace qam16

/// Maps a bit stream onto one polarization. Bit count must be divisible by 4.
inline cvec qam16_map_pol(const Bits& bits) {
  if (bits.size() % 4 != 0) throw Error("qam16_map: bit count must be divisible by 4");
  cvec out(bits.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = qam16::map(&bits[4 * i]);
  return out;
}

inline Bits qam16_demap_pol(const cvec& symbols) {
  Bits out(symbols.size() * 4);
  for (std::size_t i = 0; i < symbols.size(); ++i) qam16::demap(symbols[i], &out[4 * i]);
  return out;
}

/// Dual-polarization mapping: the first half of `bits` drives X, the second Y.
inline SymbolSequence qam16_map(const Bits& bits, double symbol_rate) {
  if (bits.size() % 8 != 0) throw Error("qam16_map: bit count must be divisible by 4 per polarization");
  const auto half = static_cast<std::ptrdiff_t>(bits.size() / 2);
  SymbolSequence s;
  s.symbol_rate = symbol_rate;
  s.x_pol = qam16_map_pol(Bits(bits.begin(), bits.begin() + half));
  s.y_pol = qam16_map_pol(Bits(bits.begin() + half, bits.end()));
  return s;
}

inline Bits qam16_demap(const SymbolSequence& symbols) {
  Bits x = qam16_demap_pol(symbols.x_pol);
  Bits y = qam16_demap_pol(symbols.y_pol);
  x.insert(x.end(), y.begin(), y.end());
  return x;
}

}  // namespace pbnlc
