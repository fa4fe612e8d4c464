#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbnlc {

using cd = std::complex<double>;
using cvec = std::vector<cd>;

/// Base exception for every contract violation raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace constants {
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kReferenceWavelength = 1550e-9;
}  // namespace constants

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Complex product written out as four real multiplications. Used wherever
/// bitwise reproducibility between two code paths matters.
inline cd cmul(cd a, cd b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline double mean_power(const cvec& v) {
  double acc = 0.0;
  for (const auto& s : v) acc += std::norm(s);
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

/// Dual-polarization complex baseband waveform.
struct SampledWaveform {
  cvec x_pol;
  cvec y_pol;
  double sample_rate = 0.0;         // Hz
  double center_freq_offset = 0.0;  // Hz, relative to the simulation band center

  std::size_t size() const { return x_pol.size(); }

  void validate() const {
    if (x_pol.size() != y_pol.size()) throw Error("SampledWaveform: polarization lengths differ");
    if (x_pol.empty()) throw Error("SampledWaveform: empty waveform");
    if (!(sample_rate > 0.0)) throw Error("SampledWaveform: sample_rate must be positive");
  }

  /// Mean power summed over both polarizations (W when samples are in sqrt(W)).
  double power() const { return mean_power(x_pol) + mean_power(y_pol); }
};

/// Dual-polarization symbol stream at one sample per symbol.
struct SymbolSequence {
  cvec x_pol;
  cvec y_pol;
  double symbol_rate = 0.0;  // baud

  std::size_t size() const { return x_pol.size(); }
  double symbol_period() const { return 1.0 / symbol_rate; }

  cvec& pol(int p) { return p == 0 ? x_pol : y_pol; }
  const cvec& pol(int p) const { return p == 0 ? x_pol : y_pol; }

  void validate() const {
    if (x_pol.size() != y_pol.size()) throw Error("SymbolSequence: polarization lengths differ");
    if (!(symbol_rate > 0.0)) throw Error("SymbolSequence: symbol_rate must be positive");
  }
};

struct FilterTaps {
  cvec coefficients;
  std::string description;

  std::size_t size() const { return coefficients.size(); }

  void validate() const {
    if (coefficients.empty()) throw Error("FilterTaps: empty tap vector");
    for (const auto& c : coefficients)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw Error("FilterTaps: non-finite tap in '" + description + "'");
  }
};

/// Half-open symbol index range [begin, end).
struct SymbolRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool contains(std::size_t k) const { return k >= begin && k < end; }
  bool overlaps(const SymbolRange& o) const { return begin < o.end && o.begin < end; }
};

}  // namespace pbnlc
