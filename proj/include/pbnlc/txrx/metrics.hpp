#pragma once

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

#include "pbnlc/core/types.hpp"
#include "pbnlc/txrx/qam.hpp"

namespace pbnlc {

enum class QStatus {
  kValid,
  kLowerBound,  // no bit errors: Q evaluated at BER = 1 / counted bits
  kInvalid,     // BER >= 0.5
};

inline const char* to_string(QStatus s) {
  switch (s) {
    case QStatus::kValid: return "valid";
    case QStatus::kLowerBound: return "lower_bound";
    case QStatus::kInvalid: return "invalid";
  }
  return "?";
}

struct MetricsReport {
  double ber = 0.0;
  double q_factor_db = 0.0;
  double evm_db = 0.0;
  std::size_t symbols_counted = 0;
  std::size_t bits_counted = 0;
  std::size_t bit_errors = 0;
  QStatus q_status = QStatus::kValid;
};

/// Q-factor in dB from a bit-error rate: 20 log10(sqrt(2) erfcinv(2 BER)).
/// Returns -infinity for BER >= 0.5.
inline double q_factor_db_from_ber(double ber) {
  if (!(ber > 0.0)) throw Error("q_factor_db_from_ber: BER must be positive");
  if (ber >= 0.5) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(std::sqrt(2.0) * boost::math::erfc_inv(2.0 * ber));
}

inline MetricsReport compute_metrics(const Bits& decided, const Bits& reference) {
  if (decided.size() != reference.size()) throw Error("compute_metrics: bit streams differ in length");
  if (decided.empty()) throw Error("compute_metrics: no bits to count");
  MetricsReport r;
  r.bits_counted = decided.size();
  r.symbols_counted = decided.size() / 4;
  for (std::size_t i = 0; i < decided.size(); ++i) r.bit_errors += (decided[i] != reference[i]) ? 1 : 0;
  r.ber = static_cast<double>(r.bit_errors) / static_cast<double>(r.bits_counted);
  if (r.bit_errors == 0) {
    r.q_status = QStatus::kLowerBound;
    r.q_factor_db = q_factor_db_from_ber(1.0 / static_cast<double>(r.bits_counted));
  } else if (r.ber >= 0.5) {
    r.q_status = QStatus::kInvalid;
    r.q_factor_db = -std::numeric_limits<double>::infinity();
  } else {
    r.q_factor_db = q_factor_db_from_ber(r.ber);
  }
  return r;
}

/// BER/Q over a symbol range of both polarizations, plus EVM against the
/// transmitted symbols.
inline MetricsReport compute_metrics(const SymbolSequence& received, const SymbolSequence& transmitted,
                                     SymbolRange range) {
  if (received.size() != transmitted.size() || range.end > received.size() || range.size() == 0)
    throw Error("compute_metrics: invalid symbol range");
  Bits decided;
  Bits reference;
  decided.reserve(8 * range.size());
  reference.reserve(8 * range.size());
  double err = 0.0;
  double ref = 0.0;
  std::uint8_t b[4];
  for (int p = 0; p < 2; ++p) {
    const auto& rx = received.pol(p);
    const auto& tx = transmitted.pol(p);
    for (std::size_t k = range.begin; k < range.end; ++k) {
      qam16::demap(rx[k], b);
      decided.insert(decided.end(), b, b + 4);
      qam16::demap(tx[k], b);
      reference.insert(reference.end(), b, b + 4);
      err += std::norm(rx[k] - tx[k]);
      ref += std::norm(tx[k]);
    }
  }
  MetricsReport r = compute_metrics(decided, reference);
  r.symbols_counted = 2 * range.size();
  r.evm_db = 10.0 * std::log10(err / ref);
  return r;
}

}  // namespace pbnlc
