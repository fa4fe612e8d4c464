#pragma once

#include <optional>

#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/coeffs/conv.hpp"
#include "pbnlc/triplets/triplet_set.hpp"

namespace pbnlc::defaults {

/// Reference system: 10 x 100 km SSMF, 0.2 dB/km, 17 ps/nm/km,
/// 1.2 /W/km, 32 GBd RRC with roll-off 0.1, half the dispersion
/// precompensated.
inline LinkParams link() { return {}; }
inline PulseSpec pulse() { return {}; }
inline CoeffQuadrature quadrature() { return {}; }

/// Truncation thresholds calibrated on the reference system with the
/// default quadrature: window 75 keeps 1681 triplets, window 37 keeps 737.
inline constexpr double kRhoWindow75 = 0.014291596080943004;
inline constexpr double kRhoWindow37 = 0.021423982201370144;
inline constexpr std::size_t kTripletsWindow75 = 1681;
inline constexpr std::size_t kTripletsWindow37 = 737;

/// Shipped threshold for `window` when `link`/`pulse` are the reference system.
inline std::optional<double> calibrated_rho(int window, const LinkParams& l = link(), const PulseSpec& p = pulse()) {
  if (link_hash(l, p) != link_hash(link(), pulse())) return std::nullopt;
  if (window == 75) return kRhoWindow75;
  if (window == 37) return kRhoWindow37;
  return std::nullopt;
}

}  // namespace pbnlc::defaults

namespace pbnlc {

/// Coefficients over the full window grid, truncated at `rho`.
inline CoefficientSet truncated_conv_coefficients(int window, double rho, const PulseSpec& pulse,
                                                  const LinkParams& link, const CoeffQuadrature& quad = {}) {
  const CoefficientSet full = conv_coefficients(pulse, link, TripletSet::full_grid(window), quad);
  return full.restrict_to(generate_triplet_set(window, rho, full));
}

}  // namespace pbnlc
