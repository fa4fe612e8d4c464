#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pbnlc/coeffs/conv.hpp"

using namespace pbnlc;

namespace {

// Full window-75 grid on the reference link (10 x 100 km, 17 ps/nm/km).
const CoefficientSet& reference_grid() {
  static const CoefficientSet c = conv_coefficients(PulseSpec{}, LinkParams{}, TripletSet::full_grid(75));
  return c;
}

LinkParams dispersion_free(int spans, double alpha_db_km) {
  LinkParams l;
  l.spans = spans;
  l.span.dispersion_ps_nm_km = 0.0;
  l.span.alpha_db_per_km = alpha_db_km;
  return l;
}

double rrc_impulse(double beta, double x) {
  const double pi = constants::kPi;
  if (std::abs(x) < 1e-12) return 1.0 - beta + 4.0 * beta / pi;
  if (std::abs(std::abs(x) - 0.25 / beta) < 1e-9)
    return beta / std::sqrt(2.0) *
           ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * beta)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * beta)));
  return (std::sin(pi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(pi * x * (1.0 + beta))) /
         (pi * x * (1.0 - 16.0 * beta * beta * x * x));
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(ConvCoefficients, DispersionFreePulsesDoNotOverlap) {
  PulseSpec wide;
  wide.rolloff = 1.0;
  const CoefficientSet c = conv_coefficients(wide, dispersion_free(1, 0.0), TripletSet::full_grid(9));
  const double c00 = std::abs(c.at(0, 0));
  ASSERT_GT(c00, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.set[i].m * c.set[i].n != 0) {
      EXPECT_LT(std::abs(c.values[i]) / c00, 1e-2) << c.set[i].m << "," << c.set[i].n;
    }
  }
}

TEST(ConvCoefficients, DispersionFreeMatchesTimeDomainOverlap) {
  // Roll-off 0.1 tails overlap: compare with a direct time-domain sum of the
  // closed-form pulse, C(m,n) = L (1/T) int g(t) g(t-mT) g(t-(m+n)T) g(t-nT) dt.
  const double beta = 0.1;
  const int sps = 64;
  const int span = 400;
  std::vector<double> g(static_cast<std::size_t>(span * sps + 1));
  double energy = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = rrc_impulse(beta, (static_cast<double>(i) - span * sps / 2.0) / sps);
    energy += g[i] * g[i] / sps;
  }
  for (auto& v : g) v /= std::sqrt(energy);
  const auto at = [&](long i) { return i < 0 || i >= static_cast<long>(g.size()) ? 0.0 : g[static_cast<std::size_t>(i)]; };
  const auto overlap = [&](int m, int n) {
    double sum = 0.0;
    for (long i = 0; i < static_cast<long>(g.size()); ++i)
      sum += at(i) * at(i - m * sps) * at(i - (m + n) * sps) * at(i - n * sps);
    return sum / sps;
  };
  PulseSpec p;
  p.rolloff = beta;
  const CoefficientSet c = conv_coefficients(p, dispersion_free(1, 0.0), TripletSet::full_grid(7));
  for (const auto& t : std::vector<TripletIndex>{{0, 0}, {1, 1}, {1, -1}, {0, 2}, {2, 3}}) {
    EXPECT_NEAR(c.at(t.m, t.n).real() / 100e3, overlap(t.m, t.n), 2e-4) << t.m << "," << t.n;
    EXPECT_NEAR(c.at(t.m, t.n).imag(), 0.0, 1e-9 * c.max_abs());
  }
}

TEST(ConvCoefficients, DispersionFreeCenterIsLinkLengthTimesPulseOverlap) {
  // Without dispersion C(0,0) = L * (1/T) int |g|^4 dt, and the time integral
  // is between 0 and 1 for a unit-energy pulse.
  const CoefficientSet c = conv_coefficients(PulseSpec{}, dispersion_free(1, 0.0), TripletSet::full_grid(3));
  const double r = c.at(0, 0).real() / 100e3;
  EXPECT_GT(r, 0.5);
  EXPECT_LT(r, 1.0);
  EXPECT_NEAR(c.at(0, 0).imag(), 0.0, 1e-9 * c.at(0, 0).real());
}

TEST(ConvCoefficients, LinearInPowerProfile) {
  const TripletSet set = TripletSet::full_grid(5);
  const CoefficientSet one = conv_coefficients(PulseSpec{}, dispersion_free(1, 0.2), set);
  const CoefficientSet three = conv_coefficients(PulseSpec{}, dispersion_free(3, 0.2), set);
  for (std::size_t i = 0; i < set.size(); ++i)
    EXPECT_NEAR(std::abs(three.values[i] - 3.0 * one.values[i]), 0.0, 1e-9 * one.max_abs());
  // Loss shrinks every coefficient by the effective-length ratio.
  const CoefficientSet lossless = conv_coefficients(PulseSpec{}, dispersion_free(1, 0.0), set);
  const PowerProfile p = PowerProfile::of(dispersion_free(1, 0.2));
  EXPECT_NEAR(one.at(0, 0).real() / lossless.at(0, 0).real(), p.effective_length() / 100e3, 1e-4);
}

TEST(ConvCoefficients, ExactSymmetries) {
  const CoefficientSet& c = reference_grid();
  for (const auto& t : c.set.indices()) {
    EXPECT_EQ(c.at(t.m, t.n), c.at(t.n, t.m));
    EXPECT_EQ(c.at(t.m, t.n), c.at(-t.m, -t.n));
    EXPECT_EQ(c.at(-t.m, t.n), std::conj(c.at(t.m, t.n)));
  }
}

TEST(ConvCoefficients, CenterDominates) {
  const CoefficientSet& c = reference_grid();
  const double c00 = std::abs(c.at(0, 0));
  EXPECT_EQ(c.max_abs(), c00);
  for (const auto& v : c.values) EXPECT_LE(std::abs(v), c00);
}

TEST(ConvCoefficients, ConvergedAtDefaultQuadrature) {
  std::vector<TripletIndex> idx;
  for (int m = -3; m <= 3; ++m)
    for (int n = -3; n <= 3; ++n) idx.push_back({m, n});
  idx.push_back({12, 9});
  idx.push_back({-17, 14});
  const TripletSet set(idx, 37);
  EXPECT_LT(coefficient_convergence_error(PulseSpec{}, LinkParams{}, set), 1e-3);
}

TEST(ConvCoefficients, DeterministicAndDataIndependent) {
  const TripletSet set = TripletSet::full_grid(7);
  const CoefficientSet a = conv_coefficients(PulseSpec{}, LinkParams{}, set);
  const CoefficientSet b = conv_coefficients(PulseSpec{}, LinkParams{}, set);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.link_hash, b.link_hash);
  EXPECT_EQ(a.scaling, CoefficientScaling::kAnalytic);
}

TEST(ConvCoefficients, SubsetMatchesFullGrid) {
  const CoefficientSet full = conv_coefficients(PulseSpec{}, LinkParams{}, TripletSet::full_grid(9));
  const TripletSet sub({{0, 0}, {1, 2}, {2, 1}, {-3, 4}, {4, -3}}, 9);
  const CoefficientSet direct = conv_coefficients(PulseSpec{}, LinkParams{}, sub);
  const CoefficientSet restricted = full.restrict_to(sub);
  for (std::size_t i = 0; i < sub.size(); ++i)
    EXPECT_NEAR(std::abs(direct.values[i] - restricted.values[i]), 0.0, 1e-6 * full.max_abs());
}

TEST(ConvCoefficients, RejectsBadInput) {
  CoeffQuadrature q;
  q.z_steps_per_span = 3;
  EXPECT_THROW(conv_coefficients(PulseSpec{}, LinkParams{}, TripletSet::full_grid(3), q), Error);
  q = CoeffQuadrature{};
  q.samples_per_symbol = 4;
  EXPECT_THROW(conv_coefficients(PulseSpec{}, LinkParams{}, TripletSet::full_grid(3), q), Error);
  EXPECT_THROW(conv_coefficients(PulseSpec{}, LinkParams{}, TripletSet{}), Error);
}

TEST(PowerProfile, ResetsAtEverySpan) {
  const PowerProfile p = PowerProfile::of(LinkParams{});
  EXPECT_EQ(p(0.0), 1.0);
  EXPECT_EQ(p(100e3), 1.0);
  EXPECT_NEAR(p(100e3 - 1e-6), std::pow(10.0, -2.0), 1e-12);
  EXPECT_NEAR(p(250e3), p(50e3), 1e-12);
  EXPECT_NEAR(p(999e3), p(99e3), 1e-12);
  EXPECT_THROW(p(-1.0), Error);
  EXPECT_THROW(p(1001e3), Error);
}

TEST(DecayProfile, DecaysWithBand) {
  const auto rows = coefficient_decay_profile(reference_grid());
  std::vector<double> band;
  std::vector<double> mag;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) {
      EXPECT_LT(rows[i - 1].band, rows[i].band);
      EXPECT_GE(rows[i - 1].envelope, rows[i].envelope);
    }
    band.push_back(static_cast<double>(rows[i].band));
    mag.push_back(rows[i].max_abs);
  }
  EXPECT_EQ(rows.front().band, 0);
  EXPECT_LT(spearman(band, mag), -0.9);
}

TEST(DecayProfile, SingleEntryGivesSingleRow) {
  CoefficientSet c;
  c.set = TripletSet({{2, -3}}, 7);
  c.values = {cd{0.0, 2.0}};
  const auto rows = coefficient_decay_profile(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].band, 6);
  EXPECT_EQ(rows[0].count, 1u);
  EXPECT_EQ(rows[0].max_abs, 2.0);
  EXPECT_THROW(coefficient_decay_profile(CoefficientSet{}), Error);
}

TEST(EffectiveCoefficients, AppliesScalingFlag) {
  CoefficientSet c;
  c.set = TripletSet({{0, 0}, {1, 1}}, 3);
  c.values = {cd{2.0, 0.0}, cd{0.0, 1.0}};
  const EffectiveCoefficients a = effective_coefficients(c, 0.5);
  EXPECT_EQ(a.h[0], cd(0.0, 1.0));
  EXPECT_EQ(a.h[1], cd(-0.5, 0.0));
  EXPECT_EQ(a.v, a.h);
  c.scaling = CoefficientScaling::kAbsorbed;
  c.values_v = {cd{3.0, 0.0}, cd{4.0, 0.0}};
  const EffectiveCoefficients b = effective_coefficients(c, 0.5);
  EXPECT_EQ(b.h, c.values);
  EXPECT_EQ(b.v, c.values_v);
}

TEST(EffectiveCoefficients, NonlinearScale) {
  LinkParams l;
  l.span.gamma_per_w_km = 1.3;
  // (8/9) * 1.3e-3 /W/m * 0.5 * 1 mW
  EXPECT_NEAR(nonlinear_scale(l, 0.0), 8.0 / 9.0 * 1.3e-3 * 0.5e-3, 1e-18);
}
