#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pbnlc/channel/amplifier.hpp"
#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/channel/wdm.hpp"
#include "pbnlc/txrx/transceiver.hpp"
#include "pbnlc/verify/oracles.hpp"

using namespace pbnlc;

namespace {

double pol_energy(const cvec& v) {
  double e = 0.0;
  for (const auto& x : v) e += std::norm(x);
  return e;
}

FiberSpanParams linear_span() {
  FiberSpanParams s;
  s.gamma_per_w_km = 0.0;
  s.pmd_ps_sqrt_km = 0.0;
  return s;
}

}  // namespace

TEST(Ssfm, LinearLosslessPreservesEnergyPerPolarization) {
  const SampledWaveform w = oracle::random_waveform(512, 4, 1e-3, 1);
  FiberSpanParams s = linear_span();
  s.alpha_db_per_km = 0.0;
  const SampledWaveform out = ssfm_propagate(w, s, PmdRealization::none());
  EXPECT_NEAR(pol_energy(out.x_pol) / pol_energy(w.x_pol), 1.0, 1e-9);
  EXPECT_NEAR(pol_energy(out.y_pol) / pol_energy(w.y_pol), 1.0, 1e-9);
}

TEST(Ssfm, AttenuationOver100KmIsTwentyDecibels) {
  const OracleReport r = oracle_ssfm_attenuation(OracleScale::kUnit);
  EXPECT_TRUE(r.pass) << r.deviation;
}

TEST(Ssfm, ConstantEnvelopeKerrRotation) {
  // Equal constant power P on both polarizations: phase (8/9) gamma 2P L.
  FiberSpanParams s;
  s.dispersion_ps_nm_km = 0.0;
  s.alpha_db_per_km = 0.0;
  s.pmd_ps_sqrt_km = 0.0;
  const double p = 5e-3;
  SampledWaveform w;
  w.sample_rate = 64e9;
  w.x_pol.assign(256, cd{std::sqrt(p), 0.0});
  w.y_pol = w.x_pol;
  const SampledWaveform out = ssfm_propagate(w, s, PmdRealization::none());
  const double phi = s.manakov_gamma_per_w_m() * 2.0 * p * s.length_m();
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(std::arg(out.x_pol[i]), phi - 2.0 * constants::kPi * std::round(phi / (2.0 * constants::kPi)),
                1e-9 * phi);
    EXPECT_NEAR(std::abs(out.x_pol[i]), std::sqrt(p), 1e-9 * std::sqrt(p));
  }
}

TEST(Ssfm, PureKerrClosedForm) {
  const OracleReport r = oracle_pure_kerr(OracleScale::kUnit);
  EXPECT_TRUE(r.pass) << r.deviation;
}

TEST(Ssfm, StepHalvingConverges) {
  const OracleReport r = oracle_ssfm_step_halving(OracleScale::kUnit);
  EXPECT_TRUE(r.pass) << r.deviation;
}

TEST(Ssfm, LinearLimitMatchesAnalyticDispersion) {
  const OracleReport r = oracle_dispersion_linear(OracleScale::kUnit);
  EXPECT_TRUE(r.pass) << r.deviation;
}

TEST(Ssfm, GammaZeroMatchesDispersionAndLossFilter) {
  const SampledWaveform w = oracle::random_waveform(256, 4, 1e-3, 2);
  const FiberSpanParams s = linear_span();
  const SampledWaveform out = ssfm_propagate(w, s, PmdRealization::none());
  SampledWaveform expect = cdc_filter(w, s.beta2(), s.length_m(), 1.0, +1);
  const double a = std::exp(-0.5 * s.alpha_per_m() * s.length_m());
  double dev = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    dev = std::max(dev, std::abs(out.x_pol[i] - a * expect.x_pol[i]));
    ref = std::max(ref, std::abs(a * expect.x_pol[i]));
  }
  EXPECT_LT(dev / ref, 1e-9);
}

TEST(Ssfm, PmdRealizationIsSeedReproducible) {
  FiberSpanParams s;
  s.step_km = 5.0;
  const SampledWaveform w = oracle::random_waveform(256, 4, 1e-3, 3);
  const SampledWaveform a = ssfm_propagate(w, s, PmdRealization::draw(s, 42));
  const SampledWaveform b = ssfm_propagate(w, s, PmdRealization::draw(s, 42));
  const SampledWaveform c = ssfm_propagate(w, s, PmdRealization::draw(s, 43));
  EXPECT_EQ(a.x_pol, b.x_pol);
  EXPECT_EQ(a.y_pol, b.y_pol);
  EXPECT_NE(a.x_pol, c.x_pol);
}

TEST(Ssfm, PmdSectionsAreUnitary) {
  FiberSpanParams s;
  const PmdRealization r = PmdRealization::draw(s, 7);
  ASSERT_EQ(r.sections.size(), static_cast<std::size_t>(s.pmd_sections));
  for (const auto& sec : r.sections) {
    const auto& u = sec.rotation;
    EXPECT_NEAR(std::norm(u[0]) + std::norm(u[1]), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(u[0] * std::conj(u[2]) + u[1] * std::conj(u[3])), 0.0, 1e-12);
  }
}

TEST(Ssfm, AliasGuardReportsBandEdgeEnergy) {
  SampledWaveform w;
  w.sample_rate = 64e9;
  std::mt19937_64 rng(4);
  w.x_pol = oracle::random_cvec(256, rng);  // white: fills the guard band
  w.y_pol = oracle::random_cvec(256, rng);
  FiberSpanParams s = linear_span();
  SsfmDiagnostics d;
  ssfm_propagate(w, s, PmdRealization::none(), {}, &d);
  EXPECT_TRUE(d.alias_warning);
  SsfmOptions strict;
  strict.alias_policy = AliasPolicy::kError;
  EXPECT_THROW(ssfm_propagate(w, s, PmdRealization::none(), strict), Error);
  const SampledWaveform clean = oracle::random_waveform(256, 4, 1e-3, 5);
  ssfm_propagate(clean, s, PmdRealization::none(), strict, &d);
  EXPECT_FALSE(d.alias_warning);
}

TEST(Edfa, ZeroGainWithoutNoiseIsIdentity) {
  const SampledWaveform w = oracle::random_waveform(128, 2, 1e-3, 6);
  std::mt19937_64 rng(1);
  const SampledWaveform out = edfa_amplify(w, 0.0, -std::numeric_limits<double>::infinity(), rng);
  EXPECT_EQ(out.x_pol, w.x_pol);
}

TEST(Edfa, NoiselessGainScalesPowerExactly) {
  const SampledWaveform w = oracle::random_waveform(128, 2, 1e-3, 7);
  std::mt19937_64 rng(1);
  const SampledWaveform out = edfa_amplify(w, 20.0, -std::numeric_limits<double>::infinity(), rng);
  EXPECT_NEAR(out.power() / w.power(), 100.0, 1e-10);
}

TEST(Edfa, AseVarianceMatchesPsdTimesBandwidth) {
  SampledWaveform w;
  w.sample_rate = 64e9;
  w.x_pol.assign(1000000, cd{0.0, 0.0});
  w.y_pol = w.x_pol;
  std::mt19937_64 rng(8);
  const SampledWaveform out = edfa_amplify(w, 20.0, 5.0, rng);
  const double expect = ase_psd_per_pol(20.0, 5.0) * w.sample_rate;
  EXPECT_NEAR(mean_power(out.x_pol) / expect, 1.0, 0.02);
  EXPECT_NEAR(mean_power(out.y_pol) / expect, 1.0, 0.02);
}

TEST(Edfa, RejectsNegativeGain) {
  const SampledWaveform w = oracle::random_waveform(64, 2, 1e-3, 9);
  std::mt19937_64 rng(1);
  EXPECT_THROW(edfa_amplify(w, -1.0, 5.0, rng), Error);
}

TEST(PhaseNoise, ZeroLinewidthIsIdentity) {
  const SampledWaveform w = oracle::random_waveform(64, 2, 1e-3, 10);
  std::mt19937_64 rng(1);
  EXPECT_EQ(laser_phase_noise(w, 0.0, rng).x_pol, w.x_pol);
}

TEST(PhaseNoise, IncrementVarianceAndIndependence) {
  std::mt19937_64 rng(11);
  const std::size_t n = 1000000;
  const auto ph = wiener_phase(n, 100e3, 32e9, rng);
  std::vector<double> d(n - 1);
  for (std::size_t i = 1; i < n; ++i) d[i - 1] = ph[i] - ph[i - 1];
  double var = 0.0;
  double lag = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    var += d[i] * d[i];
    if (i) lag += d[i] * d[i - 1];
  }
  const double expect = 2.0 * constants::kPi * 100e3 / 32e9;
  EXPECT_NEAR(var / static_cast<double>(d.size()) / expect, 1.0, 0.02);
  EXPECT_LT(std::abs(lag / var), 0.01);
}

TEST(Wdm, SingleChannelMuxIsIdentity) {
  const SampledWaveform w = oracle::random_waveform(128, 4, 1e-3, 12);
  const SampledWaveform m = wdm_mux({w}, 50e9);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_LT(std::abs(m.x_pol[i] - w.x_pol[i]), 1e-15);
}

TEST(Wdm, CenterChannelLoopBack) {
  // 5 channels at 50 GHz in a 512 GHz band; neighbors silent.
  const std::size_t symbols = 512;
  const int sps = 16;
  const SampledWaveform center = oracle::random_waveform(symbols, sps, 1e-3, 13);
  SampledWaveform silent = center;
  std::fill(silent.x_pol.begin(), silent.x_pol.end(), cd{0.0, 0.0});
  std::fill(silent.y_pol.begin(), silent.y_pol.end(), cd{0.0, 0.0});
  const SampledWaveform m = wdm_mux({silent, silent, center, silent, silent}, 50e9, 35.2e9);
  const SampledWaveform d = wdm_demux_center(m, 50e9, 40e9);
  double err = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) err += std::norm(d.x_pol[i] - center.x_pol[i]);
  EXPECT_LT(10.0 * std::log10(err / pol_energy(center.x_pol)), -50.0);
}

TEST(Wdm, NeighborsAreRejected) {
  const std::size_t symbols = 512;
  const SampledWaveform ch = oracle::random_waveform(symbols, 16, 1e-3, 14);
  SampledWaveform silent = ch;
  std::fill(silent.x_pol.begin(), silent.x_pol.end(), cd{0.0, 0.0});
  std::fill(silent.y_pol.begin(), silent.y_pol.end(), cd{0.0, 0.0});
  const SampledWaveform m = wdm_mux({ch, ch, silent, ch, ch}, 50e9, 35.2e9);
  const SampledWaveform d = wdm_demux_center(m, 50e9, 40e9);
  EXPECT_LT(pol_energy(d.x_pol) / pol_energy(ch.x_pol), 1e-6);
}

TEST(Wdm, OccupancyOfFiveChannelsFitsTheBand) {
  TxConfig tx;
  tx.num_channels = 5;
  const double occupied = (tx.num_channels - 1) * tx.channel_spacing_hz + tx.channel_bandwidth();
  EXPECT_NEAR(occupied, 235.2e9, 1.0);
  EXPECT_LT(occupied, 320e9);
  const SampledWaveform w = oracle::random_waveform(64, 10, 1e-3, 15);  // 320 GHz
  EXPECT_NO_THROW(wdm_mux({w, w, w, w, w}, 50e9, tx.channel_bandwidth()));
  const SampledWaveform narrow = oracle::random_waveform(64, 4, 1e-3, 15);  // 128 GHz
  EXPECT_THROW(wdm_mux({narrow, narrow, narrow, narrow, narrow}, 50e9, tx.channel_bandwidth()), Error);
}

TEST(Link, LowPowerNoiselessLinkIsInvertedByPostCdc) {
  LinkParams link;
  link.span.pmd_ps_sqrt_km = 0.0;
  link.span.step_km = 2.0;
  TxConfig tx;
  tx.samples_per_symbol = 4;
  tx.pre_cdc_fraction = 0.0;
  tx.laser_linewidth_hz = 0.0;
  tx.launch_power_dbm_per_channel = -10.0;
  std::mt19937_64 rng(16);
  Bits bits(8 * 4096);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  const TxResult sent = transmit(bits, tx, link);
  SampledWaveform w = sent.wave;
  for (int s = 0; s < link.spans; ++s) {
    w = ssfm_propagate(w, link.span, PmdRealization::none());
    const double g = std::sqrt(db_to_linear(link.gain_db()));
    for (auto& v : w.x_pol) v *= g;
    for (auto& v : w.y_pol) v *= g;
  }
  RxConfig rx;
  rx.post_cdc_fraction = 1.0;
  const SampledWaveform front = receiver_front_end(w, tx, rx, link, rng);
  const SymbolSequence& ref = sent.center_symbols();
  // Remove the mean nonlinear phase (a pure rotation) before comparing.
  cd acc{0.0, 0.0};
  for (std::size_t k = 0; k < ref.size(); ++k)
    acc += front.x_pol[2 * k] * std::conj(ref.x_pol[k]) + front.y_pol[2 * k] * std::conj(ref.y_pol[k]);
  const cd rot = std::polar(1.0, -std::arg(acc));
  double err = 0.0;
  double pow = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    err += std::norm(rot * front.x_pol[2 * k] - ref.x_pol[k]) + std::norm(rot * front.y_pol[2 * k] - ref.y_pol[k]);
    pow += std::norm(ref.x_pol[k]) + std::norm(ref.y_pol[k]);
  }
  EXPECT_LT(10.0 * std::log10(err / pow), -30.0);
}
