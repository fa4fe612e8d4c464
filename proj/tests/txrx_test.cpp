#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pbnlc/txrx/cpr.hpp"
#include "pbnlc/txrx/equalizer.hpp"
#include "pbnlc/txrx/metrics.hpp"
#include "pbnlc/txrx/qam.hpp"
#include "pbnlc/txrx/transceiver.hpp"

using namespace pbnlc;

namespace {

Bits random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bits b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng() >> 63);
  return b;
}

SymbolSequence random_qam(std::size_t n, std::uint64_t seed) { return qam16_map(random_bits(8 * n, seed), 32e9); }

// Raised-cosine (RRC cascade) waveform at 2 samples/symbol: ISI free at the
// even samples.
SampledWaveform rc_wave(const SymbolSequence& s) {
  const FilterTaps t = rrc_taps(0.1, 64, 2);
  return apply_filter_fft(apply_filter_fft(upsample_symbols(s, 2), t), t);
}

double evm_db(const SymbolSequence& y, const SymbolSequence& ref, std::size_t from) {
  double e = 0.0;
  double p = 0.0;
  for (std::size_t k = from; k < ref.size(); ++k) {
    e += std::norm(y.x_pol[k] - ref.x_pol[k]) + std::norm(y.y_pol[k] - ref.y_pol[k]);
    p += std::norm(ref.x_pol[k]) + std::norm(ref.y_pol[k]);
  }
  return 10.0 * std::log10(e / p);
}

void add_noise(SymbolSequence& s, double snr_db, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 / db_to_linear(snr_db)));
  for (auto* pol : {&s.x_pol, &s.y_pol})
    for (auto& v : *pol) v += cd{g(rng), g(rng)};
}

int bit_distance(cd a, cd b) {
  std::uint8_t x[4];
  std::uint8_t y[4];
  qam16::demap(a, x);
  qam16::demap(b, y);
  int d = 0;
  for (int i = 0; i < 4; ++i) d += x[i] != y[i];
  return d;
}

}  // namespace

TEST(Qam16, RoundTripOverAllSymbols) {
  for (int v = 0; v < 16; ++v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 3 & 1), static_cast<std::uint8_t>(v >> 2 & 1),
                               static_cast<std::uint8_t>(v >> 1 & 1), static_cast<std::uint8_t>(v & 1)};
    std::uint8_t out[4];
    qam16::demap(qam16::map(b), out);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(out[i], b[i]);
  }
  const Bits bits = random_bits(8000, 1);
  EXPECT_EQ(qam16_demap(qam16_map(bits, 32e9)), bits);
}

TEST(Qam16, UnitAverageEnergy) {
  double e = 0.0;
  for (const auto& p : qam16::constellation()) e += std::norm(p);
  EXPECT_NEAR(e / 16.0, 1.0, 1e-15);
}

TEST(Qam16, GrayNeighborsDifferInOneBit) {
  const auto pts = qam16::constellation();
  const double d = 2.0 * qam16::kScale;
  int pairs = 0;
  for (const auto& a : pts)
    for (const auto& b : pts)
      if (std::abs(std::abs(a - b) - d) < 1e-12) {
        EXPECT_EQ(bit_distance(a, b), 1);
        ++pairs;
      }
  EXPECT_EQ(pairs, 48);  // 24 horizontal/vertical neighbor pairs, both orders
}

TEST(Transmit, ZeroDbmLaunchIsOneMilliwatt) {
  TxConfig tx;
  tx.samples_per_symbol = 4;
  tx.launch_power_dbm_per_channel = 0.0;
  tx.laser_linewidth_hz = 0.0;
  const TxResult r = transmit(random_bits(8 * 50000, 2), tx, LinkParams{});
  EXPECT_NEAR(r.wave.power() / 1e-3, 1.0, 0.005);
}

TEST(Transmit, NoPrecompensationIsPlainRrc) {
  TxConfig tx;
  tx.samples_per_symbol = 2;
  tx.pre_cdc_fraction = 0.0;
  tx.laser_linewidth_hz = 0.0;
  const Bits bits = random_bits(8 * 1024, 3);
  const TxResult r = transmit(bits, tx, LinkParams{});
  SampledWaveform plain = apply_filter_fft(upsample_symbols(qam16_map(bits, tx.symbol_rate), 2),
                                           rrc_taps(tx.rolloff, tx.rrc_span_symbols, 2));
  const double amp = std::sqrt(0.5 * dbm_to_watt(tx.launch_power_dbm_per_channel) * 2);
  for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_NEAR(std::abs(r.wave.x_pol[i] - amp * plain.x_pol[i]), 0.0, 1e-15);
}

TEST(Transmit, LoopBackIsErrorFree) {
  TxConfig tx;
  tx.samples_per_symbol = 2;
  tx.pre_cdc_fraction = 0.0;
  tx.laser_linewidth_hz = 0.0;
  RxConfig rx;
  rx.post_cdc_fraction = 0.0;
  rx.lms_train_symbols = 8192;
  const Bits bits = random_bits(8 * 100000, 4);
  const TxResult t = transmit(bits, tx, LinkParams{});
  std::mt19937_64 rng(5);
  const RxResult r = receive(t.wave, tx, rx, LinkParams{}, t.center_symbols(), SymbolRange{0, 256}, rng);
  ASSERT_EQ(r.symbols.size(), t.center_symbols().size());
  const MetricsReport m = compute_metrics(r.symbols, t.center_symbols(), {0, r.symbols.size()});
  EXPECT_EQ(m.bit_errors, 0u);
  EXPECT_EQ(m.bits_counted, 800000u);
}

TEST(Lms, IdentityChannel) {
  const SymbolSequence s = random_qam(20000, 6);
  RxConfig cfg;
  cfg.lms_train_symbols = 10000;
  const SymbolSequence y = lms_equalize_2x2(rc_wave(s), s.symbol_rate, s, cfg);
  EXPECT_LT(evm_db(y, s, 10000), -40.0);
}

TEST(Lms, NinetyDegreeRotation) {
  const SymbolSequence s = random_qam(20000, 7);
  SampledWaveform w = rc_wave(s);
  std::swap(w.x_pol, w.y_pol);
  for (auto& v : w.y_pol) v = -v;
  RxConfig cfg;
  cfg.lms_train_symbols = 10000;
  LmsReport rep;
  SymbolSequence y = lms_equalize_2x2(w, s.symbol_rate, s, cfg, &rep);
  // Output carries the tracked carrier phase; compare after removing it.
  const cd derot = std::polar(1.0, -rep.final_phase);
  for (auto* pol : {&y.x_pol, &y.y_pol})
    for (auto& v : *pol) v *= derot;
  EXPECT_LT(evm_db(y, s, 10000), -30.0);
}

TEST(Lms, TwoTapMixingChannel) {
  const SymbolSequence s = random_qam(20000, 8);
  const SampledWaveform w = rc_wave(s);
  SampledWaveform m = w;
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t d = (i + n - 2) % n;  // one symbol of delay
    m.x_pol[i] = 0.8 * w.x_pol[i] + 0.3 * w.y_pol[d];
    m.y_pol[i] = cd{0.0, 0.4} * w.x_pol[d] + 0.7 * w.y_pol[i];
  }
  RxConfig cfg;
  cfg.lms_train_symbols = 10000;
  const SymbolSequence y = lms_equalize_2x2(m, s.symbol_rate, s, cfg);
  EXPECT_LT(evm_db(y, s, 10000), -25.0);
}

TEST(Bps, NoPhaseNoiseLeavesSymbols) {
  const SymbolSequence s = random_qam(4000, 9);
  const BpsResult r = bps_cpr(s, RxConfig{}, &s, {0, 256});
  for (const double p : r.phase) EXPECT_NEAR(p, 0.0, 1e-12);
  EXPECT_LT(evm_db(r.symbols, s, 0), -100.0);
}

TEST(Bps, StaticRotation) {
  const SymbolSequence s = random_qam(4000, 10);
  SymbolSequence rot = s;
  const cd r20 = std::polar(1.0, 20.0 * constants::kPi / 180.0);
  for (auto* pol : {&rot.x_pol, &rot.y_pol})
    for (auto& v : *pol) v *= r20;
  const BpsResult r = bps_cpr(rot, RxConfig{}, &s, {0, 256});
  EXPECT_LT(evm_db(r.symbols, s, 0), -35.0);
}

TEST(Bps, TracksWienerPhaseNoise) {
  const SymbolSequence s = random_qam(50000, 11);
  std::mt19937_64 rng(12);
  const auto theta = wiener_phase(s.size(), 100e3, 32e9, rng);
  SymbolSequence y = s;
  for (std::size_t k = 0; k < s.size(); ++k) {
    y.x_pol[k] *= std::polar(1.0, theta[k]);
    y.y_pol[k] *= std::polar(1.0, theta[k]);
  }
  add_noise(y, 30.0, 13);
  const BpsResult r = bps_cpr(y, RxConfig{}, &s, {0, 256});
  double mse = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double e = std::remainder(r.phase[k] - theta[k], 2.0 * constants::kPi);
    mse += e * e;
  }
  EXPECT_LT(mse / static_cast<double>(s.size()), 1e-3);
}

TEST(Metrics, QFromBer) {
  EXPECT_NEAR(q_factor_db_from_ber(3.8e-3), 8.52, 0.01);
  EXPECT_NEAR(q_factor_db_from_ber(1e-3), 9.80, 0.02);
  double prev = std::numeric_limits<double>::infinity();
  for (double ber = 1e-9; ber < 0.5; ber *= 1.7) {
    const double q = q_factor_db_from_ber(ber);
    EXPECT_LT(q, prev);
    prev = q;
  }
}

TEST(Metrics, HalfBerIsInvalid) {
  Bits a(1000, 0);
  Bits b(1000, 0);
  for (std::size_t i = 0; i < b.size(); i += 2) b[i] = 1;
  const MetricsReport m = compute_metrics(a, b);
  EXPECT_EQ(m.ber, 0.5);
  EXPECT_EQ(m.q_status, QStatus::kInvalid);
  EXPECT_TRUE(std::isinf(m.q_factor_db));
}

TEST(Metrics, ErrorFreeIsALowerBound) {
  const Bits a = random_bits(4000, 14);
  const MetricsReport m = compute_metrics(a, a);
  EXPECT_EQ(m.bit_errors, 0u);
  EXPECT_EQ(m.q_status, QStatus::kLowerBound);
  EXPECT_NEAR(m.q_factor_db, q_factor_db_from_ber(1.0 / 4000.0), 1e-12);
}

TEST(Metrics, RejectsMismatchedStreams) {
  EXPECT_THROW(compute_metrics(Bits(8, 0), Bits(4, 0)), Error);
  EXPECT_THROW(compute_metrics(Bits{}, Bits{}), Error);
}
