#pragma once

#include <cstdint>

#include "pbnlc/core/types.hpp"

namespace pbnlc {

struct TxConfig {
  double symbol_rate = 32e9;
  double rolloff = 0.1;
  int rrc_span_symbols = 64;
  int samples_per_symbol = 16;
  double pre_cdc_fraction = 0.5;
  double launch_power_dbm_per_channel = 2.0;
  int num_channels = 1;
  double channel_spacing_hz = 50e9;
  double laser_linewidth_hz = 100e3;
  std::uint64_t rng_seed = 1;

  double sample_rate() const { return symbol_rate * samples_per_symbol; }
  /// Occupied bandwidth of one channel, (1 + rolloff) x symbol rate.
  double channel_bandwidth() const { return (1.0 + rolloff) * symbol_rate; }

  void validate() const {
    if (!(symbol_rate > 0.0)) throw Error("TxConfig: symbol_rate must be positive");
    if (!(pre_cdc_fraction >= 0.0 && pre_cdc_fraction <= 1.0)) throw Error("TxConfig: pre_cdc_fraction in [0,1]");
    if (num_channels < 1) throw Error("TxConfig: num_channels must be >= 1");
    if (samples_per_symbol < 2) throw Error("TxConfig: samples_per_symbol must be >= 2");
  }
};

struct RxConfig {
  double post_cdc_fraction = 0.5;
  int lms_taps = 21;
  double lms_step = 1e-3;
  std::size_t lms_train_symbols = 20000;
  double lms_phase_gain = 0.02;  // decision-directed phase tracker inside the equalizer
  int bps_test_phases = 32;
  int bps_window = 64;
  std::size_t pilot_symbols = 256;

  void validate() const {
    if (lms_taps < 1 || lms_taps % 2 == 0) throw Error("RxConfig: lms_taps must be odd");
    if (bps_test_phases < 8) throw Error("RxConfig: bps_test_phases must be >= 8");
    if (bps_window < 1) throw Error("RxConfig: bps_window must be >= 1");
    if (!(post_cdc_fraction >= 0.0 && post_cdc_fraction <= 1.0)) throw Error("RxConfig: post_cdc_fraction in [0,1]");
  }
};

}  // namespace pbnlc
