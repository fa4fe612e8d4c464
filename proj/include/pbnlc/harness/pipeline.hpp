#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>

#include "pbnlc/channel/amplifier.hpp"
#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/coeffs/conv.hpp"
#include "pbnlc/complexity/complexity.hpp"
#include "pbnlc/defaults.hpp"
#include "pbnlc/fnn/apply.hpp"
#include "pbnlc/fnn/train.hpp"
#include "pbnlc/harness/config.hpp"
#include "pbnlc/nlc/engines.hpp"
#include "pbnlc/nlc/kmeans.hpp"
#include "pbnlc/nlc/ls.hpp"
#include "pbnlc/txrx/metrics.hpp"
#include "pbnlc/txrx/transceiver.hpp"

namespace pbnlc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for a purpose tag under a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
}

namespace streams {
inline constexpr std::uint64_t kData = 1, kTx = 2, kAse = 3, kRx = 4, kPmd = 100, kFnn = 200, kKmeans = 300;
}

/// Received center-channel symbols of one (power, seed) realization. Data,
/// lasers, PMD and ASE depend on the seed only, so the realizations of
/// different powers differ only in the launch power.
struct Trace {
  SymbolSequence sent;
  SymbolSequence received;
  double power_dbm = 0.0;
  std::uint64_t seed = 0;
  SymbolLayout layout;
  bool alias_warning = false;
};

/// Transmission over cfg.link: SSFM per span followed by an EDFA that
/// restores the span loss (noise-free gain when cfg.ase is false).
inline SampledWaveform propagate_link(const SampledWaveform& in, const ExperimentConfig& cfg, std::uint64_t seed,
                                      bool* alias_warning = nullptr) {
  SampledWaveform w = in;
  std::mt19937_64 ase(derive_seed(seed, streams::kAse));
  SsfmOptions opt;
  opt.alias_policy = AliasPolicy::kWarn;
  bool warn = false;
  for (int s = 0; s < cfg.link.spans; ++s) {
    const PmdRealization pmd = PmdRealization::draw(cfg.link.span, derive_seed(seed, streams::kPmd + s));
    SsfmDiagnostics diag;
    w = ssfm_propagate(w, cfg.link.span, pmd, opt, &diag);
    warn |= diag.alias_warning;
    if (cfg.ase) {
      w = edfa_amplify(w, cfg.link.gain_db(), cfg.link.edfa_noise_figure_db, ase);
    } else {
      const double g = std::sqrt(db_to_linear(cfg.link.gain_db()));
      for (auto& v : w.x_pol) v *= g;
      for (auto& v : w.y_pol) v *= g;
    }
  }
  if (alias_warning) *alias_warning = warn;
  return w;
}

inline Trace simulate_trace(const ExperimentConfig& cfg, double power_dbm, std::uint64_t seed) {
  cfg.validate();
  Trace t;
  t.power_dbm = power_dbm;
  t.seed = seed;
  t.layout = cfg.symbols;
  std::mt19937_64 data(derive_seed(seed, streams::kData));
  Bits bits(cfg.symbols.total() * 8);
  for (auto& b : bits) b = static_cast<std::uint8_t>(data() >> 63);
  TxConfig tx = cfg.tx;
  tx.launch_power_dbm_per_channel = power_dbm;
  tx.rng_seed = derive_seed(seed, streams::kTx);
  TxResult sent = transmit(bits, tx, cfg.link);
  const SampledWaveform rx_wave = propagate_link(sent.wave, cfg, seed, &t.alias_warning);
  RxConfig rx = cfg.rx;
  rx.lms_train_symbols = cfg.symbols.preamble;
  std::mt19937_64 rx_rng(derive_seed(seed, streams::kRx));
  t.sent = sent.center_symbols();
  t.received = receive(rx_wave, tx, rx, cfg.link, t.sent, SymbolRange{0, rx.pilot_symbols}, rx_rng).symbols;
  return t;
}

/// Removes the common phase between `y` and `sent` measured on `ref`.
inline SymbolSequence realign_common_phase(const SymbolSequence& y, const SymbolSequence& sent, SymbolRange ref) {
  cd acc{0.0, 0.0};
  for (std::size_t k = ref.begin; k < ref.end; ++k)
    acc += y.x_pol[k] * std::conj(sent.x_pol[k]) + y.y_pol[k] * std::conj(sent.y_pol[k]);
  const cd rot = std::polar(1.0, -std::arg(acc));
  SymbolSequence out = y;
  for (auto& v : out.x_pol) v *= rot;
  for (auto& v : out.y_pol) v *= rot;
  return out;
}

/// Metrics on the test segment after common-phase realignment on the
/// training segment.
inline MetricsReport test_metrics(const SymbolSequence& y, const Trace& t) {
  const SymbolSequence a = realign_common_phase(y, t.sent, t.layout.train_range());
  return compute_metrics(a, t.sent, t.layout.test_range());
}

/// Truncation threshold for `window`: explicit, shipped for the reference
/// system, or calibrated to a configured count.
inline double resolve_rho(const ExperimentConfig& cfg, int window, const CoefficientSet& full_grid) {
  if (auto it = cfg.triplets.rho.find(window); it != cfg.triplets.rho.end()) return it->second;
  if (auto it = cfg.triplets.target_count.find(window); it != cfg.triplets.target_count.end())
    return calibrate_rho(window, it->second, full_grid);
  if (auto r = defaults::calibrated_rho(window, cfg.link, cfg.pulse())) return *r;
  throw Error("no truncation threshold for window " + std::to_string(window) +
              " (set triplets.rho or triplets.target_count)");
}

/// Truncated analytic coefficient sets per window.
class CoefficientBank {
 public:
  CoefficientBank(const ExperimentConfig& cfg, const std::vector<int>& windows) {
    for (const int w : windows) {
      if (sets_.count(w)) continue;
      const CoefficientSet full =
          conv_coefficients(cfg.pulse(), cfg.link, TripletSet::full_grid(w), cfg.triplets.quadrature);
      sets_.emplace(w, full.restrict_to(generate_triplet_set(w, resolve_rho(cfg, w, full), full)));
    }
  }

  const CoefficientSet& at(int window) const {
    auto it = sets_.find(window);
    if (it == sets_.end()) throw Error("no coefficients for window " + std::to_string(window));
    return it->second;
  }

 private:
  std::map<int, CoefficientSet> sets_;
};

/// One point of a sweep: a technique with its complexity knobs.
struct TechniqueVariant {
  Technique technique = Technique::kCdcOnly;
  int window = 37;
  bool cb = true;
  int clusters = 0;        // conv, conv_am, ls
  double sparsity = 0.0;   // fnn, fnn_am
  std::string stage = "power";
};

struct VariantOutcome {
  SymbolSequence output;
  ComplexityReport complexity;
  std::size_t triplets = 0;
  int clusters = 0;
};

/// Per-trace cache of fitted models shared by the variants of one job.
struct FitCache {
  std::map<int, CoefficientSet> ls;
  std::map<std::pair<int, int>, FnnModel> fnn;  // (technique, window) -> dense model
};

namespace detail {

inline FnnModel train_fnn(const Trace& t, const TripletSet& set, const ExperimentConfig& cfg, Technique tech) {
  const SymbolRange tr = t.layout.train_range();
  const auto n_val = static_cast<std::size_t>(std::ceil(static_cast<double>(tr.size()) * cfg.fnn_validation_fraction));
  if (n_val == 0 || n_val >= tr.size()) throw Error("fnn: training segment too short for the validation split");
  const SymbolRange fit{tr.begin, tr.end - n_val};
  const SymbolRange val{tr.end - n_val, tr.end};
  const TripletFnnDataset train(t.received, t.sent, fit, set);
  const TripletFnnDataset validation(t.received, t.sent, val, set);
  FnnConfig fc = cfg.fnn;
  fc.mode = tech == Technique::kFnnAm ? FnnMode::kAm : FnnMode::kAdditive;
  fc.rng_seed = derive_seed(t.seed, streams::kFnn + static_cast<std::uint64_t>(tech));
  return fnn_train(train, validation, fc);
}

inline FnnModel prune_fnn(const FnnModel& dense, const Trace& t, const TripletSet& set, const ExperimentConfig& cfg,
                          double sparsity) {
  const SymbolRange tr = t.layout.train_range();
  const auto n_val = static_cast<std::size_t>(std::ceil(static_cast<double>(tr.size()) * cfg.fnn_validation_fraction));
  const TripletFnnDataset train(t.received, t.sent, {tr.begin, tr.end - n_val}, set);
  const TripletFnnDataset validation(t.received, t.sent, {tr.end - n_val, tr.end}, set);
  PruneSchedule s = cfg.prune;
  s.target_sparsity = sparsity;
  return fnn_prune(dense, s, train, validation);
}

}  // namespace detail

/// Runs one technique variant on a trace.
inline VariantOutcome apply_variant(const Trace& t, const TechniqueVariant& v, const CoefficientBank& bank,
                                    const ExperimentConfig& cfg, FitCache& cache) {
  VariantOutcome out;
  if (v.technique == Technique::kCdcOnly) {
    out.output = t.received;
    out.complexity = total_complexity(v.technique, TripletSet{});
    return out;
  }
  const CoefficientSet& analytic = bank.at(v.window);
  const TripletSet& set = analytic.set;
  out.triplets = set.size();
  NlcOptions opt;
  opt.use_cb = v.cb;
  opt.range = t.layout.nlc_range();
  const double scale = nonlinear_scale(cfg.link, t.power_dbm);
  ComplexityOptions co;
  co.cb = v.cb;

  const auto quantize = [&](const CoefficientSet& c, bool am) {
    KmeansOptions ko;
    ko.exclude_degenerate = am;
    return kmeans_quantize(c, v.clusters, derive_seed(t.seed, streams::kKmeans), ko);
  };

  switch (v.technique) {
    case Technique::kConv:
    case Technique::kConvAm: {
      const bool am = v.technique == Technique::kConvAm;
      if (v.clusters > 0) {
        const QuantizedCoefficients q = quantize(analytic, am);
        out.output = quantized_apply(t.received, set, q, scale, opt, am);
        co.clusters = static_cast<int>(q.k());
      } else {
        out.output = am ? conv_am_apply(t.received, set, analytic, scale, opt) : conv_apply(t.received, set, analytic, scale, opt);
      }
      break;
    }
    case Technique::kLs: {
      auto it = cache.ls.find(v.window);
      if (it == cache.ls.end()) {
        LsOptions lo;
        lo.per_polarization = cfg.ls_per_polarization;
        lo.use_cb = v.cb;
        it = cache.ls.emplace(v.window, ls_fit(t.received, t.sent, t.layout.train_range(), set, lo)).first;
      }
      if (v.clusters > 0) {
        const QuantizedCoefficients q = quantize(it->second, false);
        out.output = quantized_apply(t.received, set, q, 0.0, opt, false);
        co.clusters = static_cast<int>(q.k());
      } else {
        out.output = conv_apply(t.received, set, it->second, 0.0, opt);
      }
      break;
    }
    case Technique::kFnn:
    case Technique::kFnnAm: {
      const auto key = std::pair(static_cast<int>(v.technique), v.window);
      auto it = cache.fnn.find(key);
      if (it == cache.fnn.end()) it = cache.fnn.emplace(key, detail::train_fnn(t, set, cfg, v.technique)).first;
      const FnnModel model = v.sparsity > 0.0 ? detail::prune_fnn(it->second, t, set, cfg, v.sparsity) : it->second;
      out.output = fnn_apply(t.received, model, set, v.technique == Technique::kFnnAm ? FnnMode::kAm : FnnMode::kAdditive, opt);
      co.nn_active_weights = fnn_mult_count(model);
      break;
    }
    case Technique::kCdcOnly: break;
  }
  out.clusters = co.clusters;
  out.complexity = total_complexity(v.technique, set, co);
  return out;
}

}  // namespace pbnlc
