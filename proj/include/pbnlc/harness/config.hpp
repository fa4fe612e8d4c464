#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/coeffs/conv.hpp"
#include "pbnlc/complexity/complexity.hpp"
#include "pbnlc/core/hash.hpp"
#include "pbnlc/fnn/network.hpp"
#include "pbnlc/fnn/train.hpp"
#include "pbnlc/txrx/config.hpp"

namespace pbnlc {

inline constexpr const char* kSoftwareVersion = "0.1.0";

/// Symbol index layout of one trace:
///   [preamble | guard | train | guard | test | guard]
/// The preamble trains the equalizer, `train` feeds the LS and FNN fits and
/// the common-phase reference, `test` is the only metric segment.
struct SymbolLayout {
  std::size_t preamble = 8192;
  std::size_t guard = 512;
  std::size_t train = 32768;
  std::size_t test = 100000;

  std::size_t total() const { return preamble + 3 * guard + train + test; }
  SymbolRange train_range() const { return {preamble + guard, preamble + guard + train}; }
  SymbolRange test_range() const {
    const std::size_t b = preamble + 2 * guard + train;
    return {b, b + test};
  }
  /// Symbols processed by the compensators (train and test segments).
  SymbolRange nlc_range() const { return {train_range().begin, test_range().end}; }

  void validate() const {
    if (preamble < 256) throw Error("symbols.preamble must be >= 256");
    if (guard < 64) throw Error("symbols.guard must be >= 64");
    if (train < 1 || test < 1) throw Error("symbols.train and symbols.test must be >= 1");
  }
};

struct TripletConfig {
  int window = 37;
  std::map<int, double> rho;               // explicit thresholds per window
  std::map<int, std::size_t> target_count;  // calibrate rho to this count
  bool cb = true;
  CoeffQuadrature quadrature;
};

struct TradeoffConfig {
  std::optional<double> power_dbm;  // default: each technique's best power from a power sweep
  std::vector<int> windows{75, 37};
  std::vector<int> clusters{4, 8, 16, 32, 64};
  std::vector<double> sparsities{0.25, 0.5, 0.75};
};

struct ExperimentConfig {
  LinkParams link;
  bool ase = true;
  TxConfig tx;
  RxConfig rx;
  SymbolLayout symbols;
  std::vector<Technique> techniques{Technique::kCdcOnly, Technique::kConv, Technique::kConvAm, Technique::kLs};
  std::vector<double> powers_dbm{-2.0, 0.0, 2.0, 4.0, 6.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  TripletConfig triplets;
  int clusters = 0;  // K-means clusters in the power sweep, 0: unquantized
  bool ls_per_polarization = false;
  FnnConfig fnn;
  double fnn_validation_fraction = 0.1;
  PruneSchedule prune;
  TradeoffConfig tradeoff;
  std::string output_dir = "out";
  int workers = 1;

  PulseSpec pulse() const {
    PulseSpec p;
    p.symbol_rate = tx.symbol_rate;
    p.rolloff = tx.rolloff;
    p.rrc_span_symbols = tx.rrc_span_symbols;
    p.pre_cdc_fraction = tx.pre_cdc_fraction;
    return p;
  }

  void validate() const {
    link.validate();
    tx.validate();
    rx.validate();
    symbols.validate();
    fnn.validate();
    prune.validate();
    if (techniques.empty()) throw Error("config: technique list is empty");
    if (powers_dbm.empty()) throw Error("config: power list is empty");
    if (seeds.empty()) throw Error("config: seed list is empty");
    if (triplets.window < 1 || triplets.window % 2 == 0) throw Error("config: triplets.window must be odd");
    if (clusters < 0) throw Error("config: clusters must be >= 0");
    if (!(fnn_validation_fraction > 0.0 && fnn_validation_fraction < 1.0))
      throw Error("config: fnn.validation_fraction in (0, 1)");
    if (workers < 1) throw Error("config: workers must be >= 1");
    if (rx.pilot_symbols > symbols.preamble) throw Error("config: pilots must lie in the preamble");
  }
};

namespace detail {

/// Reads a JSON object and rejects keys that were never requested.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error("config: '" + path_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("config: '" + name(key) + "': " + e.what());
    }
  }

  const nlohmann::json* child(const char* key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw Error("config: unknown key '" + (path_.empty() ? k : path_ + "." + k) + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class V>
std::map<int, V> window_map(const nlohmann::json& j, const std::string& path) {
  std::map<int, V> out;
  if (!j.is_object()) throw Error("config: '" + path + "' must map windows to values");
  for (const auto& [k, v] : j.items()) out[std::stoi(k)] = v.template get<V>();
  return out;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  detail::StrictObject root(j, "");
  if (const auto* l = root.child("link")) {
    detail::StrictObject o(*l, "link");
    o.get("spans", c.link.spans);
    o.get("span_length_km", c.link.span.length_km);
    o.get("alpha_db_per_km", c.link.span.alpha_db_per_km);
    o.get("dispersion_ps_nm_km", c.link.span.dispersion_ps_nm_km);
    o.get("gamma_per_w_km", c.link.span.gamma_per_w_km);
    o.get("pmd_ps_sqrt_km", c.link.span.pmd_ps_sqrt_km);
    o.get("pmd_sections", c.link.span.pmd_sections);
    o.get("step_km", c.link.span.step_km);
    o.get("noise_figure_db", c.link.edfa_noise_figure_db);
    o.get("ase", c.ase);
    o.finish();
  }
  if (const auto* t = root.child("tx")) {
    detail::StrictObject o(*t, "tx");
    o.get("symbol_rate", c.tx.symbol_rate);
    o.get("rolloff", c.tx.rolloff);
    o.get("rrc_span_symbols", c.tx.rrc_span_symbols);
    o.get("samples_per_symbol", c.tx.samples_per_symbol);
    o.get("pre_cdc_fraction", c.tx.pre_cdc_fraction);
    o.get("num_channels", c.tx.num_channels);
    o.get("channel_spacing_hz", c.tx.channel_spacing_hz);
    o.get("laser_linewidth_hz", c.tx.laser_linewidth_hz);
    o.finish();
  }
  if (const auto* r = root.child("rx")) {
    detail::StrictObject o(*r, "rx");
    o.get("post_cdc_fraction", c.rx.post_cdc_fraction);
    o.get("lms_taps", c.rx.lms_taps);
    o.get("lms_step", c.rx.lms_step);
    o.get("lms_phase_gain", c.rx.lms_phase_gain);
    o.get("bps_test_phases", c.rx.bps_test_phases);
    o.get("bps_window", c.rx.bps_window);
    o.get("pilot_symbols", c.rx.pilot_symbols);
    o.finish();
  }
  if (const auto* s = root.child("symbols")) {
    detail::StrictObject o(*s, "symbols");
    o.get("preamble", c.symbols.preamble);
    o.get("guard", c.symbols.guard);
    o.get("train", c.symbols.train);
    o.get("test", c.symbols.test);
    o.finish();
  }
  if (const auto* t = root.child("techniques")) {
    c.techniques.clear();
    for (const auto& name : *t) c.techniques.push_back(technique_from_string(name.get<std::string>()));
  }
  root.get("powers_dbm", c.powers_dbm);
  root.get("seeds", c.seeds);
  if (const auto* t = root.child("triplets")) {
    detail::StrictObject o(*t, "triplets");
    o.get("window", c.triplets.window);
    o.get("cb", c.triplets.cb);
    if (const auto* r = o.child("rho")) c.triplets.rho = detail::window_map<double>(*r, "triplets.rho");
    if (const auto* r = o.child("target_count"))
      c.triplets.target_count = detail::window_map<std::size_t>(*r, "triplets.target_count");
    if (const auto* q = o.child("quadrature")) {
      detail::StrictObject qo(*q, "triplets.quadrature");
      qo.get("z_steps_per_span", c.triplets.quadrature.z_steps_per_span);
      qo.get("samples_per_symbol", c.triplets.quadrature.samples_per_symbol);
      qo.get("support_windows", c.triplets.quadrature.support_windows);
      qo.finish();
    }
    o.finish();
  }
  root.get("clusters", c.clusters);
  if (const auto* l = root.child("ls")) {
    detail::StrictObject o(*l, "ls");
    o.get("per_polarization", c.ls_per_polarization);
    o.finish();
  }
  if (const auto* f = root.child("fnn")) {
    detail::StrictObject o(*f, "fnn");
    o.get("hidden", c.fnn.hidden);
    std::string act = to_string(c.fnn.activation);
    o.get("activation", act);
    c.fnn.activation = activation_from_string(act);
    o.get("learning_rate", c.fnn.learning_rate);
    o.get("epochs", c.fnn.epochs);
    o.get("batch_size", c.fnn.batch_size);
    o.get("validation_fraction", c.fnn_validation_fraction);
    o.finish();
  }
  if (const auto* p = root.child("prune")) {
    detail::StrictObject o(*p, "prune");
    o.get("target_sparsity", c.prune.target_sparsity);
    o.get("rounds", c.prune.rounds);
    o.get("fine_tune_epochs", c.prune.fine_tune_epochs);
    o.finish();
  }
  if (const auto* t = root.child("tradeoff")) {
    detail::StrictObject o(*t, "tradeoff");
    if (const auto* p = o.child("power_dbm"); p && !p->is_null()) c.tradeoff.power_dbm = p->get<double>();
    o.get("windows", c.tradeoff.windows);
    o.get("clusters", c.tradeoff.clusters);
    o.get("sparsities", c.tradeoff.sparsities);
    o.finish();
  }
  root.get("output_dir", c.output_dir);
  root.get("workers", c.workers);
  root.finish();
  c.validate();
  return c;
}

/// Canonical JSON of every field that influences results (the output
/// directory and worker count are excluded).
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["link"] = {{"spans", c.link.spans},
               {"span_length_km", c.link.span.length_km},
               {"alpha_db_per_km", c.link.span.alpha_db_per_km},
               {"dispersion_ps_nm_km", c.link.span.dispersion_ps_nm_km},
               {"gamma_per_w_km", c.link.span.gamma_per_w_km},
               {"pmd_ps_sqrt_km", c.link.span.pmd_ps_sqrt_km},
               {"pmd_sections", c.link.span.pmd_sections},
               {"step_km", c.link.span.step_km},
               {"noise_figure_db", c.link.edfa_noise_figure_db},
               {"ase", c.ase}};
  j["tx"] = {{"symbol_rate", c.tx.symbol_rate},
             {"rolloff", c.tx.rolloff},
             {"rrc_span_symbols", c.tx.rrc_span_symbols},
             {"samples_per_symbol", c.tx.samples_per_symbol},
             {"pre_cdc_fraction", c.tx.pre_cdc_fraction},
             {"num_channels", c.tx.num_channels},
             {"channel_spacing_hz", c.tx.channel_spacing_hz},
             {"laser_linewidth_hz", c.tx.laser_linewidth_hz}};
  j["rx"] = {{"post_cdc_fraction", c.rx.post_cdc_fraction},
             {"lms_taps", c.rx.lms_taps},
             {"lms_step", c.rx.lms_step},
             {"lms_phase_gain", c.rx.lms_phase_gain},
             {"bps_test_phases", c.rx.bps_test_phases},
             {"bps_window", c.rx.bps_window},
             {"pilot_symbols", c.rx.pilot_symbols}};
  j["symbols"] = {{"preamble", c.symbols.preamble},
                  {"guard", c.symbols.guard},
                  {"train", c.symbols.train},
                  {"test", c.symbols.test}};
  std::vector<std::string> tech;
  for (const auto t : c.techniques) tech.emplace_back(to_string(t));
  j["techniques"] = tech;
  j["powers_dbm"] = c.powers_dbm;
  j["seeds"] = c.seeds;
  nlohmann::json rho = nlohmann::json::object();
  for (const auto& [w, r] : c.triplets.rho) rho[std::to_string(w)] = r;
  nlohmann::json target = nlohmann::json::object();
  for (const auto& [w, n] : c.triplets.target_count) target[std::to_string(w)] = n;
  j["triplets"] = {{"window", c.triplets.window},
                   {"cb", c.triplets.cb},
                   {"rho", rho},
                   {"target_count", target},
                   {"quadrature",
                    {{"z_steps_per_span", c.triplets.quadrature.z_steps_per_span},
                     {"samples_per_symbol", c.triplets.quadrature.samples_per_symbol},
                     {"support_windows", c.triplets.quadrature.support_windows}}}};
  j["clusters"] = c.clusters;
  j["ls"] = {{"per_polarization", c.ls_per_polarization}};
  j["fnn"] = {{"hidden", c.fnn.hidden},
              {"activation", to_string(c.fnn.activation)},
              {"learning_rate", c.fnn.learning_rate},
              {"epochs", c.fnn.epochs},
              {"batch_size", c.fnn.batch_size},
              {"validation_fraction", c.fnn_validation_fraction}};
  j["prune"] = {{"target_sparsity", c.prune.target_sparsity},
                {"rounds", c.prune.rounds},
                {"fine_tune_epochs", c.prune.fine_tune_epochs}};
  j["tradeoff"] = {{"power_dbm", c.tradeoff.power_dbm ? nlohmann::json(*c.tradeoff.power_dbm) : nlohmann::json()},
                   {"windows", c.tradeoff.windows},
                   {"clusters", c.tradeoff.clusters},
                   {"sparsities", c.tradeoff.sparsities}};
  return j;
}

/// FNV-1a of the canonical configuration; the symbol layout (and with it
/// the train/test split) is part of the hash.
inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a(config_to_json(c).dump())); }

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

}  // namespace pbnlc
