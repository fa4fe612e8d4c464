#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "pbnlc/pbnlc.hpp"

namespace fs = std::filesystem;
using namespace pbnlc;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  std::string out;
  bool deterministic = false;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed_set) cfg.seeds = {c.seed};
  if (c.workers > 0) cfg.workers = c.workers;
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

RunOptions run_options(const ExperimentConfig& cfg) {
  RunOptions o;
  o.workers = cfg.workers;
  o.log = [](const std::string& line) { std::cerr << line << std::endl; };
  return o;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(1) << "\n";
}

void write_run_info(const ExperimentConfig& cfg, const Common& c, const std::string& command) {
  write_json(fs::path(cfg.output_dir) / (command + ".run.json"),
             {{"software_version", kSoftwareVersion},
              {"command", command},
              {"config_hash", config_hash(cfg)},
              {"deterministic", c.deterministic},
              {"workers", cfg.workers},
              {"config", config_to_json(cfg)}});
}

int cmd_coeffs(const Common& c, int window_arg) {
  const ExperimentConfig cfg = load(c);
  const int window = window_arg > 0 ? window_arg : cfg.triplets.window;
  const CoefficientBank bank(cfg, {window});
  const CoefficientSet& coeffs = bank.at(window);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const std::string stem = "w" + std::to_string(window);
  save_triplet_set((dir / (stem + ".triplets")).string(), coeffs.set);
  save_coefficients((dir / (stem + ".coeffs")).string(), coeffs);
  std::cout << "window " << window << ": " << coeffs.size() << " triplets, rho "
            << exact_decimal(coeffs.set.truncation_param()) << ", cb fresh pairs/symbol "
            << CyclicTripletBuffer(coeffs.set).fresh_per_symbol() << "\n"
            << "wrote " << (dir / (stem + ".coeffs")).string() << "\n";
  return 0;
}

int cmd_train(const Common& c, const std::string& tech_name, double power) {
  const ExperimentConfig cfg = load(c);
  const Technique tech = technique_from_string(tech_name);
  if (tech != Technique::kLs && !is_fnn(tech)) throw Error("train: technique must be ls, fnn or fnn_am");
  const std::uint64_t seed = cfg.seeds.front();
  const CoefficientBank bank(cfg, {cfg.triplets.window});
  const TripletSet& set = bank.at(cfg.triplets.window).set;
  std::cerr << "simulating P=" << exact_decimal(power) << " dBm seed " << seed << std::endl;
  const Trace t = simulate_trace(cfg, power, seed);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  TechniqueVariant v;
  v.technique = tech;
  v.window = cfg.triplets.window;
  v.cb = cfg.triplets.cb;
  FitCache cache;
  const VariantOutcome o = apply_variant(t, v, bank, cfg, cache);
  fs::path path;
  if (tech == Technique::kLs) {
    path = dir / ("ls_w" + std::to_string(v.window) + ".coeffs");
    save_coefficients(path.string(), cache.ls.at(v.window));
  } else {
    path = dir / (std::string(to_string(tech)) + "_w" + std::to_string(v.window) + ".json");
    save_fnn(path.string(), cache.fnn.at({static_cast<int>(tech), v.window}));
  }
  const double q_cdc = test_metrics(t.received, t).q_factor_db;
  const double q = test_metrics(o.output, t).q_factor_db;
  std::cout << to_string(tech) << ": " << set.size() << " triplets, Q " << exact_decimal(q) << " dB (CDC "
            << exact_decimal(q_cdc) << " dB), " << o.complexity.total << " mults/symbol\n"
            << "wrote " << path.string() << "\n";
  write_run_info(cfg, c, "train");
  return 0;
}

int cmd_sweep_power(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const auto rows = run_power_sweep(cfg, run_options(cfg));
  emit_results(rows, cfg.output_dir, "power_sweep");
  write_run_info(cfg, c, "sweep-power");
  for (const auto& [tech, p] : best_power_per_technique(rows))
    std::cout << tech << ": best power " << exact_decimal(p) << " dBm\n";
  std::cout << "wrote " << (fs::path(cfg.output_dir) / "power_sweep.csv").string() << "\n";
  return 0;
}

int cmd_sweep_tradeoff(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const RunOptions opt = run_options(cfg);
  std::vector<ResultRow> power_rows;
  if (!cfg.tradeoff.power_dbm) {
    power_rows = run_power_sweep(cfg, opt);
    emit_results(power_rows, cfg.output_dir, "power_sweep");
  }
  const auto rows = run_tradeoff_sweep(cfg, opt, cfg.tradeoff.power_dbm ? nullptr : &power_rows);
  emit_results(rows, cfg.output_dir, "tradeoff");
  write_run_info(cfg, c, "sweep-tradeoff");
  std::cout << "wrote " << (fs::path(cfg.output_dir) / "tradeoff.csv").string() << "\n";
  return 0;
}

int cmd_complexity(const Common& c, int window_arg, int clusters_arg, int nn_weights, const std::string& exp) {
  const ExperimentConfig cfg = load(c);
  const int window = window_arg > 0 ? window_arg : cfg.triplets.window;
  const CoefficientBank bank(cfg, {window});
  const TripletSet& set = bank.at(window).set;
  nlohmann::json reports = nlohmann::json::array();
  for (const auto t : cfg.techniques) {
    ComplexityOptions co;
    co.cb = cfg.triplets.cb;
    co.clusters = is_fnn(t) ? 0 : (clusters_arg >= 0 ? clusters_arg : cfg.clusters);
    co.exp = exp == "polynomial" ? ExpConvention::kPolynomial : ExpConvention::kLookupTable;
    if (is_fnn(t)) {
      if (nn_weights > 0) {
        co.nn_active_weights = static_cast<std::size_t>(nn_weights);
      } else {
        FnnConfig fc = cfg.fnn;
        fc.mode = t == Technique::kFnnAm ? FnnMode::kAm : FnnMode::kAdditive;
        co.nn_active_weights = fnn_init(2 * static_cast<int>(set.size()), fc).total_weights();
      }
    }
    const ComplexityReport r = total_complexity(t, set, co);
    reports.push_back(to_json(r));
    std::cout << to_string(t) << ": " << r.total << " real mults/symbol (triplets " << r.triplet_computation
              << ", coefficients " << r.coefficient_application << ", nn " << r.nn_inference << ", am "
              << r.am_overhead << ")\n";
  }
  std::cout << "conventions:\n";
  for (const auto& s : total_complexity(Technique::kConv, set).conventions) std::cout << "  " << s << "\n";
  write_json(fs::path(cfg.output_dir) / "complexity.json",
             {{"software_version", kSoftwareVersion}, {"config_hash", config_hash(cfg)}, {"window", window},
              {"triplets", set.size()}, {"reports", reports}});
  return 0;
}

int cmd_verify(const Common& c, const std::string& scale) {
  const int workers = c.workers > 0 ? c.workers : 1;
  const auto reports = run_all_oracles(oracle_scale_from_string(scale), workers);
  bool ok = true;
  for (const auto& r : reports) {
    ok &= r.pass;
    std::cout << (r.pass ? "pass " : "FAIL ") << r.name << " deviation " << r.deviation << " tolerance "
              << r.tolerance << "\n";
  }
  const std::string dir = c.out.empty() ? "out" : c.out;
  nlohmann::json j = oracle_report_json(reports);
  j["scale"] = scale;
  write_json(fs::path(dir) / "verify.json", j);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbation-based fiber nonlinearity compensation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config, "experiment configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { common.seed = s, common.seed_set = true; }, "run a single seed");
  app.add_option("--workers", common.workers, "concurrent jobs")->check(CLI::PositiveNumber);
  app.add_option("--out", common.out, "output directory");
  app.add_flag("--deterministic", common.deterministic,
               "bit-reproducible execution (always on; recorded in the run info)");

  int window = 0;
  auto* coeffs = app.add_subcommand("coeffs", "compute and store the truncated analytic coefficients");
  coeffs->add_option("--window", window, "symbol window (default: triplets.window)");

  std::string technique = "ls";
  double power = 2.0;
  auto* train = app.add_subcommand("train", "fit LS coefficients or an FNN on one simulated trace");
  train->add_option("--technique", technique, "ls, fnn or fnn_am")->check(CLI::IsMember({"ls", "fnn", "fnn_am"}));
  train->add_option("--power", power, "launch power per channel, dBm");

  auto* sweep_power = app.add_subcommand("sweep-power", "Q factor against launch power");
  auto* sweep_tradeoff = app.add_subcommand("sweep-tradeoff", "Q gain against complexity");

  int clusters = -1;
  int nn_weights = 0;
  std::string exp = "lookup_table";
  auto* complexity = app.add_subcommand("complexity", "analytic multiplication counts");
  complexity->add_option("--window", window, "symbol window (default: triplets.window)");
  complexity->add_option("--clusters", clusters, "K-means clusters, 0: unquantized (default: config)");
  complexity->add_option("--nn-weights", nn_weights, "active FNN weights (default: dense network)");
  complexity->add_option("--exp", exp, "exponential cost convention")
      ->check(CLI::IsMember({"lookup_table", "polynomial"}));

  std::string scale = "unit";
  auto* verify = app.add_subcommand("verify", "run the oracle suite");
  verify->add_option("--scale", scale, "unit or desk")->check(CLI::IsMember({"unit", "desk"}));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*coeffs) return cmd_coeffs(common, window);
    if (*train) return cmd_train(common, technique, power);
    if (*sweep_power) return cmd_sweep_power(common);
    if (*sweep_tradeoff) return cmd_sweep_tradeoff(common);
    if (*complexity) return cmd_complexity(common, window, clusters, nn_weights, exp);
    if (*verify) return cmd_verify(common, scale);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
