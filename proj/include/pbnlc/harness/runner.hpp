#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "pbnlc/harness/config.hpp"
#include "pbnlc/harness/pipeline.hpp"
#include "pbnlc/harness/results.hpp"

namespace pbnlc {

struct RunOptions {
  int workers = 1;
  std::function<void(const std::string&)> log;  // progress lines, called under a lock
};

/// Runs job(i) for i in [0, n) on up to `workers` threads. Jobs must write
/// only to their own slot; the assignment of jobs to threads does not
/// affect results.
inline void run_jobs(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  for (auto& th : pool) th.join();
}

namespace detail {

struct TraceJob {
  double power_dbm;
  std::uint64_t seed;
  std::vector<TechniqueVariant> variants;
};

inline ResultRow make_row(const TechniqueVariant& v, const Trace& t, const std::string& hash) {
  ResultRow r;
  r.technique = to_string(v.technique);
  r.power_dbm = t.power_dbm;
  r.seed = t.seed;
  r.config_hash = hash;
  r.stage = v.stage;
  r.window = v.technique == Technique::kCdcOnly ? 0 : v.window;
  r.cb = v.technique != Technique::kCdcOnly && v.cb;
  r.sparsity = v.sparsity;
  return r;
}

/// Simulates the trace of a job and evaluates every variant on it. Failures
/// are recorded in the affected rows.
inline std::vector<ResultRow> run_trace_job(const TraceJob& job, const ExperimentConfig& cfg,
                                            const CoefficientBank& bank, const std::string& hash) {
  std::vector<ResultRow> rows;
  Trace t;
  try {
    t = simulate_trace(cfg, job.power_dbm, job.seed);
  } catch (const std::exception& e) {
    for (const auto& v : job.variants) {
      Trace stub;
      stub.power_dbm = job.power_dbm;
      stub.seed = job.seed;
      ResultRow r = make_row(v, stub, hash);
      r.status = "error";
      r.error = std::string("simulation: ") + e.what();
      r.q_db = r.q_gain_db = r.ber = std::numeric_limits<double>::quiet_NaN();
      rows.push_back(r);
    }
    return rows;
  }
  const double q_cdc = test_metrics(t.received, t).q_factor_db;
  FitCache cache;
  for (const auto& v : job.variants) {
    ResultRow r = make_row(v, t, hash);
    try {
      const VariantOutcome o = apply_variant(t, v, bank, cfg, cache);
      const MetricsReport m = test_metrics(o.output, t);
      r.q_db = m.q_factor_db;
      r.q_gain_db = m.q_factor_db - q_cdc;
      r.ber = m.ber;
      r.bit_errors = m.bit_errors;
      r.q_status = to_string(m.q_status);
      r.mults_per_symbol = o.complexity.total;
      r.triplets = o.triplets;
      r.clusters = o.clusters;
    } catch (const std::exception& e) {
      r.status = "error";
      r.error = e.what();
      r.q_db = r.q_gain_db = r.ber = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<ResultRow> run_trace_jobs(const std::vector<TraceJob>& jobs, const ExperimentConfig& cfg,
                                             const std::vector<int>& windows, const RunOptions& opt) {
  const std::string hash = config_hash(cfg);
  std::set<int> needed;
  for (const auto& j : jobs)
    for (const auto& v : j.variants)
      if (v.technique != Technique::kCdcOnly) needed.insert(v.window);
  std::vector<int> ws(windows.begin(), windows.end());
  ws.erase(std::remove_if(ws.begin(), ws.end(), [&](int w) { return !needed.count(w); }), ws.end());
  const CoefficientBank bank(cfg, ws);
  std::vector<std::vector<ResultRow>> slots(jobs.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> done{0};
  run_jobs(jobs.size(), opt.workers, [&](std::size_t i) {
    slots[i] = run_trace_job(jobs[i], cfg, bank, hash);
    if (opt.log) {
      std::lock_guard lock(log_mutex);
      opt.log("trace " + std::to_string(++done) + "/" + std::to_string(jobs.size()) + " (P=" +
              exact_decimal(jobs[i].power_dbm) + " dBm, seed " + std::to_string(jobs[i].seed) + ") done");
    }
  });
  std::vector<ResultRow> rows;
  for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
  return rows;
}

}  // namespace detail

/// Every configured technique at every (power, seed); the techniques of one
/// (power, seed) share the received trace.
inline std::vector<ResultRow> run_power_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  cfg.validate();
  std::vector<detail::TraceJob> jobs;
  for (const double p : cfg.powers_dbm)
    for (const auto seed : cfg.seeds) {
      detail::TraceJob j{p, seed, {}};
      for (const auto t : cfg.techniques) {
        TechniqueVariant v;
        v.technique = t;
        v.window = cfg.triplets.window;
        v.cb = cfg.triplets.cb;
        v.clusters = cfg.clusters;
        v.stage = "power";
        j.variants.push_back(v);
      }
      jobs.push_back(std::move(j));
    }
  return detail::run_trace_jobs(jobs, cfg, {cfg.triplets.window}, opt);
}

/// Power with the highest seed-averaged Q per technique.
inline std::map<std::string, double> best_power_per_technique(const std::vector<ResultRow>& rows) {
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    auto& a = acc[r.technique][r.power_dbm];
    a.first += r.q_db;
    ++a.second;
  }
  std::map<std::string, double> best;
  for (const auto& [tech, per_power] : acc) {
    double bq = -std::numeric_limits<double>::infinity();
    for (const auto& [p, a] : per_power) {
      const double q = a.first / a.second;
      if (q > bq) {
        bq = q;
        best[tech] = p;
      }
    }
  }
  return best;
}

/// Complexity reduction in three stages per technique: window shrinking
/// (tradeoff.windows in the given order, brute-force triplets), the cyclic
/// buffer at the last window, then K-means quantization (conv, conv_am, ls)
/// or pruning (fnn, fnn_am). Each technique runs at tradeoff.power_dbm, or
/// at its best power from `power_rows` (a power sweep is run when absent).
inline std::vector<ResultRow> run_tradeoff_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {},
                                                 const std::vector<ResultRow>* power_rows = nullptr) {
  cfg.validate();
  if (cfg.tradeoff.windows.empty()) throw Error("tradeoff: window list is empty");
  std::map<Technique, double> power;
  if (cfg.tradeoff.power_dbm) {
    for (const auto t : cfg.techniques) power[t] = *cfg.tradeoff.power_dbm;
  } else {
    std::vector<ResultRow> swept;
    if (!power_rows) swept = run_power_sweep(cfg, opt);
    const auto best = best_power_per_technique(power_rows ? *power_rows : swept);
    for (const auto t : cfg.techniques) {
      auto it = best.find(to_string(t));
      if (it == best.end()) throw Error(std::string("tradeoff: no power sweep result for ") + to_string(t));
      power[t] = it->second;
    }
  }
  const int last = cfg.tradeoff.windows.back();
  std::map<double, std::vector<TechniqueVariant>> by_power;
  for (const auto t : cfg.techniques) {
    auto& vs = by_power[power[t]];
    TechniqueVariant v;
    v.technique = t;
    if (t == Technique::kCdcOnly) {
      v.stage = "baseline";
      vs.push_back(v);
      continue;
    }
    for (const int w : cfg.tradeoff.windows) {
      v.window = w;
      v.cb = false;
      v.stage = "window";
      vs.push_back(v);
    }
    v.window = last;
    v.cb = true;
    v.stage = "cb";
    vs.push_back(v);
    if (is_fnn(t)) {
      for (const double s : cfg.tradeoff.sparsities) {
        v.sparsity = s;
        v.stage = "pruning";
        vs.push_back(v);
      }
    } else {
      for (const int k : cfg.tradeoff.clusters) {
        v.clusters = k;
        v.stage = "quantization";
        vs.push_back(v);
      }
    }
  }
  std::vector<detail::TraceJob> jobs;
  for (const auto& [p, vs] : by_power)
    for (const auto seed : cfg.seeds) jobs.push_back({p, seed, vs});
  return detail::run_trace_jobs(jobs, cfg, cfg.tradeoff.windows, opt);
}

}  // namespace pbnlc
