#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "pbnlc/core/types.hpp"
#include "pbnlc/triplets/compute.hpp"
#include "pbnlc/triplets/triplet_set.hpp"

namespace pbnlc {

enum class Technique { kCdcOnly, kConv, kConvAm, kLs, kFnn, kFnnAm };

inline const char* to_string(Technique t) {
  switch (t) {
    case Technique::kCdcOnly: return "cdc_only";
    case Technique::kConv: return "conv";
    case Technique::kConvAm: return "conv_am";
    case Technique::kLs: return "ls";
    case Technique::kFnn: return "fnn";
    case Technique::kFnnAm: return "fnn_am";
  }
  return "?";
}

inline Technique technique_from_string(const std::string& s) {
  for (const Technique t : {Technique::kCdcOnly, Technique::kConv, Technique::kConvAm, Technique::kLs, Technique::kFnn,
                            Technique::kFnnAm})
    if (s == to_string(t)) return t;
  throw Error("unknown technique '" + s + "'");
}

inline bool is_am(Technique t) { return t == Technique::kConvAm || t == Technique::kFnnAm; }
inline bool is_fnn(Technique t) { return t == Technique::kFnn || t == Technique::kFnnAm; }

inline constexpr int kRealMultsPerComplex = 4;

/// Cost of exp(j theta) in the AM engines.
enum class ExpConvention { kLookupTable, kPolynomial };

inline const char* to_string(ExpConvention e) { return e == ExpConvention::kLookupTable ? "lookup_table" : "polynomial"; }

/// Real multiplications for one exp(j theta): 0 from a table; 8 for cos and
/// sin by degree-6/7 Taylor polynomials in Horner form on theta^2.
inline std::uint64_t exp_cost(ExpConvention e) { return e == ExpConvention::kLookupTable ? 0 : 8; }

/// Counts are real multiplications per symbol and polarization.
struct ComplexityReport {
  std::string technique;
  std::uint64_t triplet_computation = 0;
  std::uint64_t coefficient_application = 0;
  std::uint64_t nn_inference = 0;
  std::uint64_t am_overhead = 0;
  std::uint64_t total = 0;
  std::size_t triplets = 0;
  bool cb = false;
  int clusters = 0;  // 0: unquantized
  std::vector<std::string> conventions;

  void validate() const {
    if (total != triplet_computation + coefficient_application + nn_inference + am_overhead)
      throw Error("ComplexityReport: total differs from the sum of the items");
  }
};

inline nlohmann::json to_json(const ComplexityReport& r) {
  return {{"technique", r.technique},
          {"triplets", r.triplets},
          {"cb", r.cb},
          {"clusters", r.clusters},
          {"triplet_computation", r.triplet_computation},
          {"coefficient_application", r.coefficient_application},
          {"nn_inference", r.nn_inference},
          {"am_overhead", r.am_overhead},
          {"total", r.total},
          {"conventions", r.conventions}};
}

/// Without CB: one pair product and one final product per triplet (8 real).
/// With CB: fresh pair products only, plus the final product of every triplet.
inline std::uint64_t count_triplet_stage(const TripletSet& set, bool cb) {
  const std::uint64_t n = set.size();
  if (!cb) return 2 * kRealMultsPerComplex * n;
  const std::uint64_t fresh = CyclicTripletBuffer(set).fresh_per_symbol();
  return kRealMultsPerComplex * (fresh + n);
}

/// One complex multiplication per coefficient, or per cluster when quantized
/// with K > 0 (cluster sums are additions).
inline std::uint64_t count_coefficient_stage(std::size_t n_triplets, int clusters = 0) {
  if (clusters < 0) throw Error("count_coefficient_stage: negative cluster count");
  return kRealMultsPerComplex * static_cast<std::uint64_t>(clusters > 0 ? static_cast<std::size_t>(clusters) : n_triplets);
}

struct ComplexityOptions {
  bool cb = true;
  int clusters = 0;                  // K-means clusters, 0: unquantized
  std::size_t nn_active_weights = 0;  // FNN techniques
  ExpConvention exp = ExpConvention::kLookupTable;
};

/// Itemized count of a technique on `set`. AM engines treat the n = 0
/// entries as a phase: 3 real multiplications each (Re c P a, Im c P), one
/// complex rotation and one exponential. In quantized AM those entries stay
/// out of the clustering.
inline ComplexityReport total_complexity(Technique t, const TripletSet& set, const ComplexityOptions& opt = {}) {
  ComplexityReport r;
  r.technique = to_string(t);
  r.conventions = {"real multiplications per symbol and polarization",
                   "complex x complex = " + std::to_string(kRealMultsPerComplex) + " real",
                   std::string("exp(j theta) = ") + std::to_string(exp_cost(opt.exp)) + " (" + to_string(opt.exp) + ")",
                   "FNN: one per active weight, standardization and output scale folded, activations tabulated",
                   "CDC, equalizer and carrier recovery excluded"};
  if (t == Technique::kCdcOnly) return r;
  r.triplets = set.size();
  r.cb = opt.cb;
  r.triplet_computation = count_triplet_stage(set, opt.cb);
  const std::size_t degenerate = is_am(t) ? set.degenerate_count() : 0;
  if (is_fnn(t)) {
    r.nn_inference = opt.nn_active_weights;
  } else {
    r.clusters = opt.clusters;
    if (opt.clusters > 0)
      r.coefficient_application = count_coefficient_stage(set.size(), opt.clusters) + 3 * degenerate;
    else
      r.coefficient_application = count_coefficient_stage(set.size() - degenerate) + 3 * degenerate;
  }
  if (is_am(t)) r.am_overhead = kRealMultsPerComplex + exp_cost(opt.exp);
  r.total = r.triplet_computation + r.coefficient_application + r.nn_inference + r.am_overhead;
  return r;
}

/// Steady-state instrumented count per symbol and polarization: `run(ar, n)`
/// must process n consecutive symbols with a CountingArith; the cost of the
/// first (warm-up) symbol is removed by differencing runs of 1 and
/// 1 + symbols symbols.
template <class Run>
double instrumented_mults_per_symbol(Run&& run, std::size_t symbols = 100) {
  CountingArith one;
  run(one, std::size_t{1});
  CountingArith many;
  run(many, symbols + 1);
  return static_cast<double>(many.real_mults - one.real_mults) / (2.0 * static_cast<double>(symbols));
}

}  // namespace pbnlc
