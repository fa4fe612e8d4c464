#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pbnlc/core/types.hpp"
#include "pbnlc/triplets/triplet_set.hpp"

namespace pbnlc {

/// Arithmetic policies for the triplet and coefficient stages. Every complex
/// product goes through mul() so that instrumented and plain runs execute
/// the same floating-point operations.
struct PlainArith {
  static cd mul(cd a, cd b) { return cmul(a, b); }
  static void note_real_mults(std::uint64_t) {}
};

struct CountingArith {
  std::uint64_t real_mults = 0;
  cd mul(cd a, cd b) {
    real_mults += 4;
    return cmul(a, b);
  }
  void note_real_mults(std::uint64_t n) { real_mults += n; }
};

namespace detail {

/// a_{j} conj(a_{j+n}) summed over both polarizations.
template <class Arith>
cd pair_product(const SymbolSequence& s, std::size_t j, std::size_t jn, Arith& ar) {
  return ar.mul(s.x_pol[j], std::conj(s.x_pol[jn])) + ar.mul(s.y_pol[j], std::conj(s.y_pol[jn]));
}

inline void check_triplet_bounds(const SymbolSequence& s, std::size_t k, const TripletSet& set) {
  const auto reach = static_cast<std::size_t>(set.max_reach());
  if (k < reach || k + reach >= s.size())
    throw Error("triplets: symbol index " + std::to_string(k) + " within " + std::to_string(reach) +
                " symbols of the sequence edge");
}

}  // namespace detail

/// Triplets of symbol k, computed directly for every index:
///   t_H(m,n) = [a_H,k+m conj(a_H,k+m+n) + a_V,k+m conj(a_V,k+m+n)] a_H,k+n
/// and t_V by exchanging H and V.
template <class Arith>
void compute_triplets_brute(const SymbolSequence& s, std::size_t k, const TripletSet& set, TripletFeatures& out,
                            Arith& ar) {
  detail::check_triplet_bounds(s, k, set);
  out.h.resize(set.size());
  out.v.resize(set.size());
  out.pair.resize(set.size());
  const auto kk = static_cast<long long>(k);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto [m, n] = set[i];
    const auto j = static_cast<std::size_t>(kk + m);
    const auto jn = static_cast<std::size_t>(kk + m + n);
    const auto kn = static_cast<std::size_t>(kk + n);
    const cd p = detail::pair_product(s, j, jn, ar);
    out.pair[i] = p;
    out.h[i] = ar.mul(p, s.x_pol[kn]);
    out.v[i] = ar.mul(p, s.y_pol[kn]);
  }
}

inline TripletFeatures compute_triplets_brute(const SymbolSequence& s, std::size_t k, const TripletSet& set) {
  TripletFeatures f;
  PlainArith ar;
  compute_triplets_brute(s, k, set, f, ar);
  return f;
}

struct CbStatistics {
  std::size_t symbols = 0;
  std::uint64_t fresh_pairs = 0;   // pair products multiplied, warm-up included
  std::uint64_t reused_pairs = 0;  // pair products taken from the buffer
  std::size_t fresh_per_symbol = 0;  // steady-state count (after the first symbol)
};

/// Cyclic-buffer triplet computation over consecutive symbols. The pair
/// product for (m, n) at symbol k is the pair for (m-1, n) at symbol k+1,
/// so after the first symbol only the entries whose (m+1, n) neighbour is
/// absent from the set need a fresh product. Pairs are stored per n in a
/// ring keyed by the absolute symbol index.
class CyclicTripletBuffer {
 public:
  explicit CyclicTripletBuffer(const TripletSet& set) : set_(&set), ring_size_(static_cast<std::size_t>(set.window())) {
    const int h = set.half_window();
    slot_of_n_.assign(static_cast<std::size_t>(set.window()), -1);
    for (const auto& t : set.indices()) {
      auto& slot = slot_of_n_[static_cast<std::size_t>(t.n + h)];
      if (slot < 0) slot = static_cast<int>(n_count_++);
    }
    rings_.assign(n_count_ * ring_size_, cd{0.0, 0.0});
    fresh_.resize(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) fresh_[i] = !set.contains(set[i].m + 1, set[i].n);
    fresh_per_symbol_ = static_cast<std::size_t>(std::count(fresh_.begin(), fresh_.end(), true));
  }

  std::size_t fresh_per_symbol() const { return fresh_per_symbol_; }
  bool is_fresh(std::size_t i) const { return fresh_[i]; }
  const CbStatistics& statistics() const { return stats_; }

  /// Computes the triplets of symbol k. Calls must use consecutive k; any
  /// other k restarts the buffer (full recomputation).
  template <class Arith>
  void next(const SymbolSequence& s, std::size_t k, TripletFeatures& out, Arith& ar) {
    detail::check_triplet_bounds(s, k, *set_);
    const bool warm = primed_ && k == last_k_ + 1;
    const TripletSet& set = *set_;
    const int h = set.half_window();
    out.h.resize(set.size());
    out.v.resize(set.size());
    out.pair.resize(set.size());
    const auto kk = static_cast<long long>(k);
    bool tamper_pending = warm && tamper_ != 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto [m, n] = set[i];
      const auto j = static_cast<std::size_t>(kk + m);
      cd& slot = rings_[static_cast<std::size_t>(slot_of_n_[static_cast<std::size_t>(n + h)]) * ring_size_ +
                        j % ring_size_];
      if (!warm || fresh_[i]) {
        slot = detail::pair_product(s, j, static_cast<std::size_t>(kk + m + n), ar);
        if (tamper_pending && fresh_[i]) {
          slot += tamper_;
          tamper_pending = false;
        }
        ++stats_.fresh_pairs;
      } else {
        ++stats_.reused_pairs;
      }
      const auto kn = static_cast<std::size_t>(kk + n);
      out.pair[i] = slot;
      out.h[i] = ar.mul(slot, s.x_pol[kn]);
      out.v[i] = ar.mul(slot, s.y_pol[kn]);
    }
    primed_ = true;
    last_k_ = k;
    ++stats_.symbols;
    stats_.fresh_per_symbol = fresh_per_symbol_;
  }

  void next(const SymbolSequence& s, std::size_t k, TripletFeatures& out) {
    PlainArith ar;
    next(s, k, out, ar);
  }

  /// Test hook: adds `amount` to one fresh pair product per steady-state
  /// symbol, so equivalence checks must fail. Zero disables it.
  void set_tamper(double amount) { tamper_ = amount; }

 private:
  const TripletSet* set_;
  std::size_t ring_size_;
  std::vector<int> slot_of_n_;
  std::size_t n_count_ = 0;
  std::vector<cd> rings_;
  std::vector<bool> fresh_;
  std::size_t fresh_per_symbol_ = 0;
  bool primed_ = false;
  double tamper_ = 0.0;
  std::size_t last_k_ = 0;
  CbStatistics stats_;
};

/// Streams CB triplets for every k in `range` to `sink(k, features)`.
template <class Sink>
CbStatistics compute_triplets_cb(const SymbolSequence& s, SymbolRange range, const TripletSet& set, Sink&& sink) {
  if (range.end < range.begin) throw Error("compute_triplets_cb: range end before begin");
  CyclicTripletBuffer buf(set);
  TripletFeatures f;
  for (std::size_t k = range.begin; k < range.end; ++k) {
    buf.next(s, k, f);
    sink(k, static_cast<const TripletFeatures&>(f));
  }
  return buf.statistics();
}

/// Triplets of every k in `range`, by the cyclic buffer or directly, passed
/// to `sink(k, features)` in increasing k.
template <class Arith, class Sink>
void stream_triplets(const SymbolSequence& s, SymbolRange range, const TripletSet& set, bool use_cb, Arith& ar,
                     Sink&& sink) {
  TripletFeatures f;
  if (use_cb) {
    CyclicTripletBuffer buf(set);
    for (std::size_t k = range.begin; k < range.end; ++k) {
      buf.next(s, k, f, ar);
      sink(k, static_cast<const TripletFeatures&>(f));
    }
  } else {
    for (std::size_t k = range.begin; k < range.end; ++k) {
      compute_triplets_brute(s, k, set, f, ar);
      sink(k, static_cast<const TripletFeatures&>(f));
    }
  }
}

template <class Sink>
void stream_triplets(const SymbolSequence& s, SymbolRange range, const TripletSet& set, bool use_cb, Sink&& sink) {
  PlainArith ar;
  stream_triplets(s, range, set, use_cb, ar, std::forward<Sink>(sink));
}

/// Index range [reach, N - reach) of symbols whose triplets are fully inside the sequence.
inline SymbolRange triplet_valid_range(std::size_t n_symbols, const TripletSet& set) {
  const auto reach = static_cast<std::size_t>(set.max_reach());
  if (n_symbols <= 2 * reach) return {0, 0};
  return {reach, n_symbols - reach};
}

}  // namespace pbnlc
