#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "pbnlc/core/types.hpp"

namespace pbnlc {

struct TripletIndex {
  int m = 0;
  int n = 0;

  friend bool operator==(const TripletIndex&, const TripletIndex&) = default;
  friend auto operator<=>(const TripletIndex&, const TripletIndex&) = default;  // row-major: m, then n
};

/// Ordered set of triplet offsets (m, n) for a symbol window of size
/// 2*half_window+1. Canonical order is row-major by m then n.
class TripletSet {
 public:
  TripletSet() = default;

  TripletSet(std::vector<TripletIndex> indices, int window, double truncation_param = 0.0)
      : indices_(std::move(indices)), window_(window), rho_(truncation_param) {
    if (window_ < 1 || window_ % 2 == 0) throw Error("TripletSet: window must be a positive odd integer");
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
      throw Error("TripletSet: duplicate index");
    const int h = half_window();
    for (const auto& t : indices_)
      if (std::abs(t.m) > h || std::abs(t.n) > h) throw Error("TripletSet: index outside the window");
    build_lookup();
  }

  /// Every (m, n) with |m|, |n| <= window/2.
  static TripletSet full_grid(int window) {
    if (window < 1 || window % 2 == 0) throw Error("TripletSet: window must be a positive odd integer");
    const int h = window / 2;
    std::vector<TripletIndex> idx;
    idx.reserve(static_cast<std::size_t>(window) * static_cast<std::size_t>(window));
    for (int m = -h; m <= h; ++m)
      for (int n = -h; n <= h; ++n) idx.push_back({m, n});
    return TripletSet(std::move(idx), window, 0.0);
  }

  const std::vector<TripletIndex>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const TripletIndex& operator[](std::size_t i) const { return indices_[i]; }
  int window() const { return window_; }
  int half_window() const { return window_ / 2; }
  double truncation_param() const { return rho_; }

  /// Position of (m, n) in canonical order, or -1.
  long find(int m, int n) const {
    const int h = half_window();
    if (std::abs(m) > h || std::abs(n) > h) return -1;
    return lookup_[static_cast<std::size_t>((m + h) * window_ + (n + h))];
  }
  bool contains(int m, int n) const { return find(m, n) >= 0; }

  /// Largest |m|, |n| or |m+n| over the set: the reach of the triplets
  /// around the symbol of interest.
  int max_reach() const {
    int r = 0;
    for (const auto& t : indices_) r = std::max({r, std::abs(t.m), std::abs(t.n), std::abs(t.m + t.n)});
    return r;
  }

  bool closed_under_swap() const {
    return std::all_of(indices_.begin(), indices_.end(), [&](const TripletIndex& t) { return contains(t.n, t.m); });
  }

  /// Entries with n == 0, whose triplets are proportional to the symbol of interest.
  std::size_t degenerate_count() const {
    return static_cast<std::size_t>(
        std::count_if(indices_.begin(), indices_.end(), [](const TripletIndex& t) { return t.n == 0; }));
  }

  friend bool operator==(const TripletSet& a, const TripletSet& b) {
    return a.window_ == b.window_ && a.indices_ == b.indices_;
  }

 private:
  void build_lookup() {
    lookup_.assign(static_cast<std::size_t>(window_) * static_cast<std::size_t>(window_), -1);
    const int h = half_window();
    for (std::size_t i = 0; i < indices_.size(); ++i)
      lookup_[static_cast<std::size_t>((indices_[i].m + h) * window_ + (indices_[i].n + h))] = static_cast<long>(i);
  }

  std::vector<TripletIndex> indices_;
  int window_ = 1;
  double rho_ = 0.0;
  std::vector<long> lookup_;
};

/// Per-symbol triplet values for the X (H) and Y (V) outputs, in the
/// canonical order of the generating TripletSet. `pair` holds the shared
/// dual-polarization pair product of each entry (real-valued for n = 0).
struct TripletFeatures {
  cvec h;
  cvec v;
  cvec pair;

  friend bool operator==(const TripletFeatures&, const TripletFeatures&) = default;
};

}  // namespace pbnlc
