#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/nlc/engines.hpp"

namespace pbnlc {

struct KmeansOptions {
  int max_iterations = 200;
  bool exclude_degenerate = false;  // keep n = 0 entries exact (for the AM engines)
};

namespace detail {

inline double sq_dist(cd a, cd b) { return std::norm(a - b); }

}  // namespace detail

/// K-means on the coefficients as points of the complex plane. Seeding is
/// k-means++ from `seed`; Lloyd iterations run until the assignment is
/// stable or max_iterations is reached. Clusters are numbered by first
/// appearance in canonical index order, so the result does not depend on
/// the seeding order. K larger than the number of distinct values is
/// reduced to that number and reported in `notice`.
inline QuantizedCoefficients kmeans_quantize(const CoefficientSet& coeffs, int k, std::uint64_t seed,
                                             const KmeansOptions& opt = {}, std::vector<double>* inertia_trace = nullptr) {
  coeffs.validate();
  if (k < 1) throw Error("kmeans_quantize: K must be >= 1");
  if (coeffs.per_polarization()) throw Error("kmeans_quantize: per-polarization coefficient sets are not supported");
  QuantizedCoefficients q;
  q.set = coeffs.set;
  q.scaling = coeffs.scaling;
  q.assignment.assign(coeffs.size(), -1);

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (!(opt.exclude_degenerate && coeffs.set[i].n == 0)) members.push_back(i);
  if (members.size() != coeffs.size()) q.exact = coeffs.values;
  if (members.empty()) return q;

  std::vector<cd> pts(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) pts[i] = coeffs.values[members[i]];
  const auto less = [](cd a, cd b) { return std::pair(a.real(), a.imag()) < std::pair(b.real(), b.imag()); };
  const std::size_t distinct = std::set<cd, decltype(less)>(pts.begin(), pts.end(), less).size();
  auto kk = static_cast<std::size_t>(k);
  if (kk > distinct) {
    q.notice = "K reduced from " + std::to_string(k) + " to " + std::to_string(distinct) +
               " (number of distinct coefficient values)";
    kk = distinct;
  }

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::vector<cd> cent;
  cent.reserve(kk);
  cent.push_back(pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng)]);
  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = detail::sq_dist(pts[i], cent[0]);
  while (cent.size() < kk) {
    double total = 0.0;
    for (const double d : d2) total += d;
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      u -= d2[i];
      if (u < 0.0) break;
    }
    cent.push_back(pts[pick]);
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::min(d2[i], detail::sq_dist(pts[i], cent.back()));
  }

  std::vector<int> assign(pts.size(), -1);
  const auto nearest = [&](cd p) {
    int best = 0;
    double bd = detail::sq_dist(p, cent[0]);
    for (std::size_t j = 1; j < cent.size(); ++j) {
      const double d = detail::sq_dist(p, cent[j]);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(j);
      }
    }
    return std::pair(best, bd);
  };
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int a = nearest(pts[i]).first;
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
    // Means are accumulated relative to the first member so that a cluster
    // of identical values reproduces that value exactly.
    std::vector<cd> first(cent.size());
    std::vector<cd> sum(cent.size(), cd{0.0, 0.0});
    std::vector<std::size_t> cnt(cent.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto j = static_cast<std::size_t>(assign[i]);
      if (cnt[j]++ == 0) first[j] = pts[i];
      sum[j] += pts[i] - first[j];
    }
    for (std::size_t j = 0; j < cent.size(); ++j)
      if (cnt[j] > 0) cent[j] = first[j] + sum[j] / static_cast<double>(cnt[j]);
    if (inertia_trace) {
      double in = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) in += detail::sq_dist(pts[i], cent[static_cast<std::size_t>(assign[i])]);
      inertia_trace->push_back(in);
    }
  }
  q.iterations = it;

  // Relabel by first appearance; empty clusters are dropped.
  std::vector<int> label(cent.size(), -1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto& l = label[static_cast<std::size_t>(assign[i])];
    if (l < 0) {
      l = static_cast<int>(q.centroids.size());
      q.centroids.push_back(cent[static_cast<std::size_t>(assign[i])]);
    }
    q.assignment[members[i]] = l;
  }
  q.inertia = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    q.inertia += detail::sq_dist(pts[i], q.centroids[static_cast<std::size_t>(q.assignment[members[i]])]);
  return q;
}

}  // namespace pbnlc
