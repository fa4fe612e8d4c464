#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/triplets/compute.hpp"
#include "pbnlc/verify/oracles.hpp"

using namespace pbnlc;

namespace {

SymbolSequence constant_symbols(std::size_t n, cd v) {
  SymbolSequence s;
  s.symbol_rate = 32e9;
  s.x_pol.assign(n, v);
  s.y_pol.assign(n, v);
  return s;
}

// Smooth, decaying synthetic coefficients with the exact conjugate symmetry
// C(-m,n) = conj C(m,n) of the analytic ones.
CoefficientSet synthetic_coefficients(int window) {
  CoefficientSet c;
  c.set = TripletSet::full_grid(window);
  for (const auto& t : c.set.indices()) {
    const double mag = 1.0 / (1.0 + std::abs(t.m * t.n) + 0.01 * (t.m * t.m + t.n * t.n));
    const double ph = 0.1 * std::abs(t.m * t.n);
    c.values.push_back(std::polar(mag, t.m * t.n < 0 ? -ph : ph));
  }
  return c;
}

TripletSet random_set(int window, double fraction, std::uint64_t seed) { return oracle::random_subset(window, fraction, seed); }

cd scalar_triplet(const SymbolSequence& s, std::size_t k, int m, int n, bool h_output) {
  const auto at = [&](const cvec& p, long long i) { return p[static_cast<std::size_t>(i)]; };
  const auto kk = static_cast<long long>(k);
  const cd pair = at(s.x_pol, kk + m) * std::conj(at(s.x_pol, kk + m + n)) +
                  at(s.y_pol, kk + m) * std::conj(at(s.y_pol, kk + m + n));
  return pair * at(h_output ? s.x_pol : s.y_pol, kk + n);
}

}  // namespace

TEST(TripletSet, CanonicalOrderAndLookup) {
  const TripletSet s({{1, 0}, {-1, 2}, {0, 0}, {-1, -1}}, 5);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], (TripletIndex{-1, -1}));
  EXPECT_EQ(s[1], (TripletIndex{-1, 2}));
  EXPECT_EQ(s[3], (TripletIndex{1, 0}));
  EXPECT_EQ(s.find(0, 0), 2);
  EXPECT_EQ(s.find(2, 2), -1);
  EXPECT_EQ(s.find(9, 0), -1);
  EXPECT_EQ(s.max_reach(), 2);
  EXPECT_EQ(s.degenerate_count(), 2u);
}

TEST(TripletSet, RejectsBadInput) {
  EXPECT_THROW(TripletSet({{0, 0}, {0, 0}}, 5), Error);
  EXPECT_THROW(TripletSet({{3, 0}}, 5), Error);
  EXPECT_THROW(TripletSet({{0, 0}}, 4), Error);
  EXPECT_THROW(TripletSet::full_grid(0), Error);
}

TEST(GenerateTripletSet, ZeroThresholdKeepsFullGrid) {
  const CoefficientSet c = synthetic_coefficients(75);
  const TripletSet s = generate_triplet_set(75, 0.0, c);
  EXPECT_EQ(s.size(), 5625u);
  EXPECT_EQ(s, TripletSet::full_grid(75));
}

TEST(GenerateTripletSet, ThresholdKeepsLargeEntries) {
  const CoefficientSet c = synthetic_coefficients(11);
  const double rho = 0.2;
  const TripletSet s = generate_triplet_set(11, rho, c);
  const double mx = c.max_abs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double r = std::abs(c.values[i]) / mx;
    if (std::abs(r - rho) > 1e-6) {
      EXPECT_EQ(s.contains(c.set[i].m, c.set[i].n), r >= rho);
    }
  }
  EXPECT_TRUE(s.closed_under_swap());
  EXPECT_EQ(s.truncation_param(), rho);
}

TEST(GenerateTripletSet, RestrictsToTheRequestedWindow) {
  const CoefficientSet c = synthetic_coefficients(11);
  const TripletSet s = generate_triplet_set(5, 0.0, c);
  EXPECT_EQ(s, TripletSet::full_grid(5));
}

TEST(GenerateTripletSet, RejectsEmptyResultAndMissingCoverage) {
  const CoefficientSet c = synthetic_coefficients(5);
  EXPECT_THROW(generate_triplet_set(5, 2.0, c), Error);
  EXPECT_THROW(generate_triplet_set(7, 0.0, c), Error);
}

TEST(CalibrateRho, HitsTargetCountExactly) {
  const CoefficientSet c = synthetic_coefficients(15);
  // Reachable targets are the cumulative sizes of the tie groups.
  std::vector<double> mags;
  for (std::size_t i = 0; i < c.size(); ++i) mags.push_back(truncation_magnitude(c.set[i], c.values[i], c.max_abs()));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  int checked = 0;
  for (std::size_t t = 1; t < mags.size(); ++t) {
    if (mags[t - 1] == mags[t]) continue;
    EXPECT_EQ(generate_triplet_set(15, calibrate_rho(15, t, c), c).size(), t);
    ++checked;
  }
  EXPECT_GT(checked, 20);
  EXPECT_EQ(generate_triplet_set(15, calibrate_rho(15, mags.size(), c), c).size(), mags.size());
}

TEST(CalibrateRho, RejectsTargetsInsideATie) {
  const CoefficientSet c = synthetic_coefficients(15);
  // (0,±1) and (±1,0) share a magnitude, so only 1 or 5 entries are reachable there.
  EXPECT_THROW(calibrate_rho(15, 2, c), Error);
  EXPECT_THROW(calibrate_rho(15, 0, c), Error);
  EXPECT_THROW(calibrate_rho(15, 226, c), Error);
}

TEST(BruteTriplets, ConstantFieldGivesTwo) {
  const SymbolSequence s = constant_symbols(64, cd{1.0, 0.0});
  const TripletSet set = TripletSet::full_grid(9);
  const TripletFeatures f = compute_triplets_brute(s, 32, set);
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(f.h[i], cd(2.0, 0.0));
    EXPECT_EQ(f.v[i], cd(2.0, 0.0));
  }
}

TEST(BruteTriplets, SingleNonzeroSymbol) {
  const cd a{0.6, -0.3};
  SymbolSequence s = constant_symbols(64, cd{0.0, 0.0});
  s.x_pol[30] = a;
  s.y_pol[30] = a;
  const TripletSet set = TripletSet::full_grid(9);
  const TripletFeatures f = compute_triplets_brute(s, 30, set);
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i] == TripletIndex{0, 0}) {
      EXPECT_NEAR(std::abs(f.h[i] - 2.0 * std::norm(a) * a), 0.0, 1e-15);
    } else {
      EXPECT_EQ(f.h[i], cd(0.0, 0.0));
      EXPECT_EQ(f.v[i], cd(0.0, 0.0));
    }
  }
}

TEST(BruteTriplets, MatchesScalarRecomputation) {
  const SymbolSequence s = oracle::random_symbols(200, 3);
  const TripletSet full = TripletSet::full_grid(21);
  std::mt19937_64 rng(4);
  std::vector<TripletIndex> pick;
  for (int i = 0; i < 10; ++i) pick.push_back(full[rng() % full.size()]);
  std::sort(pick.begin(), pick.end());
  pick.erase(std::unique(pick.begin(), pick.end()), pick.end());
  const TripletSet set(pick, 21);
  for (const std::size_t k : {40u, 100u, 150u}) {
    const TripletFeatures f = compute_triplets_brute(s, k, set);
    for (std::size_t i = 0; i < set.size(); ++i) {
      EXPECT_EQ(f.h[i], scalar_triplet(s, k, set[i].m, set[i].n, true));
      EXPECT_EQ(f.v[i], scalar_triplet(s, k, set[i].m, set[i].n, false));
    }
  }
}

TEST(BruteTriplets, RejectsIndicesNearTheEdge) {
  const SymbolSequence s = oracle::random_symbols(100, 5);
  const TripletSet set = TripletSet::full_grid(9);  // reach 8
  EXPECT_THROW(compute_triplets_brute(s, 7, set), Error);
  EXPECT_THROW(compute_triplets_brute(s, 92, set), Error);
  EXPECT_NO_THROW(compute_triplets_brute(s, 8, set));
  EXPECT_NO_THROW(compute_triplets_brute(s, 91, set));
}

TEST(BruteTriplets, ConjugationSymmetry) {
  const SymbolSequence s = oracle::random_symbols(200, 6);
  SymbolSequence c = s;
  for (auto* pol : {&c.x_pol, &c.y_pol})
    for (auto& v : *pol) v = std::conj(v);
  const TripletSet set = random_set(15, 0.5, 7);
  const TripletFeatures a = compute_triplets_brute(s, 100, set);
  const TripletFeatures b = compute_triplets_brute(c, 100, set);
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_NEAR(std::abs(b.h[i] - std::conj(a.h[i])), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(b.v[i] - std::conj(a.v[i])), 0.0, 1e-14);
  }
}

TEST(BruteTriplets, CubicScaling) {
  const SymbolSequence s = oracle::random_symbols(200, 8);
  const double k = 1.7;
  SymbolSequence c = s;
  for (auto* pol : {&c.x_pol, &c.y_pol})
    for (auto& v : *pol) v *= k;
  const TripletSet set = random_set(15, 0.5, 9);
  const TripletFeatures a = compute_triplets_brute(s, 100, set);
  const TripletFeatures b = compute_triplets_brute(c, 100, set);
  for (std::size_t i = 0; i < set.size(); ++i) EXPECT_NEAR(std::abs(b.h[i] - k * k * k * a.h[i]), 0.0, 1e-13);
}

TEST(BruteTriplets, PolarizationExchange) {
  const SymbolSequence s = oracle::random_symbols(200, 10);
  SymbolSequence w = s;
  std::swap(w.x_pol, w.y_pol);
  const TripletSet set = random_set(15, 0.5, 11);
  const TripletFeatures a = compute_triplets_brute(s, 100, set);
  const TripletFeatures b = compute_triplets_brute(w, 100, set);
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_NEAR(std::abs(b.h[i] - a.v[i]), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(b.v[i] - a.h[i]), 0.0, 1e-14);
  }
}

TEST(CyclicBuffer, BitwiseEqualToBruteForce) {
  const std::size_t n = 10000;
  const TripletSet set = random_set(37, 0.5, 12);
  const SymbolSequence s = oracle::random_symbols(n + 2 * 36, 13);
  const SymbolRange r = triplet_valid_range(s.size(), set);
  std::size_t mismatches = 0;
  std::size_t count = 0;
  compute_triplets_cb(s, r, set, [&](std::size_t k, const TripletFeatures& f) {
    mismatches += !(f == compute_triplets_brute(s, k, set));
    ++count;
  });
  EXPECT_EQ(mismatches, 0u);
  EXPECT_GE(count, n);
}

TEST(CyclicBuffer, ToyGridFreshCount) {
  const TripletSet set = TripletSet::full_grid(5);
  const SymbolSequence s = oracle::random_symbols(100, 14);
  const CbStatistics st = compute_triplets_cb(s, {10, 60}, set, [](std::size_t, const TripletFeatures&) {});
  EXPECT_EQ(st.fresh_per_symbol, 5u);
  EXPECT_EQ(st.symbols, 50u);
  EXPECT_EQ(st.fresh_pairs, 25u + 49u * 5u);
  EXPECT_EQ(st.reused_pairs, 49u * 20u);
}

TEST(CyclicBuffer, SavesWorkForEveryWindow) {
  for (int w = 3; w <= 75; w += 2) {
    const CyclicTripletBuffer full(TripletSet::full_grid(w));
    EXPECT_LT(full.fresh_per_symbol(), static_cast<std::size_t>(w * w)) << w;
    const TripletSet sub = random_set(w, 0.6, static_cast<std::uint64_t>(w));
    EXPECT_LE(CyclicTripletBuffer(sub).fresh_per_symbol(), sub.size()) << w;
  }
}

TEST(CyclicBuffer, RestartsOnNonConsecutiveIndex) {
  const TripletSet set = random_set(15, 0.7, 15);
  const SymbolSequence s = oracle::random_symbols(300, 16);
  CyclicTripletBuffer buf(set);
  TripletFeatures f;
  for (const std::size_t k : {50u, 51u, 52u, 90u, 91u, 40u}) {
    buf.next(s, k, f);
    EXPECT_TRUE(f == compute_triplets_brute(s, k, set)) << k;
  }
}

TEST(CyclicBuffer, TamperIsDetected) {
  const TripletSet set = random_set(15, 0.7, 17);
  const SymbolSequence s = oracle::random_symbols(300, 18);
  CyclicTripletBuffer buf(set);
  buf.set_tamper(1e-3);
  TripletFeatures f;
  std::size_t mismatches = 0;
  for (std::size_t k = 20; k < 200; ++k) {
    buf.next(s, k, f);
    mismatches += !(f == compute_triplets_brute(s, k, set));
  }
  EXPECT_GT(mismatches, 100u);
}

TEST(CountingArith, MatchesPlainResults) {
  const TripletSet set = random_set(15, 0.5, 19);
  const SymbolSequence s = oracle::random_symbols(200, 20);
  CountingArith ar;
  TripletFeatures f;
  compute_triplets_brute(s, 100, set, f, ar);
  EXPECT_TRUE(f == compute_triplets_brute(s, 100, set));
  EXPECT_EQ(ar.real_mults, 4u * 4u * set.size());  // two pair products and two final products per index
}
