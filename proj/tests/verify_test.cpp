#include <gtest/gtest.h>

#include <chrono>
#include <set>

#include "pbnlc/verify/oracles.hpp"

using namespace pbnlc;

namespace {

struct Timed {
  std::vector<OracleReport> reports;
  double seconds = 0.0;
};

const Timed& unit_run() {
  static const Timed t = [] {
    const auto start = std::chrono::steady_clock::now();
    Timed out;
    out.reports = run_all_oracles(OracleScale::kUnit);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }();
  return t;
}

}  // namespace

TEST(Verify, AllUnitOraclesPass) {
  const auto& reps = unit_run().reports;
  EXPECT_EQ(reps.size(), 15u);
  std::set<std::string> names;
  for (const auto& r : reps) {
    EXPECT_TRUE(r.pass) << r.name << " deviation " << r.deviation << " tolerance " << r.tolerance;
    EXPECT_LE(r.deviation, r.tolerance) << r.name;
    EXPECT_EQ(r.inputs_digest.size(), 16u) << r.name;
    names.insert(r.name);
  }
  EXPECT_EQ(names.size(), reps.size());
}

TEST(Verify, UnitScaleIsFast) { EXPECT_LT(unit_run().seconds, 60.0); }

TEST(Verify, Deterministic) {
  const auto again = run_all_oracles(OracleScale::kUnit, 2);
  const auto& first = unit_run().reports;
  ASSERT_EQ(again.size(), first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(again[i].name, first[i].name);
    EXPECT_EQ(again[i].deviation, first[i].deviation) << first[i].name;
    EXPECT_EQ(again[i].inputs_digest, first[i].inputs_digest) << first[i].name;
  }
}

TEST(Verify, TamperedBufferIsDetected) {
  const SymbolSequence s = oracle::random_symbols(300, 1);
  const TripletSet set = oracle::random_subset(9, 0.6, 2);
  EXPECT_LT(cb_deviation(s, set), 1e-12);
  EXPECT_GT(cb_deviation(s, set, 1e-3), 1e-4);
  EXPECT_TRUE(oracle_cb_tamper(OracleScale::kUnit).pass);
}

TEST(Verify, ReportJson) {
  const nlohmann::json j = oracle_report_json(unit_run().reports);
  EXPECT_EQ(j.at("checks").size(), 15u);
  for (const auto& c : j.at("checks")) EXPECT_EQ(c.at("status"), "pass") << c.at("name");
  OracleReport bad = make_report("x", 2.0, 1.0, "in");
  EXPECT_FALSE(bad.pass);
  EXPECT_EQ(to_json(bad).at("status"), "fail");
  EXPECT_THROW(oracle_scale_from_string("huge"), Error);
}

TEST(Verify, FftAgreesWithNaiveDft) {
  std::mt19937_64 rng(3);
  const cvec x = oracle::random_cvec(64, rng);
  cvec y = x;
  fft::forward(y);
  EXPECT_LT(oracle::max_abs_diff(y, oracle::naive_dft(x, -1)), 1e-12);
}
