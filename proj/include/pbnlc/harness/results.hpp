#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pbnlc/core/hash.hpp"
#include "pbnlc/core/types.hpp"
#include "pbnlc/harness/config.hpp"

namespace pbnlc {

struct ResultRow {
  std::string technique;
  double power_dbm = 0.0;
  double q_db = 0.0;
  double q_gain_db = 0.0;  // against cdc_only on the same trace
  std::uint64_t mults_per_symbol = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  // Details (JSON only).
  std::string stage;
  int window = 0;
  std::size_t triplets = 0;
  bool cb = false;
  int clusters = 0;
  double sparsity = 0.0;
  double ber = 0.0;
  std::size_t bit_errors = 0;
  std::string q_status;
  std::string status = "ok";
  std::string error;

  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kCsvHeader = "technique,power_dbm,q_db,q_gain_db,mults_per_symbol,seed,config_hash";

namespace detail {

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::json row_to_json(const ResultRow& r) {
  return {{"technique", r.technique},
          {"power_dbm", r.power_dbm},
          {"q_db", detail::number_or_null(r.q_db)},
          {"q_gain_db", detail::number_or_null(r.q_gain_db)},
          {"mults_per_symbol", r.mults_per_symbol},
          {"seed", r.seed},
          {"config_hash", r.config_hash},
          {"stage", r.stage},
          {"window", r.window},
          {"triplets", r.triplets},
          {"cb", r.cb},
          {"clusters", r.clusters},
          {"sparsity", r.sparsity},
          {"ber", detail::number_or_null(r.ber)},
          {"bit_errors", r.bit_errors},
          {"q_status", r.q_status},
          {"status", r.status},
          {"error", r.error}};
}

inline ResultRow row_from_json(const nlohmann::json& j) {
  ResultRow r;
  r.technique = j.at("technique").get<std::string>();
  r.power_dbm = j.at("power_dbm").get<double>();
  r.q_db = detail::number_from(j.at("q_db"));
  r.q_gain_db = detail::number_from(j.at("q_gain_db"));
  r.mults_per_symbol = j.at("mults_per_symbol").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.stage = j.at("stage").get<std::string>();
  r.window = j.at("window").get<int>();
  r.triplets = j.at("triplets").get<std::size_t>();
  r.cb = j.at("cb").get<bool>();
  r.clusters = j.at("clusters").get<int>();
  r.sparsity = j.at("sparsity").get<double>();
  r.ber = detail::number_from(j.at("ber"));
  r.bit_errors = j.at("bit_errors").get<std::size_t>();
  r.q_status = j.at("q_status").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.error = j.at("error").get<std::string>();
  return r;
}

inline nlohmann::json results_to_json(const std::vector<ResultRow>& rows, const std::string& kind) {
  nlohmann::json j;
  j["software_version"] = kSoftwareVersion;
  j["kind"] = kind;
  j["config_hash"] = rows.empty() ? "" : rows.front().config_hash;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) j["rows"].push_back(row_to_json(r));
  return j;
}

inline std::vector<ResultRow> results_from_json(const nlohmann::json& j) {
  std::vector<ResultRow> rows;
  for (const auto& r : j.at("rows")) rows.push_back(row_from_json(r));
  return rows;
}

/// CSV with a fixed column order, preceded by a comment line carrying the
/// software version and configuration hash.
inline std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "# software_version=" << kSoftwareVersion << " config_hash=" << (rows.empty() ? "" : rows.front().config_hash)
     << "\n"
     << kCsvHeader << "\n";
  for (const auto& r : rows)
    os << r.technique << ',' << exact_decimal(r.power_dbm) << ',' << exact_decimal(r.q_db) << ','
       << exact_decimal(r.q_gain_db) << ',' << r.mults_per_symbol << ',' << r.seed << ',' << r.config_hash << "\n";
  return os.str();
}

/// Parses the CSV columns; detail fields keep their defaults.
inline std::vector<ResultRow> results_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  bool header = false;
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kCsvHeader) throw Error("results CSV: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw Error("results CSV: malformed row '" + line + "'");
    ResultRow r;
    r.technique = f[0];
    r.power_dbm = std::strtod(f[1].c_str(), nullptr);
    r.q_db = std::strtod(f[2].c_str(), nullptr);
    r.q_gain_db = std::strtod(f[3].c_str(), nullptr);
    r.mults_per_symbol = std::stoull(f[4]);
    r.seed = std::stoull(f[5]);
    r.config_hash = f[6];
    rows.push_back(std::move(r));
  }
  if (!header) throw Error("results CSV: missing header");
  return rows;
}

/// Writes <dir>/<name>.csv and <dir>/<name>.json.
inline void emit_results(const std::vector<ResultRow>& rows, const std::string& dir, const std::string& name) {
  if (rows.empty()) throw Error("emit_results: no rows");
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& ext, const std::string& body) {
    const std::string path = (std::filesystem::path(dir) / (name + ext)).string();
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << body;
    if (!out) throw Error("write failed for '" + path + "'");
  };
  write(".csv", results_to_csv(rows));
  write(".json", results_to_json(rows, name).dump(1) + "\n");
}

}  // namespace pbnlc
