#pragma once

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/core/hash.hpp"
#include "pbnlc/fnn/network.hpp"
#include "pbnlc/nlc/engines.hpp"
#include "pbnlc/triplets/triplet_set.hpp"

// Text artifacts: a header of "key value" lines, then one line per entry.
// Doubles are written with 17 significant digits and round-trip exactly.

namespace pbnlc {

namespace detail {

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw Error("not a number: '" + s + "'");
  return v;
}

class HeaderReader {
 public:
  HeaderReader(std::istream& in, const std::string& magic) : in_(in) {
    std::string line;
    if (!std::getline(in_, line) || line != magic) throw Error("expected a '" + magic + "' file");
  }

  std::string value(const std::string& key) {
    std::string line;
    if (!std::getline(in_, line)) throw Error("unexpected end of file, expected '" + key + "'");
    if (line.rfind(key + " ", 0) != 0 && line != key) throw Error("expected '" + key + "', found '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
  }

  double number(const std::string& key) { return parse_double(value(key)); }
  long long integer(const std::string& key) { return std::stoll(value(key)); }

 private:
  std::istream& in_;
};

inline std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string f;
  while (is >> f) out.push_back(f);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

inline TripletIndex read_index(const std::vector<std::string>& f) { return {std::stoi(f.at(0)), std::stoi(f.at(1))}; }

}  // namespace detail

inline void write_triplet_set(std::ostream& out, const TripletSet& set) {
  out << "pbnlc-triplets 1\n"
      << "window " << set.window() << "\n"
      << "rho " << exact_decimal(set.truncation_param()) << "\n"
      << "count " << set.size() << "\n";
  for (const auto& t : set.indices()) out << t.m << ' ' << t.n << "\n";
}

inline TripletSet read_triplet_set(std::istream& in) {
  detail::HeaderReader h(in, "pbnlc-triplets 1");
  const auto window = static_cast<int>(h.integer("window"));
  const double rho = h.number("rho");
  const auto count = static_cast<std::size_t>(h.integer("count"));
  std::vector<TripletIndex> idx;
  std::string line;
  while (idx.size() < count && std::getline(in, line)) idx.push_back(detail::read_index(detail::split_fields(line)));
  if (idx.size() != count) throw Error("triplet file: expected " + std::to_string(count) + " entries");
  return TripletSet(std::move(idx), window, rho);
}

inline void write_coefficients(std::ostream& out, const CoefficientSet& c) {
  c.validate();
  out << "pbnlc-coefficients 1\n"
      << "window " << c.set.window() << "\n"
      << "rho " << exact_decimal(c.set.truncation_param()) << "\n"
      << "scaling " << to_string(c.scaling) << "\n"
      << "symbol_rate " << exact_decimal(c.symbol_rate) << "\n"
      << "link_hash " << hex64(c.link_hash) << "\n"
      << "link " << c.link_summary << "\n"
      << "pulse " << c.pulse_description << "\n"
      << "per_polarization " << (c.per_polarization() ? 1 : 0) << "\n"
      << "count " << c.size() << "\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out << c.set[i].m << ' ' << c.set[i].n << ' ' << exact_decimal(c.values[i].real()) << ' '
        << exact_decimal(c.values[i].imag());
    if (c.per_polarization())
      out << ' ' << exact_decimal(c.values_v[i].real()) << ' ' << exact_decimal(c.values_v[i].imag());
    out << "\n";
  }
}

inline CoefficientSet read_coefficients(std::istream& in) {
  detail::HeaderReader h(in, "pbnlc-coefficients 1");
  CoefficientSet c;
  const auto window = static_cast<int>(h.integer("window"));
  const double rho = h.number("rho");
  c.scaling = scaling_from_string(h.value("scaling"));
  c.symbol_rate = h.number("symbol_rate");
  c.link_hash = std::stoull(h.value("link_hash"), nullptr, 16);
  c.link_summary = h.value("link");
  c.pulse_description = h.value("pulse");
  const bool per_pol = h.integer("per_polarization") != 0;
  const auto count = static_cast<std::size_t>(h.integer("count"));
  std::vector<TripletIndex> idx;
  std::string line;
  while (idx.size() < count && std::getline(in, line)) {
    const auto f = detail::split_fields(line);
    if (f.size() != (per_pol ? 6u : 4u)) throw Error("coefficient file: malformed entry '" + line + "'");
    idx.push_back(detail::read_index(f));
    c.values.emplace_back(detail::parse_double(f[2]), detail::parse_double(f[3]));
    if (per_pol) c.values_v.emplace_back(detail::parse_double(f[4]), detail::parse_double(f[5]));
  }
  if (idx.size() != count) throw Error("coefficient file: expected " + std::to_string(count) + " entries");
  c.set = TripletSet(std::move(idx), window, rho);
  c.validate();
  return c;
}

inline void write_quantized(std::ostream& out, const QuantizedCoefficients& q) {
  q.validate();
  out << "pbnlc-quantized 1\n"
      << "window " << q.set.window() << "\n"
      << "rho " << exact_decimal(q.set.truncation_param()) << "\n"
      << "scaling " << to_string(q.scaling) << "\n"
      << "clusters " << q.k() << "\n";
  for (const auto& c : q.centroids) out << exact_decimal(c.real()) << ' ' << exact_decimal(c.imag()) << "\n";
  out << "count " << q.set.size() << "\n";
  for (std::size_t i = 0; i < q.set.size(); ++i) {
    out << q.set[i].m << ' ' << q.set[i].n << ' ' << q.assignment[i];
    if (q.assignment[i] < 0) out << ' ' << exact_decimal(q.exact[i].real()) << ' ' << exact_decimal(q.exact[i].imag());
    out << "\n";
  }
}

inline QuantizedCoefficients read_quantized(std::istream& in) {
  detail::HeaderReader h(in, "pbnlc-quantized 1");
  QuantizedCoefficients q;
  const auto window = static_cast<int>(h.integer("window"));
  const double rho = h.number("rho");
  q.scaling = scaling_from_string(h.value("scaling"));
  const auto k = static_cast<std::size_t>(h.integer("clusters"));
  std::string line;
  for (std::size_t j = 0; j < k; ++j) {
    if (!std::getline(in, line)) throw Error("quantized file: missing centroid");
    const auto f = detail::split_fields(line);
    if (f.size() != 2) throw Error("quantized file: malformed centroid '" + line + "'");
    q.centroids.emplace_back(detail::parse_double(f[0]), detail::parse_double(f[1]));
  }
  const auto count = static_cast<std::size_t>(h.integer("count"));
  std::vector<TripletIndex> idx;
  std::vector<cd> exact;
  bool any_exact = false;
  while (idx.size() < count && std::getline(in, line)) {
    const auto f = detail::split_fields(line);
    if (f.size() != 3 && f.size() != 5) throw Error("quantized file: malformed entry '" + line + "'");
    idx.push_back(detail::read_index(f));
    q.assignment.push_back(std::stoi(f[2]));
    if (f.size() == 5) {
      exact.emplace_back(detail::parse_double(f[3]), detail::parse_double(f[4]));
      any_exact = true;
    } else {
      exact.emplace_back(0.0, 0.0);
    }
  }
  if (idx.size() != count) throw Error("quantized file: expected " + std::to_string(count) + " entries");
  if (any_exact) q.exact = std::move(exact);
  q.set = TripletSet(std::move(idx), window, rho);
  q.validate();
  return q;
}

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

inline Eigen::MatrixXd json_matrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows) throw Error("model file: matrix row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(r.size()) != cols) throw Error("model file: matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = r.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

inline nlohmann::json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd json_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/// Self-describing JSON form of a model (config, standardization, weights,
/// masks, histories). Numbers are serialized in shortest round-trip form.
inline nlohmann::json fnn_to_json(const FnnModel& m) {
  m.validate();
  nlohmann::json j;
  j["format"] = "pbnlc-fnn 1";
  j["config"] = {{"hidden", m.config.hidden},
                 {"activation", to_string(m.config.activation)},
                 {"mode", to_string(m.config.mode)},
                 {"learning_rate", m.config.learning_rate},
                 {"epochs", m.config.epochs},
                 {"batch_size", m.config.batch_size},
                 {"rng_seed", m.config.rng_seed}};
  j["input_mean"] = detail::vector_json(m.input_mean);
  j["input_scale"] = detail::vector_json(m.input_scale);
  j["output_scale"] = m.output_scale;
  j["loss_norm"] = m.loss_norm;
  j["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < m.layers(); ++l) {
    j["layers"].push_back({{"rows", m.weights[l].rows()},
                           {"cols", m.weights[l].cols()},
                           {"weights", detail::matrix_json(m.weights[l])},
                           {"bias", detail::vector_json(m.biases[l])},
                           {"mask", detail::matrix_json(m.masks[l])}});
  }
  j["train_history"] = m.train_history;
  j["validation_history"] = m.validation_history;
  return j;
}

inline FnnModel fnn_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "pbnlc-fnn 1") throw Error("model file: unknown format");
  FnnModel m;
  const auto& c = j.at("config");
  m.config.hidden = c.at("hidden").get<std::vector<int>>();
  m.config.activation = activation_from_string(c.at("activation").get<std::string>());
  m.config.mode = fnn_mode_from_string(c.at("mode").get<std::string>());
  m.config.learning_rate = c.at("learning_rate").get<double>();
  m.config.epochs = c.at("epochs").get<int>();
  m.config.batch_size = c.at("batch_size").get<int>();
  m.config.rng_seed = c.at("rng_seed").get<std::uint64_t>();
  m.input_mean = detail::json_vector(j.at("input_mean"));
  m.input_scale = detail::json_vector(j.at("input_scale"));
  m.output_scale = j.at("output_scale").get<double>();
  m.loss_norm = j.at("loss_norm").get<double>();
  for (const auto& l : j.at("layers")) {
    const auto rows = l.at("rows").get<Eigen::Index>();
    const auto cols = l.at("cols").get<Eigen::Index>();
    m.weights.push_back(detail::json_matrix(l.at("weights"), rows, cols));
    m.biases.push_back(detail::json_vector(l.at("bias")));
    m.masks.push_back(detail::json_matrix(l.at("mask"), rows, cols));
  }
  m.train_history = j.at("train_history").get<std::vector<double>>();
  m.validation_history = j.at("validation_history").get<std::vector<double>>();
  m.validate();
  return m;
}

inline void save_triplet_set(const std::string& path, const TripletSet& s) {
  auto out = detail::open_out(path);
  write_triplet_set(out, s);
}
inline TripletSet load_triplet_set(const std::string& path) {
  auto in = detail::open_in(path);
  return read_triplet_set(in);
}
inline void save_coefficients(const std::string& path, const CoefficientSet& c) {
  auto out = detail::open_out(path);
  write_coefficients(out, c);
}
inline CoefficientSet load_coefficients(const std::string& path) {
  auto in = detail::open_in(path);
  return read_coefficients(in);
}
inline void save_quantized(const std::string& path, const QuantizedCoefficients& q) {
  auto out = detail::open_out(path);
  write_quantized(out, q);
}
inline QuantizedCoefficients load_quantized(const std::string& path) {
  auto in = detail::open_in(path);
  return read_quantized(in);
}
inline void save_fnn(const std::string& path, const FnnModel& m) {
  auto out = detail::open_out(path);
  out << fnn_to_json(m).dump(1) << "\n";
}
inline FnnModel load_fnn(const std::string& path) {
  auto in = detail::open_in(path);
  return fnn_from_json(nlohmann::json::parse(in));
}

}  // namespace pbnlc
