#ifndef QLLL_IO_HPP
#define QLLL_IO_HPP

#include "qlll/core.hpp"
#include "qlll/decompose.hpp"
#include "qlll/ensembles.hpp"
#include "qlll/lll.hpp"
#include "qlll/qsat.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qlll::io {

using nlohmann::json;

inline constexpr int kInstanceFormatVersion = 1;

/// Instance layout: {"version": 1, "n_qubits": n, "k": k, "projectors": [{"qubits": [...],
/// "vectors": [[[re, im], ...], ...]}]}. Doubles are written shortest-round-trip.
inline json to_json(const QsatInstance &inst) {
  json projectors = json::array();
  for (const auto &p : inst.projectors) {
    json vecs = json::array();
    for (Eigen::Index t = 0; t < p.vectors.cols(); ++t) {
      json v = json::array();
      for (Eigen::Index i = 0; i < p.vectors.rows(); ++i) v.push_back({p.vectors(i, t).real(), p.vectors(i, t).imag()});
      vecs.push_back(std::move(v));
    }
    projectors.push_back({{"qubits", p.qubits}, {"vectors", std::move(vecs)}});
  }
  return {{"version", kInstanceFormatVersion}, {"n_qubits", inst.n_qubits}, {"k", inst.k}, {"projectors", std::move(projectors)}};
}

class FormatError : public Error {
 public:
  FormatError(const std::string &where, const std::string &what) : Error(where + ": " + what), where(where) {}
  std::string where;
};

namespace detail {

inline const json &field(const json &j, const char *key, const std::string &where) {
  if (!j.is_object()) throw FormatError(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::int64_t integer(const json &j, const std::string &where) {
  if (!j.is_number_integer()) throw FormatError(where, "expected an integer");
  return j.get<std::int64_t>();
}

inline double number(const json &j, const std::string &where) {
  if (!j.is_number()) throw FormatError(where, "expected a number");
  return j.get<double>();
}

}  // namespace detail

inline QsatInstance instance_from_json(const json &j, const ToleranceConfig &tol = {}) {
  const auto version = detail::integer(detail::field(j, "version", "$"), "$.version");
  if (version != kInstanceFormatVersion) throw FormatError("$.version", "unsupported version " + std::to_string(version));
  QsatInstance inst;
  inst.n_qubits = static_cast<int>(detail::integer(detail::field(j, "n_qubits", "$"), "$.n_qubits"));
  if (inst.n_qubits < 0) throw FormatError("$.n_qubits", "must be >= 0");
  const auto &projs = detail::field(j, "projectors", "$");
  if (!projs.is_array()) throw FormatError("$.projectors", "expected an array");
  int max_locality = 0;
  for (std::size_t i = 0; i < projs.size(); ++i) {
    const std::string where = "$.projectors[" + std::to_string(i) + "]";
    Projector p;
    const auto &qs = detail::field(projs[i], "qubits", where);
    if (!qs.is_array()) throw FormatError(where + ".qubits", "expected an array");
    for (std::size_t a = 0; a < qs.size(); ++a)
      p.qubits.push_back(static_cast<int>(detail::integer(qs[a], where + ".qubits[" + std::to_string(a) + "]")));
    const auto &vecs = detail::field(projs[i], "vectors", where);
    if (!vecs.is_array() || vecs.empty()) throw FormatError(where + ".vectors", "expected a non-empty array");
    const auto len = p.qubits.size() < 31 ? std::size_t{1} << p.qubits.size() : 0;
    p.vectors.resize(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(vecs.size()));
    for (std::size_t t = 0; t < vecs.size(); ++t) {
      const std::string vw = where + ".vectors[" + std::to_string(t) + "]";
      if (!vecs[t].is_array() || vecs[t].size() != len)
        throw FormatError(vw, "expected " + std::to_string(len) + " complex entries");
      for (std::size_t a = 0; a < len; ++a) {
        const auto &z = vecs[t][a];
        const std::string zw = vw + "[" + std::to_string(a) + "]";
        if (!z.is_array() || z.size() != 2) throw FormatError(zw, "expected [re, im]");
        p.vectors(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) =
            Complex(detail::number(z[0], zw + "[0]"), detail::number(z[1], zw + "[1]"));
      }
    }
    max_locality = std::max(max_locality, p.locality());
    try {
      validate(p, inst.n_qubits, tol);
    } catch (const Error &e) {
      throw FormatError(where, e.what());
    }
    inst.projectors.push_back(std::move(p));
  }
  if (const auto it = j.find("k"); it != j.end())
    inst.k = static_cast<int>(detail::integer(*it, "$.k"));
  else
    inst.k = max_locality;
  try {
    validate(inst, tol);
  } catch (const Error &e) {
    throw FormatError("$", e.what());
  }
  return inst;
}

inline json rational_json(const Rational &r) { return {{"exact", to_string(r)}, {"value", to_double(r)}}; }

inline json to_json(const Certificate &c) {
  json j{{"kind", to_string(c.kind)}, {"verdict", to_string(c.verdict)}, {"reason", c.reason}};
  json params{{"k", c.k}, {"r_max", c.r_max}, {"threshold", c.threshold}, {"dependency_degree", c.dependency_degree}};
  j["parameters"] = params;
  json w{{"load", c.witness_load}};
  if (c.witness) w["index"] = *c.witness;
  j["witness"] = w;
  if (c.bound_exact) j["bound"] = {{"exact", to_string(*c.bound_exact)}, {"value", *c.bound}};
  else if (c.bound) j["bound"] = {{"value", *c.bound}};
  if (!c.y.empty()) {
    json y = json::array();
    for (const auto &v : c.y) y.push_back(to_string(v));
    j["y"] = std::move(y);
  }
  return j;
}

inline json to_json(const Partition &p) {
  return {{"cutoff", p.cutoff},         {"v_h", p.v_h},
          {"h_edges", p.h_edges},       {"l_edges", p.l_edges},
          {"vertex_layers", p.vertex_layers}, {"edge_layers", p.edge_layers}};
}

inline json to_json(const HallResult &h) {
  json j{{"kind", "matching"}, {"verdict", h.complete ? "pass" : "fail"}};
  if (h.complete) {
    j["matching"] = h.matching;
  } else {
    j["witness"] = {{"edges", h.violator}, {"vertices", h.violator_vertices}};
    j["reason"] = "Hall violator: " + std::to_string(h.violator.size()) + " edges on " +
                  std::to_string(h.violator_vertices.size()) + " vertices";
  }
  return j;
}

inline json to_json(const HybridCertificate &c) {
  json j{{"kind", "hybrid"},
         {"verdict", to_string(c.verdict)},
         {"reason", c.reason},
         {"k", c.k},
         {"partition", to_json(c.partition)},
         {"sizes", {{"v_h", c.partition.v_h.size()}, {"h", c.partition.h_edges.size()}, {"l", c.partition.l_edges.size()}}},
         {"matching_ok", c.matching_ok},
         {"l_degree_ok", c.l_degree_ok},
         {"single_vh_qubit_ok", c.single_vh_qubit_ok},
         {"l_degree_threshold", c.l_degree_threshold},
         {"max_l_degree", c.max_l_degree}};
  if (c.matching) j["matching"] = *c.matching;
  if (!c.matching_ok) j["hall_violator"] = {{"edges", c.hall_violator}, {"vertices", c.hall_violator_vertices}};
  if (c.l_degree_witness) j["l_degree_witness"] = *c.l_degree_witness;
  return j;
}

inline json to_json(const RegionReport &r) {
  return {{"n", r.n},
          {"k", r.k},
          {"alpha_as_alpha_prime", r.alpha},
          {"cutoff", r.cutoff},
          {"gamma", r.gamma},
          {"epsilon0", r.epsilon0},
          {"vh_fraction", r.vh_fraction},
          {"vh_within_2eps0", r.vh_within_2eps0},
          {"regime_ok", r.regime_ok},
          {"layer_fraction", r.layer_fraction},
          {"layer_epsilon", r.layer_epsilon}};
}

inline json to_json(const StateVector &s) {
  json amps = json::array();
  for (Eigen::Index i = 0; i < s.amplitudes.size(); ++i) amps.push_back({s.amplitudes(i).real(), s.amplitudes(i).imag()});
  return {{"version", kInstanceFormatVersion}, {"n_qubits", s.n_qubits}, {"amplitudes", std::move(amps)}};
}

inline StateVector state_from_json(const json &j) {
  StateVector s;
  s.n_qubits = static_cast<int>(detail::integer(detail::field(j, "n_qubits", "$"), "$.n_qubits"));
  const auto &a = detail::field(j, "amplitudes", "$");
  if (s.n_qubits < 0 || s.n_qubits > 30 || !a.is_array() || a.size() != (std::size_t{1} << s.n_qubits))
    throw FormatError("$.amplitudes", "expected 2^n_qubits entries");
  s.amplitudes.resize(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string w = "$.amplitudes[" + std::to_string(i) + "]";
    if (!a[i].is_array() || a[i].size() != 2) throw FormatError(w, "expected [re, im]");
    s.amplitudes(static_cast<Eigen::Index>(i)) = Complex(detail::number(a[i][0], w), detail::number(a[i][1], w));
  }
  return s;
}

}  // namespace qlll::io

#endif  // QLLL_IO_HPP
