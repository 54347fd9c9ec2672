/*
Copyright 2026 The sercon Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "sercon/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace sercon {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  // Prefer the shortest precision that round-trips.
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

namespace {

Json number(double value) {
  if (std::isfinite(value)) return value;
  return format_number(value);
}

Json complex_list(const ComplexVector& values) {
  Json out = Json::array();
  for (const Complex& v : values) out.push_back(Json::array({v.real(), v.imag()}));
  return out;
}

const char* violation_name(ClassViolation v) {
  switch (v) {
    case ClassViolation::kNone: return "none";
    case ClassViolation::kSparsity: return "sparsity";
    case ClassViolation::kRowSum: return "row_sum";
    case ClassViolation::kGain: return "gain";
  }
  return "unknown";
}

Json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : Json(nullptr);
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  require(j.is_array(), "matrix must be an array of rows");
  const Eigen::Index rows = Eigen::Index(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : Eigen::Index(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[std::size_t(i)];
    require(row.is_array() && Eigen::Index(row.size()) == cols,
            "matrix rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      require(row[std::size_t(c)].is_number(), "matrix entries must be numbers");
      m(i, c) = row[std::size_t(c)].get<double>();
    }
  }
  return m;
}

Json graph_to_json(const DirectedWeightedGraph& graph) {
  Json edges = Json::array();
  for (const Edge& e : graph.edges()) edges.push_back(Json::array({e.from, e.to, e.weight}));
  return Json{{"n", graph.size()}, {"edges", edges}};
}

DirectedWeightedGraph graph_from_json(const Json& j) {
  require(j.is_object() && j.contains("n") && j["n"].is_number_integer(),
          "graph JSON needs an integer 'n'");
  const int n = j["n"].get<int>();
  require(n >= 1, "graph must have at least one node");
  std::vector<Edge> edges;
  if (j.contains("edges")) {
    require(j["edges"].is_array(), "'edges' must be an array");
    for (const Json& e : j["edges"]) {
      require(e.is_array() && (e.size() == 2 || e.size() == 3),
              "each edge is [from, to] or [from, to, weight]");
      require(e[0].is_number_integer() && e[1].is_number_integer(),
              "edge endpoints must be integers");
      Edge edge{e[0].get<int>(), e[1].get<int>(), 1.0};
      if (e.size() == 3) {
        require(e[2].is_number(), "edge weight must be a number");
        edge.weight = e[2].get<double>();
      }
      edges.push_back(edge);
    }
  }
  return DirectedWeightedGraph::from_edges(n, edges);
}

Json design_to_json(const SerialDesign& design) {
  Json ls = Json::array(), cs = Json::array();
  for (const Matrix& l : design.laplacians()) ls.push_back(matrix_to_json(l));
  for (const Matrix& c : design.coefficients()) cs.push_back(matrix_to_json(c));
  return Json{{"n", design.order()}, {"laplacians", ls}, {"coefficients", cs}};
}

SerialDesign design_from_json(const Json& j) {
  require(j.is_object() && j.contains("laplacians") && j["laplacians"].is_array(),
          "design JSON needs a 'laplacians' array");
  std::vector<Matrix> ls;
  for (const Json& l : j["laplacians"]) ls.push_back(matrix_from_json(l));
  if (j.contains("n")) {
    require(j["n"].is_number_integer() && j["n"].get<std::size_t>() == ls.size(),
            "'n' must equal the number of Laplacians");
  }
  // Coefficients are always recomputed from the factors.
  return expand_serial(std::move(ls));
}

Json verdict_to_json(const ClassVerdict& v) {
  Json out{{"member", v.member}, {"violation", violation_name(v.violation)},
           {"norm", number(v.norm)}};
  if (!v.member) {
    out["row"] = v.row;
    out["col"] = v.col;
    out["value"] = number(v.value);
    out["detail"] = v.describe();
  }
  return out;
}

Json locality_to_json(const LocalityReport& r) {
  Json ls = Json::array(), cs = Json::array(), ts = Json::array();
  for (const auto& v : r.laplacian_verdicts) ls.push_back(verdict_to_json(v));
  for (const auto& v : r.coefficient_verdicts) cs.push_back(verdict_to_json(v));
  for (const auto& v : r.tight_verdicts) ts.push_back(verdict_to_json(v));
  return Json{{"c", number(r.c)},
              {"c_prime", number(r.c_prime)},
              {"hops", r.hops},
              {"max_coefficient_norm", number(r.max_coefficient_norm)},
              {"preconditions_hold", r.preconditions_hold()},
              {"all_pass", r.all_pass()},
              {"laplacians", ls},
              {"coefficients", cs},
              {"tight", ts}};
}

Json spectrum_to_json(const SpectrumReport& r) {
  return Json{{"stable", r.stable},
              {"expected_zeros", r.expected_zeros},
              {"structural_zeros", r.structural_zeros},
              {"max_re_excl_zeros", number(r.max_real_part_excluding_zeros)},
              {"zero_tolerance", number(r.zero_tolerance)},
              {"deflated", r.deflated},
              {"eigenvalues", complex_list(r.eigenvalues)}};
}

Json consensus_to_json(const ConsensusVerdict& v) {
  Json settling = Json::array();
  for (const auto& t : v.settling_times) settling.push_back(optional_number(t));
  return Json{{"consensus", v.consensus},
              {"settling_times", settling},
              {"divergence_time", optional_number(v.divergence_time)}};
}

Json margin_to_json(const MarginReport& r) {
  Json norms = Json::array(), weights = Json::array();
  for (double v : r.norms) norms.push_back(number(v));
  for (double v : r.weights) weights.push_back(number(v));
  return Json{{"mode", mode_name(r.mode)},
              {"n", r.order},
              {"norms", norms},
              {"weights", weights},
              {"total", number(r.total)},
              {"satisfied", r.satisfied},
              {"requires_symmetric", r.requires_symmetric},
              {"note", r.note}};
}

Json sweep_to_json(const SweepResult& result, bool full_spectra) {
  Json rows = Json::array();
  for (const SweepRow& row : result.rows) {
    Json r{{"N", row.agents},
           {"max_re_excl_zeros", number(row.max_real_part)},
           {"stable", row.stable},
           {"structural_zeros", row.structural_zeros}};
    if (!row.error.empty()) r["error"] = row.error;
    if (full_spectra) r["eigenvalues"] = complex_list(row.eigenvalues);
    rows.push_back(std::move(r));
  }
  return Json{{"family", result.family},
              {"design", result.design},
              {"critical_N", result.critical_agents ? Json(*result.critical_agents)
                                                    : Json(nullptr)},
              {"rows", rows}};
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "N,max_re_excl_zeros,stable\n";
  for (const SweepRow& row : result.rows) {
    out << row.agents << ',' << format_number(row.max_real_part) << ','
        << (row.stable ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string trace_csv(const SimulationTrace& trace, std::size_t stride) {
  require(stride >= 1, "stride must be positive");
  std::ostringstream out;
  out << "t,agent,k,value\n";
  for (std::size_t s = 0; s < trace.samples(); s += stride) {
    const std::string t = format_number(trace.times[s]);
    for (int i = 0; i < trace.agents; ++i) {
      for (int k = 0; k < trace.order; ++k) {
        out << t << ',' << i << ',' << k << ','
            << format_number(trace.derivatives[k](i, Eigen::Index(s))) << '\n';
      }
    }
  }
  return out.str();
}

std::string spreads_csv(const SimulationTrace& trace, std::size_t stride) {
  require(stride >= 1, "stride must be positive");
  std::ostringstream out;
  out << "t,k,spread\n";
  for (std::size_t s = 0; s < trace.samples(); s += stride) {
    const std::string t = format_number(trace.times[s]);
    for (int k = 0; k < trace.order; ++k) {
      out << t << ',' << k << ',' << format_number(trace.spreads(k, Eigen::Index(s)))
          << '\n';
    }
  }
  return out.str();
}

std::string robustness_csv(const std::vector<RobustnessSample>& samples) {
  std::ostringstream out;
  out << "sample_id,total_margin,stable,min_settling_time\n";
  for (const RobustnessSample& s : samples) {
    out << s.id << ',' << format_number(s.total_margin) << ','
        << (s.stable ? "true" : "false") << ','
        << (s.min_settling_time ? format_number(*s.min_settling_time) : "") << '\n';
  }
  return out.str();
}

}  // namespace sercon
