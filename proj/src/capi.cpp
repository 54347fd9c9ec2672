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

#include "sercon/sercon.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "sercon/graph.hpp"
#include "sercon/robustness.hpp"
#include "sercon/serialize.hpp"
#include "sercon/simulation.hpp"
#include "sercon/spectral.hpp"
#include "sercon/synthesis.hpp"

struct sercon_graph {
  sercon::DirectedWeightedGraph graph;
};

struct sercon_design {
  std::variant<sercon::SerialDesign, sercon::ConventionalDesign> design;
  sercon::LtiSystem system;
};

struct sercon_trace {
  sercon::SimulationTrace trace;
};

namespace {

thread_local std::string last_error;

sercon_status status_of(sercon::ErrorKind kind) {
  switch (kind) {
    case sercon::ErrorKind::kInvalidArgument: return SERCON_ERROR_CONFIG;
    case sercon::ErrorKind::kPrecondition: return SERCON_ERROR_PRECONDITION;
    case sercon::ErrorKind::kNumerical: return SERCON_ERROR_NUMERICAL;
  }
  return SERCON_ERROR_INTERNAL;
}

template <typename F>
sercon_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SERCON_OK;
  } catch (const sercon::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("malformed JSON: ") + e.what();
    return SERCON_ERROR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SERCON_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SERCON_ERROR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return SERCON_ERROR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) sercon::fail(sercon::ErrorKind::kInvalidArgument, std::string(what) + " is null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  if (out != nullptr) *out = copy_string(s);
}

const sercon::SerialDesign& serial_of(const sercon_design* d) {
  need(d, "design");
  const auto* serial = std::get_if<sercon::SerialDesign>(&d->design);
  if (serial == nullptr) {
    sercon::fail(sercon::ErrorKind::kInvalidArgument, "operation needs a serial design");
  }
  return *serial;
}

std::vector<double> read_gains(int order, const double* gains) {
  sercon::require(order >= 1 && order <= sercon::kMaxSerialOrder, "order must be in [1, 8]");
  need(gains, "gains");
  return std::vector<double>(gains, gains + order);
}

}  // namespace

extern "C" {

SERCON_API const char* sercon_last_error(void) { return last_error.c_str(); }

SERCON_API const char* sercon_version(void) { return "1.0.0"; }

SERCON_API void sercon_string_free(char* text) { std::free(text); }

SERCON_API sercon_status sercon_graph_family(const char* family, int nodes,
                                             sercon_graph** out) {
  return guarded([&] {
    need(family, "family");
    need(out, "out");
    *out = new sercon_graph{
        sercon::make_family(sercon::parse_family_kind(family), nodes)};
  });
}

SERCON_API sercon_status sercon_graph_from_json(const char* json, sercon_graph** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = new sercon_graph{sercon::graph_from_json(sercon::Json::parse(json))};
  });
}

SERCON_API sercon_status sercon_graph_from_weights(int n, const double* weights,
                                                   sercon_graph** out) {
  return guarded([&] {
    sercon::require(n >= 1, "graph needs at least one node");
    need(weights, "weights");
    need(out, "out");
    sercon::Matrix w(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) w(i, j) = weights[i * n + j];
    }
    *out = new sercon_graph{sercon::DirectedWeightedGraph(std::move(w))};
  });
}

SERCON_API void sercon_graph_free(sercon_graph* graph) { delete graph; }

SERCON_API int sercon_graph_size(const sercon_graph* graph) {
  return graph == nullptr ? 0 : graph->graph.size();
}

SERCON_API sercon_status sercon_graph_to_json(const sercon_graph* graph, char** json) {
  return guarded([&] {
    need(graph, "graph");
    emit(json, sercon::graph_to_json(graph->graph).dump());
  });
}

SERCON_API sercon_status sercon_graph_laplacian(const sercon_graph* graph, double* out) {
  return guarded([&] {
    need(graph, "graph");
    need(out, "out");
    const sercon::Matrix l = sercon::laplacian_of(graph->graph).matrix;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.cols(); ++j) out[i * l.cols() + j] = l(i, j);
    }
  });
}

SERCON_API sercon_status sercon_graph_has_spanning_tree(const sercon_graph* graph,
                                                        int* result) {
  return guarded([&] {
    need(graph, "graph");
    need(result, "result");
    *result = sercon::has_connected_spanning_tree(graph->graph) ? 1 : 0;
  });
}

SERCON_API sercon_status sercon_design_create(const sercon_graph* graph,
                                              sercon_design_kind kind, int order,
                                              const double* gains,
                                              sercon_design** out) {
  return guarded([&] {
    need(graph, "graph");
    need(out, "out");
    const std::vector<double> g = read_gains(order, gains);
    const sercon::Matrix l = sercon::laplacian_of(graph->graph).matrix;
    if (kind == SERCON_DESIGN_SERIAL) {
      sercon::SerialDesign d = sercon::serial_from_scalars(l, g);
      sercon::LtiSystem sys = sercon::realize_serial(d, true);
      *out = new sercon_design{std::move(d), std::move(sys)};
    } else if (kind == SERCON_DESIGN_CONVENTIONAL) {
      sercon::ConventionalDesign d = sercon::conventional_from_scalars(l, g);
      sercon::LtiSystem sys = sercon::realize_conventional(d);
      *out = new sercon_design{std::move(d), std::move(sys)};
    } else {
      sercon::fail(sercon::ErrorKind::kInvalidArgument, "unknown design kind");
    }
  });
}

SERCON_API sercon_status sercon_design_from_json(const char* json, sercon_design** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    sercon::SerialDesign d = sercon::design_from_json(sercon::Json::parse(json));
    sercon::LtiSystem sys = sercon::realize_serial(d, true);
    *out = new sercon_design{std::move(d), std::move(sys)};
  });
}

SERCON_API void sercon_design_free(sercon_design* design) { delete design; }

SERCON_API int sercon_design_order(const sercon_design* design) {
  return design == nullptr ? 0 : design->system.order;
}

SERCON_API int sercon_design_agents(const sercon_design* design) {
  return design == nullptr ? 0 : design->system.agents;
}

SERCON_API int sercon_design_state_dim(const sercon_design* design) {
  return design == nullptr ? 0 : static_cast<int>(design->system.state_dim());
}

SERCON_API sercon_status sercon_design_to_json(const sercon_design* design, char** json) {
  return guarded([&] {
    need(design, "design");
    if (const auto* s = std::get_if<sercon::SerialDesign>(&design->design)) {
      emit(json, sercon::design_to_json(*s).dump());
      return;
    }
    const auto& c = std::get<sercon::ConventionalDesign>(design->design);
    sercon::Json gains = sercon::Json::array();
    for (const sercon::Matrix& g : c.gains) gains.push_back(sercon::matrix_to_json(g));
    emit(json, sercon::Json{{"kind", "conventional"}, {"n", c.order()}, {"gains", gains}}
                   .dump());
  });
}

SERCON_API sercon_status sercon_design_locality(const sercon_design* design,
                                                const sercon_graph* graph, double c,
                                                char** json, int* all_pass) {
  return guarded([&] {
    const sercon::SerialDesign& d = serial_of(design);
    need(graph, "graph");
    const sercon::LocalityReport report =
        sercon::check_locality(d, graph->graph.weights(), c);
    if (all_pass != nullptr) *all_pass = report.all_pass() ? 1 : 0;
    emit(json, sercon::locality_to_json(report).dump());
  });
}

SERCON_API sercon_status sercon_design_spectrum(const sercon_design* design, char** json,
                                                int* stable, double* max_real_part) {
  return guarded([&] {
    need(design, "design");
    const sercon::SpectrumReport report = sercon::spectrum(design->system);
    if (stable != nullptr) *stable = report.stable ? 1 : 0;
    if (max_real_part != nullptr) *max_real_part = report.max_real_part_excluding_zeros;
    emit(json, sercon::spectrum_to_json(report).dump());
  });
}

SERCON_API sercon_status sercon_design_pole_union(const sercon_design* design,
                                                  double tolerance, int* match,
                                                  double* max_distance) {
  return guarded([&] {
    const sercon::PoleUnionCheck check =
        sercon::verify_pole_union(serial_of(design), tolerance);
    if (match != nullptr) *match = check.match ? 1 : 0;
    if (max_distance != nullptr) *max_distance = check.max_distance;
  });
}

SERCON_API sercon_status sercon_sweep(const char* family, sercon_design_kind kind,
                                      int order, const double* gains, int n_min,
                                      int n_max, int jobs, int full_spectra, char** csv,
                                      char** json, int* critical_n) {
  return guarded([&] {
    need(family, "family");
    sercon::DesignRule rule;
    rule.gains = read_gains(order, gains);
    if (kind == SERCON_DESIGN_SERIAL) {
      rule.kind = sercon::DesignRule::Kind::kSerial;
    } else if (kind == SERCON_DESIGN_CONVENTIONAL) {
      rule.kind = sercon::DesignRule::Kind::kConventional;
    } else {
      sercon::fail(sercon::ErrorKind::kInvalidArgument, "unknown design kind");
    }
    const sercon::GraphFamily fam(sercon::parse_family_kind(family));
    const sercon::SweepResult result =
        sercon::stability_sweep(fam, rule, n_min, n_max, jobs);
    if (critical_n != nullptr) *critical_n = result.critical_agents.value_or(-1);
    emit(csv, sercon::sweep_csv(result));
    emit(json, sercon::sweep_to_json(result, full_spectra != 0).dump(2));
  });
}

SERCON_API void sercon_simulation_options_default(sercon_simulation_options* options) {
  if (options == nullptr) return;
  *options = sercon_simulation_options{};
  options->reference = SERCON_REFERENCE_ZERO;
  options->horizon = 50.0;
  options->dt = 0.01;
  options->epsilon = 1e-6;
  options->window = 0.0;
  options->seed = 1;
  options->spread = 1.0;
  options->leader = 0;
  options->acceleration = 1.0;
  options->impulse_scale = 1.0;
}

SERCON_API sercon_status sercon_simulate(const sercon_design* design,
                                         const sercon_simulation_options* options,
                                         const double* x0, sercon_trace** out) {
  return guarded([&] {
    need(design, "design");
    need(options, "options");
    need(out, "out");
    const sercon::LtiSystem& sys = design->system;
    const int agents = sys.agents;
    sercon::require(options->leader >= 0 && options->leader < agents,
                    "leader index out of range");

    sercon::Vector state;
    if (x0 != nullptr) {
      state = Eigen::Map<const sercon::Vector>(x0, sys.state_dim());
    } else {
      std::mt19937_64 rng(options->seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::vector<sercon::Vector> derivatives(
          sys.order, sercon::Vector::Zero(agents));
      for (int i = 0; i < agents; ++i) derivatives[0](i) = options->spread * gauss(rng);
      state = sercon::state_from_derivatives(sys, derivatives);
    }

    sercon::ReferenceSignal reference = sercon::ReferenceSignal::zero();
    switch (options->reference) {
      case SERCON_REFERENCE_ZERO:
        break;
      case SERCON_REFERENCE_IMPULSE: {
        sercon::Vector v = sercon::Vector::Zero(agents);
        v(options->leader) = options->impulse_scale;
        reference = sercon::ReferenceSignal::impulse(std::move(v));
        break;
      }
      case SERCON_REFERENCE_LEADER_ACCELERATION:
        reference = sercon::ReferenceSignal::leader_constant_acceleration(
            options->leader, options->acceleration);
        break;
      default:
        sercon::fail(sercon::ErrorKind::kInvalidArgument, "unknown reference kind");
    }
    *out = new sercon_trace{
        sercon::simulate(sys, state, reference, options->horizon, options->dt)};
  });
}

SERCON_API void sercon_trace_free(sercon_trace* trace) { delete trace; }

SERCON_API size_t sercon_trace_samples(const sercon_trace* trace) {
  return trace == nullptr ? 0 : trace->trace.samples();
}

SERCON_API sercon_status sercon_trace_csv(const sercon_trace* trace, size_t stride,
                                          char** trace_csv, char** spreads_csv) {
  return guarded([&] {
    need(trace, "trace");
    if (trace_csv != nullptr) emit(trace_csv, sercon::trace_csv(trace->trace, stride));
    if (spreads_csv != nullptr) emit(spreads_csv, sercon::spreads_csv(trace->trace, stride));
  });
}

SERCON_API sercon_status sercon_trace_verdict(const sercon_trace* trace, double epsilon,
                                              double window, char** json,
                                              int* consensus) {
  return guarded([&] {
    need(trace, "trace");
    const double eps = epsilon > 0.0 ? epsilon : sercon::kDefaultConsensusEpsilon;
    const std::optional<double> win =
        window > 0.0 ? std::optional<double>(window) : std::nullopt;
    const sercon::ConsensusVerdict verdict = sercon::consensus_verdict(trace->trace, eps, win);
    if (consensus != nullptr) *consensus = verdict.consensus ? 1 : 0;
    emit(json, sercon::consensus_to_json(verdict).dump(2));
  });
}

SERCON_API sercon_status sercon_trace_final_derivatives(const sercon_trace* trace,
                                                        double* out, size_t capacity,
                                                        size_t* written) {
  return guarded([&] {
    need(trace, "trace");
    const sercon::SimulationTrace& t = trace->trace;
    const size_t total = size_t(t.order) * size_t(t.agents);
    if (written != nullptr) *written = 0;
    sercon::require(t.samples() > 0, "trace is empty");
    sercon::require(out != nullptr && capacity >= total, "output buffer too small");
    const Eigen::Index last = Eigen::Index(t.samples() - 1);
    for (int k = 0; k < t.order; ++k) {
      for (int i = 0; i < t.agents; ++i) out[k * t.agents + i] = t.derivatives[k](i, last);
    }
    if (written != nullptr) *written = total;
  });
}

SERCON_API sercon_status sercon_analytic_factor(int n, int k, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = sercon::analytic_factor(n, k);
  });
}

SERCON_API sercon_status sercon_gain_bound(int n, double c, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = sercon::gain_bound(n, c);
  });
}

SERCON_API sercon_status sercon_hinf_scalar(const double* numerator, int num_len,
                                            const double* denominator, int den_len,
                                            double* out) {
  return guarded([&] {
    need(out, "out");
    sercon::require(num_len >= 0 && den_len >= 1, "invalid coefficient counts");
    sercon::require(num_len == 0 || numerator != nullptr, "numerator is null");
    need(denominator, "denominator");
    *out = sercon::hinf_norm_scalar(std::vector<double>(numerator, numerator + num_len),
                                    std::vector<double>(denominator, denominator + den_len));
  });
}

namespace {

sercon_status margin_common(bool additive, int n, const double* norms, char** json,
                            int* satisfied, double* total) {
  return guarded([&] {
    sercon::require(n >= 1, "order must be at least 1");
    need(norms, "norms");
    const std::vector<double> values(norms, norms + n + 1);
    const sercon::MarginReport report = additive
                                            ? sercon::additive_margin(n, values)
                                            : sercon::multiplicative_margin(values);
    if (satisfied != nullptr) *satisfied = report.satisfied ? 1 : 0;
    if (total != nullptr) *total = report.total;
    emit(json, sercon::margin_to_json(report).dump(2));
  });
}

}  // namespace

SERCON_API sercon_status sercon_additive_margin(int n, const double* norms, char** json,
                                                int* satisfied, double* total) {
  return margin_common(true, n, norms, json, satisfied, total);
}

SERCON_API sercon_status sercon_multiplicative_margin(int n, const double* norms,
                                                      char** json, int* satisfied,
                                                      double* total) {
  return margin_common(false, n, norms, json, satisfied, total);
}

SERCON_API sercon_status sercon_margin_assemble_static(const sercon_graph* graph,
                                                       const char* mode, int n,
                                                       const double* norms,
                                                       char** json, int* stable) {
  return guarded([&] {
    need(graph, "graph");
    need(mode, "mode");
    need(norms, "norms");
    sercon::require(n >= 1 && n <= sercon::kMaxSerialOrder, "order must be in [1, 8]");
    const sercon::PerturbationMode m = sercon::parse_mode(mode);
    const sercon::Matrix l = sercon::laplacian_of(graph->graph).matrix;
    const sercon::Matrix eye = sercon::Matrix::Identity(l.rows(), l.cols());
    std::vector<sercon::PerturbationBlock> blocks;
    for (int k = 0; k <= n; ++k) blocks.push_back(sercon::static_block(norms[k] * eye, k, m));
    const sercon::LtiSystem sys =
        m == sercon::PerturbationMode::kAdditive
            ? sercon::assemble_perturbed_additive(
                  sercon::serial_from_scalars(l, std::vector<double>(n, 1.0)), blocks)
            : sercon::assemble_perturbed_multiplicative(std::vector<sercon::Matrix>(n, l),
                                                        blocks);
    const sercon::SpectrumReport report = sercon::spectrum(sys);
    if (stable != nullptr) *stable = report.stable ? 1 : 0;
    emit(json, sercon::spectrum_to_json(report).dump(2));
  });
}

SERCON_API sercon_status sercon_lag_bank_experiment(const sercon_graph* graph,
                                                    double kappa, uint64_t seed,
                                                    char** json, int* consensus) {
  return guarded([&] {
    need(graph, "graph");
    const sercon::LagBankExperiment e = sercon::lag_bank_experiment(
        sercon::laplacian_of(graph->graph).matrix, kappa, seed);
    if (consensus != nullptr) *consensus = e.verdict.consensus ? 1 : 0;
    sercon::Json gains = sercon::Json::array(), taus = sercon::Json::array();
    for (double g : e.gains) gains.push_back(g);
    for (double t : e.time_constants) taus.push_back(t);
    sercon::Json spectrum = sercon::spectrum_to_json(e.spectrum);
    spectrum.erase("eigenvalues");
    emit(json, sercon::Json{{"kappa", kappa},
                            {"gains", gains},
                            {"time_constants", taus},
                            {"margin", sercon::margin_to_json(e.margin)},
                            {"spectrum", spectrum},
                            {"horizon", e.horizon},
                            {"verdict", sercon::consensus_to_json(e.verdict)}}
                   .dump(2));
  });
}

SERCON_API sercon_status sercon_robustness_sweep(const sercon_graph* graph,
                                                 const char* mode, int order,
                                                 int samples, double target_total,
                                                 uint64_t seed, int jobs, char** csv,
                                                 int* stable_count,
                                                 int* consensus_count) {
  return guarded([&] {
    need(graph, "graph");
    need(mode, "mode");
    sercon::require(order >= 1 && order <= sercon::kMaxSerialOrder,
                    "order must be in [1, 8]");
    sercon::RobustnessSweepConfig config;
    config.laplacian = sercon::laplacian_of(graph->graph).matrix;
    config.scales.assign(order, 1.0);
    config.mode = sercon::parse_mode(mode);
    config.samples = samples;
    config.target_total = target_total;
    config.seed = seed;
    config.jobs = jobs;
    const auto results = sercon::robustness_sweep(config);
    int stable = 0, agreed = 0;
    for (const auto& r : results) {
      if (!r.error.empty()) sercon::fail(sercon::ErrorKind::kPrecondition, r.error);
      stable += r.stable ? 1 : 0;
      agreed += r.consensus ? 1 : 0;
    }
    if (stable_count != nullptr) *stable_count = stable;
    if (consensus_count != nullptr) *consensus_count = agreed;
    emit(csv, sercon::robustness_csv(results));
  });
}

}  // extern "C"
