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

#ifndef SERCON_SERIALIZE_HPP_
#define SERCON_SERIALIZE_HPP_

#include <string>
#include <vector>

#include "json.hpp"
#include "sercon/graph.hpp"
#include "sercon/robustness.hpp"
#include "sercon/simulation.hpp"
#include "sercon/spectral.hpp"
#include "sercon/synthesis.hpp"

namespace sercon {

using Json = nlohmann::ordered_json;

// Shortest "%.17g" rendering; inf and nan print as "inf", "-inf", "nan".
std::string format_number(double value);

Json matrix_to_json(const Matrix& m);  // nested row-major arrays
Matrix matrix_from_json(const Json& j);

// {"n": N, "edges": [[from, to, weight], ...]}, 0-based node ids.
Json graph_to_json(const DirectedWeightedGraph& graph);
DirectedWeightedGraph graph_from_json(const Json& j);

// {"n": order, "laplacians": [...], "coefficients": [A_0 .. A_{n-1}]}.
Json design_to_json(const SerialDesign& design);
SerialDesign design_from_json(const Json& j);

Json verdict_to_json(const ClassVerdict& verdict);
Json locality_to_json(const LocalityReport& report);
Json spectrum_to_json(const SpectrumReport& report);
Json consensus_to_json(const ConsensusVerdict& verdict);
Json margin_to_json(const MarginReport& report);
Json sweep_to_json(const SweepResult& result, bool full_spectra);

// CSV writers; every file starts with its column header.
std::string sweep_csv(const SweepResult& result);  // N,max_re_excl_zeros,stable
std::string trace_csv(const SimulationTrace& trace, std::size_t stride = 1);
std::string spreads_csv(const SimulationTrace& trace, std::size_t stride = 1);
std::string robustness_csv(const std::vector<RobustnessSample>& samples);

}  // namespace sercon

#endif  // SERCON_SERIALIZE_HPP_
