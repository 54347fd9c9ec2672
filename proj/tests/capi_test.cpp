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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "json.hpp"
#include "sercon/sercon.h"

namespace {

using json = nlohmann::json;

std::string take(char* text) {
  std::string out = text == nullptr ? "" : text;
  sercon_string_free(text);
  return out;
}

TEST(CApiTest, GraphLifecycle) {
  sercon_graph* g = nullptr;
  ASSERT_EQ(sercon_graph_family("leader_chain", 4, &g), SERCON_OK);
  EXPECT_EQ(sercon_graph_size(g), 4);
  std::vector<double> l(16);
  ASSERT_EQ(sercon_graph_laplacian(g, l.data()), SERCON_OK);
  EXPECT_EQ(l[0], 0.0);         // the leader measures nobody
  EXPECT_EQ(l[1 * 4 + 1], 2.0);
  int tree = 0;
  ASSERT_EQ(sercon_graph_has_spanning_tree(g, &tree), SERCON_OK);
  EXPECT_EQ(tree, 1);
  char* text = nullptr;
  ASSERT_EQ(sercon_graph_to_json(g, &text), SERCON_OK);
  const std::string dumped = take(text);
  sercon_graph* again = nullptr;
  ASSERT_EQ(sercon_graph_from_json(dumped.c_str(), &again), SERCON_OK);
  EXPECT_EQ(sercon_graph_size(again), 4);
  sercon_graph_free(again);
  sercon_graph_free(g);
  sercon_graph_free(nullptr);
}

TEST(CApiTest, ErrorCodes) {
  sercon_graph* g = nullptr;
  EXPECT_EQ(sercon_graph_family("torus", 4, &g), SERCON_ERROR_CONFIG);
  EXPECT_NE(std::string(sercon_last_error()).find("torus"), std::string::npos);
  EXPECT_EQ(sercon_graph_from_json("{not json", &g), SERCON_ERROR_CONFIG);
  EXPECT_EQ(sercon_graph_family(nullptr, 4, &g), SERCON_ERROR_CONFIG);
  EXPECT_EQ(g, nullptr);

  ASSERT_EQ(sercon_graph_family("leader_chain", 4, &g), SERCON_OK);
  const double norms[] = {0.1, 0.1, 0.1};
  char* text = nullptr;
  int stable = 0;
  EXPECT_EQ(sercon_margin_assemble_static(g, "additive", 2, norms, &text, &stable),
            SERCON_ERROR_PRECONDITION);
  EXPECT_EQ(text, nullptr);
  sercon_graph_free(g);

  double value = 0.0;
  EXPECT_EQ(sercon_analytic_factor(2, 5, &value), SERCON_ERROR_CONFIG);
  ASSERT_EQ(sercon_analytic_factor(2, 1, &value), SERCON_OK);
  EXPECT_DOUBLE_EQ(value, 0.5);
  EXPECT_STREQ(sercon_last_error(), "");
  ASSERT_EQ(sercon_gain_bound(3, 2.0, &value), SERCON_OK);
  EXPECT_DOUBLE_EQ(value, 24.0);
  const double unstable[] = {-1.0, 1.0};
  const double one[] = {1.0};
  EXPECT_EQ(sercon_hinf_scalar(one, 1, unstable, 2, &value), SERCON_ERROR_PRECONDITION);
}

TEST(CApiTest, DesignSpectrumAndLocality) {
  sercon_graph* g = nullptr;
  ASSERT_EQ(sercon_graph_family("leader_chain", 12, &g), SERCON_OK);
  const double gains[] = {2.0, 4.0, 6.0};
  sercon_design* serial = nullptr;
  ASSERT_EQ(sercon_design_create(g, SERCON_DESIGN_SERIAL, 3, gains, &serial), SERCON_OK);
  EXPECT_EQ(sercon_design_order(serial), 3);
  EXPECT_EQ(sercon_design_agents(serial), 12);
  EXPECT_EQ(sercon_design_state_dim(serial), 36);

  char* text = nullptr;
  int pass = 0;
  ASSERT_EQ(sercon_design_locality(serial, g, 0.0, &text, &pass), SERCON_OK);
  EXPECT_EQ(pass, 1);
  EXPECT_DOUBLE_EQ(json::parse(take(text))["c_prime"].get<double>(), 3.0 * 24.0 * 24.0 * 24.0);

  int stable = 0;
  double max_re = 0.0;
  ASSERT_EQ(sercon_design_spectrum(serial, &text, &stable, &max_re), SERCON_OK);
  EXPECT_EQ(stable, 1);
  EXPECT_LT(max_re, 0.0);
  EXPECT_EQ(json::parse(take(text))["eigenvalues"].size(), 36u);

  int match = 0;
  double distance = 1.0;
  ASSERT_EQ(sercon_design_pole_union(serial, 1e-7, &match, &distance), SERCON_OK);
  EXPECT_EQ(match, 1);

  ASSERT_EQ(sercon_design_to_json(serial, &text), SERCON_OK);
  const std::string design_json = take(text);
  sercon_design* copy = nullptr;
  ASSERT_EQ(sercon_design_from_json(design_json.c_str(), &copy), SERCON_OK);
  EXPECT_EQ(sercon_design_order(copy), 3);
  sercon_design_free(copy);

  sercon_design* conventional = nullptr;
  ASSERT_EQ(sercon_design_create(g, SERCON_DESIGN_CONVENTIONAL, 3, gains, &conventional),
            SERCON_OK);
  ASSERT_EQ(sercon_design_spectrum(conventional, nullptr, &stable, &max_re), SERCON_OK);
  EXPECT_EQ(stable, 0);
  EXPECT_EQ(sercon_design_locality(conventional, g, 0.0, &text, &pass), SERCON_ERROR_CONFIG);

  sercon_design_free(conventional);
  sercon_design_free(serial);
  sercon_graph_free(g);
}

TEST(CApiTest, SweepReportsCriticalSize) {
  const double gains[] = {2.0, 4.0, 6.0};
  char* csv = nullptr;
  char* js = nullptr;
  int critical = 0;
  ASSERT_EQ(sercon_sweep("leader_chain", SERCON_DESIGN_SERIAL, 3, gains, 3, 30, 2, 0, &csv, &js,
                         &critical),
            SERCON_OK);
  EXPECT_EQ(critical, -1);
  const std::string table = take(csv);
  EXPECT_EQ(table.rfind("N,max_re_excl_zeros,stable\n", 0), 0u);
  EXPECT_TRUE(json::parse(take(js))["critical_N"].is_null());
}

TEST(CApiTest, SimulationAndVerdict) {
  sercon_graph* g = nullptr;
  ASSERT_EQ(sercon_graph_family("path", 5, &g), SERCON_OK);
  const double gains[] = {1.0, 1.0};
  sercon_design* d = nullptr;
  ASSERT_EQ(sercon_design_create(g, SERCON_DESIGN_SERIAL, 2, gains, &d), SERCON_OK);
  sercon_simulation_options opts;
  sercon_simulation_options_default(&opts);
  opts.horizon = 150.0;
  opts.dt = 0.1;
  sercon_trace* t = nullptr;
  ASSERT_EQ(sercon_simulate(d, &opts, nullptr, &t), SERCON_OK);
  EXPECT_EQ(sercon_trace_samples(t), 1501u);
  char* verdict = nullptr;
  int consensus = 0;
  ASSERT_EQ(sercon_trace_verdict(t, 0.0, 0.0, &verdict, &consensus), SERCON_OK);
  EXPECT_EQ(consensus, 1);
  EXPECT_TRUE(json::parse(take(verdict))["consensus"].get<bool>());
  char* trace_csv = nullptr;
  char* spreads_csv = nullptr;
  ASSERT_EQ(sercon_trace_csv(t, 100, &trace_csv, &spreads_csv), SERCON_OK);
  EXPECT_EQ(take(trace_csv).rfind("t,agent,k,value\n", 0), 0u);
  EXPECT_EQ(take(spreads_csv).rfind("t,k,spread\n", 0), 0u);
  std::vector<double> final_values(10);
  std::size_t written = 0;
  ASSERT_EQ(sercon_trace_final_derivatives(t, final_values.data(), 10, &written), SERCON_OK);
  EXPECT_EQ(written, 10u);
  EXPECT_EQ(sercon_trace_final_derivatives(t, final_values.data(), 3, &written),
            SERCON_ERROR_CONFIG);
  sercon_trace_free(t);

  opts.leader = 99;
  EXPECT_EQ(sercon_simulate(d, &opts, nullptr, &t), SERCON_ERROR_CONFIG);
  sercon_design_free(d);
  sercon_graph_free(g);
}

TEST(CApiTest, MarginsAndExperiments) {
  const double norms[] = {0.3, 0.5, 0.3};
  char* text = nullptr;
  int satisfied = 0;
  double total = 0.0;
  ASSERT_EQ(sercon_additive_margin(2, norms, &text, &satisfied, &total), SERCON_OK);
  EXPECT_NEAR(total, 0.85, 1e-15);
  EXPECT_EQ(satisfied, 1);
  EXPECT_EQ(json::parse(take(text))["mode"], "additive");
  const double mult[] = {0.6, 0.9, 0.5};
  ASSERT_EQ(sercon_multiplicative_margin(2, mult, nullptr, &satisfied, &total), SERCON_OK);
  EXPECT_EQ(satisfied, 0);

  sercon_graph* g = nullptr;
  ASSERT_EQ(sercon_graph_family("path", 6, &g), SERCON_OK);
  int consensus = 0;
  ASSERT_EQ(sercon_lag_bank_experiment(g, 0.9, 3, &text, &consensus), SERCON_OK);
  EXPECT_EQ(consensus, 1);
  EXPECT_TRUE(json::parse(take(text))["margin"]["satisfied"].get<bool>());
  int stable = 0;
  ASSERT_EQ(sercon_margin_assemble_static(g, "multiplicative", 2, mult, &text, &stable), SERCON_OK);
  sercon_string_free(text);
  int agreed = 0;
  ASSERT_EQ(sercon_robustness_sweep(g, "additive", 2, 10, 0.99, 4, 1, &text, &stable, &agreed),
            SERCON_OK);
  EXPECT_EQ(stable, 10);
  EXPECT_EQ(agreed, 10);
  sercon_string_free(text);
  EXPECT_EQ(sercon_robustness_sweep(g, "sideways", 2, 10, 0.99, 4, 1, &text, &stable, &agreed),
            SERCON_ERROR_CONFIG);
  sercon_graph_free(g);
}

}  // namespace
