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

// Experiment runner: sercon <synthesize|sweep|simulate|margin|spectrum>.
// Every run writes its resolved configuration to <out>/config.json; passing
// that file back through --config reproduces the outputs byte for byte.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sercon/sercon.h"

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitNumerical = 4;

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void raise(int code, const std::string& message) {
  throw Failure{code, message};
}

void check(sercon_status status) {
  if (status == SERCON_OK) return;
  const int code = status == SERCON_ERROR_INTERNAL ? kExitNumerical : int(status);
  raise(code, sercon_last_error());
}

class OwnedString {
 public:
  OwnedString() = default;
  OwnedString(const OwnedString&) = delete;
  OwnedString& operator=(const OwnedString&) = delete;
  ~OwnedString() { sercon_string_free(text_); }
  char** out() { return &text_; }
  std::string str() const { return text_ == nullptr ? std::string() : text_; }

 private:
  char* text_ = nullptr;
};

struct GraphDeleter {
  void operator()(sercon_graph* g) const { sercon_graph_free(g); }
};
struct DesignDeleter {
  void operator()(sercon_design* d) const { sercon_design_free(d); }
};
struct TraceDeleter {
  void operator()(sercon_trace* t) const { sercon_trace_free(t); }
};
using Graph = std::unique_ptr<sercon_graph, GraphDeleter>;
using Design = std::unique_ptr<sercon_design, DesignDeleter>;
using Trace = std::unique_ptr<sercon_trace, TraceDeleter>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(kExitConfig, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(kExitConfig, "cannot write '" + path.string() + "'");
  out << text;
}

json common_defaults() {
  return json{{"out", "out"}, {"seed", 1}, {"jobs", 0}};
}

json graph_defaults(const std::string& family, int nodes) {
  return json{{"family", family}, {"N", nodes}, {"graph", ""}};
}

json defaults(const std::string& command) {
  json cfg = common_defaults();
  if (command == "synthesize") {
    cfg.update(graph_defaults("leader_chain", 12));
    cfg["gains"] = {2.0, 4.0, 6.0};
    cfg["c"] = 0.0;
  } else if (command == "sweep") {
    cfg["family"] = "leader_chain";
    cfg["design"] = "serial";
    cfg["gains"] = {2.0, 4.0, 6.0};
    cfg["n_min"] = 3;
    cfg["n_max"] = 30;
    cfg["full_spectra"] = false;
  } else if (command == "simulate") {
    cfg.update(graph_defaults("leader_chain", 13));
    cfg["design"] = "serial";
    cfg["gains"] = {2.0, 4.0, 6.0};
    cfg["reference"] = "zero";
    cfg["horizon"] = 50.0;
    cfg["dt"] = 0.01;
    cfg["epsilon"] = 1e-6;
    cfg["window"] = 0.0;
    cfg["spread"] = 1.0;
    cfg["leader"] = 0;
    cfg["acceleration"] = 1.0;
    cfg["impulse"] = 1.0;
    cfg["stride"] = 1;
  } else if (command == "margin") {
    cfg.update(graph_defaults("path", 6));
    cfg["mode"] = "additive";
    cfg["norms"] = json::array();
    cfg["assemble"] = false;
    cfg["order"] = 2;
    cfg["samples"] = 0;
    cfg["target"] = 0.99;
    cfg["kappa"] = 0.0;
  } else if (command == "spectrum") {
    cfg.update(graph_defaults("leader_chain", 12));
    cfg["design"] = "serial";
    cfg["gains"] = {2.0, 4.0, 6.0};
    cfg["design_json"] = "";
  }
  return cfg;
}

json preset(const std::string& command, const std::string& name) {
  if (command == "sweep" && name == "fig4") {
    return json{{"family", "leader_chain"},
                {"n_min", 3},
                {"n_max", 30},
                {"runs",
                 {{{"name", "fig4_conventional"}, {"design", "conventional"},
                   {"gains", {2.0, 4.0, 6.0}}},
                  {{"name", "fig4_serial"}, {"design", "serial"},
                   {"gains", {2.0, 4.0, 6.0}}}}}};
  }
  if (command == "sweep" && name == "cycle-2nd-order") {
    // s^2 + 2 p1 L s + p0 L with p0 = p1 = 1.
    return json{{"family", "directed_cycle"},
                {"design", "conventional"},
                {"gains", {1.0, 2.0}},
                {"n_min", 3},
                {"n_max", 40}};
  }
  if (command == "simulate" && (name == "fig4-serial" || name == "fig4-conventional")) {
    return json{{"family", "leader_chain"},
                {"N", 13},
                {"design", name == "fig4-serial" ? "serial" : "conventional"},
                {"gains", {2.0, 4.0, 6.0}},
                {"reference", "leader_acceleration"},
                {"acceleration", 1.0},
                {"spread", 0.0},
                {"horizon", 1000.0},
                {"dt", 0.1},
                {"stride", 10}};
  }
  if (command == "synthesize" && name == "fig4") {
    return json{{"family", "leader_chain"}, {"N", 12}, {"gains", {2.0, 4.0, 6.0}}};
  }
  if (command == "margin" && name == "lag-bank") {
    return json{{"family", "path"}, {"N", 8}, {"kappa", 0.9}};
  }
  if (command == "margin" && name == "small-gain") {
    return json{{"family", "path"}, {"N", 6}, {"mode", "additive"},
                {"order", 2}, {"samples", 100}, {"target", 0.99}};
  }
  if (command == "margin" && name == "multiplicative") {
    return json{{"family", "path"}, {"N", 6}, {"mode", "multiplicative"},
                {"order", 2}, {"samples", 100}, {"target", 0.99}};
  }
  raise(kExitConfig, "unknown preset '" + name + "' for " + command);
}

// Command-line values are collected as text and converted using the type
// of the matching default.
struct Overrides {
  std::map<std::string, std::string> scalars;
  std::map<std::string, std::vector<double>> arrays;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
};

std::string flag_name(const std::string& key) {
  std::string name = key;
  for (char& c : name) {
    if (c == '_') c = '-';
  }
  return "--" + name;
}

void register_options(CLI::App* app, const json& cfg, Overrides& ov) {
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_boolean()) {
      ov.options[key] = app->add_flag(flag_name(key), ov.flags[key]);
    } else if (value.is_array()) {
      ov.options[key] = app->add_option(flag_name(key), ov.arrays[key])->expected(1, -1);
    } else {
      ov.options[key] = app->add_option(flag_name(key), ov.scalars[key]);
    }
  }
}

json convert(const std::string& key, const json& like, const std::string& text) {
  try {
    std::size_t used = 0;
    if (like.is_number_unsigned()) {
      const auto v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } else if (like.is_number_integer()) {
      const auto v = std::stoll(text, &used);
      if (used == text.size()) return v;
    } else if (like.is_number_float()) {
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } else {
      return text;
    }
  } catch (const std::exception&) {
  }
  raise(kExitConfig, "invalid value '" + text + "' for --" + key);
}

void apply_overrides(json& cfg, const json& shape, const Overrides& ov) {
  for (const auto& [key, option] : ov.options) {
    if (option->count() == 0) continue;
    const json& like = shape[key];
    if (like.is_boolean()) {
      cfg[key] = ov.flags.at(key);
    } else if (like.is_array()) {
      cfg[key] = ov.arrays.at(key);
    } else {
      cfg[key] = convert(key, like, ov.scalars.at(key));
    }
  }
}

void merge_config(json& cfg, const json& file, const std::string& command) {
  if (!file.is_object()) raise(kExitConfig, "config must be a JSON object");
  for (const auto& [key, value] : file.items()) {
    if (key == "command") {
      if (value != command) {
        raise(kExitConfig, "config was written for '" + value.dump() + "'");
      }
      continue;
    }
    if (key != "runs" && key != "preset" && !cfg.contains(key)) {
      raise(kExitConfig, "unknown config key '" + key + "'");
    }
    cfg[key] = value;
  }
}

template <typename T>
T get(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    raise(kExitConfig, "config key '" + key + "' has the wrong type");
  }
}

sercon_design_kind design_kind(const std::string& name) {
  if (name == "serial") return SERCON_DESIGN_SERIAL;
  if (name == "conventional") return SERCON_DESIGN_CONVENTIONAL;
  raise(kExitConfig, "design must be 'serial' or 'conventional'");
}

Graph load_graph(const json& cfg) {
  sercon_graph* g = nullptr;
  const std::string path = get<std::string>(cfg, "graph");
  if (!path.empty()) {
    check(sercon_graph_from_json(read_file(path).c_str(), &g));
  } else {
    check(sercon_graph_family(get<std::string>(cfg, "family").c_str(),
                              get<int>(cfg, "N"), &g));
  }
  return Graph(g);
}

Design make_design(const sercon_graph* graph, const json& cfg) {
  const auto gains = get<std::vector<double>>(cfg, "gains");
  sercon_design* d = nullptr;
  check(sercon_design_create(graph, design_kind(get<std::string>(cfg, "design")),
                             static_cast<int>(gains.size()), gains.data(), &d));
  return Design(d);
}

std::string pretty(const std::string& compact) {
  return json::parse(compact).dump(2) + "\n";
}

int run_synthesize(const json& cfg, const fs::path& out) {
  Graph graph = load_graph(cfg);
  const auto gains = get<std::vector<double>>(cfg, "gains");
  sercon_design* raw = nullptr;
  check(sercon_design_create(graph.get(), SERCON_DESIGN_SERIAL,
                             static_cast<int>(gains.size()), gains.data(), &raw));
  Design design(raw);
  OwnedString design_json, locality;
  int pass = 0;
  check(sercon_design_to_json(design.get(), design_json.out()));
  check(sercon_design_locality(design.get(), graph.get(), get<double>(cfg, "c"),
                               locality.out(), &pass));
  write_file(out / "design.json", pretty(design_json.str()));
  write_file(out / "locality.json", pretty(locality.str()));
  const json report = json::parse(locality.str());
  std::cout << "c' = " << report["c_prime"].dump() << ", locality "
            << (pass ? "passed" : "FAILED") << "\n";
  return pass ? kExitOk : kExitPrecondition;
}

int run_sweep(const json& cfg, const fs::path& out) {
  json runs = cfg.contains("runs")
                  ? cfg["runs"]
                  : json::array({{{"name", "sweep"},
                                  {"design", cfg["design"]},
                                  {"gains", cfg["gains"]}}});
  json summary = json::array();
  for (const json& run : runs) {
    const std::string name = get<std::string>(run, "name");
    const auto gains = get<std::vector<double>>(run, "gains");
    OwnedString csv, js;
    int critical = -1;
    check(sercon_sweep(get<std::string>(cfg, "family").c_str(),
                       design_kind(get<std::string>(run, "design")),
                       static_cast<int>(gains.size()), gains.data(),
                       get<int>(cfg, "n_min"), get<int>(cfg, "n_max"),
                       get<int>(cfg, "jobs"), get<bool>(cfg, "full_spectra") ? 1 : 0,
                       csv.out(), js.out(), &critical));
    write_file(out / (name + ".csv"), csv.str());
    write_file(out / (name + ".json"), js.str() + "\n");
    summary.push_back({{"name", name},
                       {"design", run["design"]},
                       {"critical_N", critical < 0 ? json(nullptr) : json(critical)}});
    std::cout << name << ": critical N = "
              << (critical < 0 ? std::string("none") : std::to_string(critical)) << "\n";
  }
  write_file(out / "summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

int run_simulate(const json& cfg, const fs::path& out) {
  Graph graph = load_graph(cfg);
  Design design = make_design(graph.get(), cfg);
  sercon_simulation_options opts;
  sercon_simulation_options_default(&opts);
  const std::string reference = get<std::string>(cfg, "reference");
  if (reference == "zero") {
    opts.reference = SERCON_REFERENCE_ZERO;
  } else if (reference == "impulse") {
    opts.reference = SERCON_REFERENCE_IMPULSE;
  } else if (reference == "leader_acceleration") {
    opts.reference = SERCON_REFERENCE_LEADER_ACCELERATION;
  } else {
    raise(kExitConfig, "reference must be zero, impulse or leader_acceleration");
  }
  opts.horizon = get<double>(cfg, "horizon");
  opts.dt = get<double>(cfg, "dt");
  opts.epsilon = get<double>(cfg, "epsilon");
  opts.window = get<double>(cfg, "window");
  opts.seed = get<std::uint64_t>(cfg, "seed");
  opts.spread = get<double>(cfg, "spread");
  opts.leader = get<int>(cfg, "leader");
  opts.acceleration = get<double>(cfg, "acceleration");
  opts.impulse_scale = get<double>(cfg, "impulse");
  const int stride = get<int>(cfg, "stride");
  if (stride < 1) raise(kExitConfig, "stride must be positive");

  sercon_trace* raw = nullptr;
  check(sercon_simulate(design.get(), &opts, nullptr, &raw));
  Trace trace(raw);
  OwnedString trace_csv, spreads_csv, verdict;
  int consensus = 0;
  check(sercon_trace_csv(trace.get(), std::size_t(stride), trace_csv.out(),
                         spreads_csv.out()));
  check(sercon_trace_verdict(trace.get(), opts.epsilon, opts.window, verdict.out(),
                             &consensus));
  write_file(out / "trace.csv", trace_csv.str());
  write_file(out / "spreads.csv", spreads_csv.str());
  write_file(out / "verdict.json", verdict.str() + "\n");
  std::cout << "consensus: " << (consensus ? "true" : "false") << "\n";
  return kExitOk;
}

int run_margin(const json& cfg, const fs::path& out) {
  const std::string mode = get<std::string>(cfg, "mode");
  const auto norms = get<std::vector<double>>(cfg, "norms");
  const int samples = get<int>(cfg, "samples");
  const double kappa = get<double>(cfg, "kappa");
  if (norms.empty() && samples <= 0 && kappa <= 0.0) {
    raise(kExitConfig, "nothing to do: give --norms, --samples or --kappa");
  }
  if (mode != "additive" && mode != "multiplicative") {
    raise(kExitConfig, "mode must be additive or multiplicative");
  }
  if (!norms.empty()) {
    if (norms.size() < 2) raise(kExitConfig, "need n + 1 >= 2 norms");
    const int n = static_cast<int>(norms.size()) - 1;
    OwnedString js;
    int satisfied = 0;
    double total = 0.0;
    check(mode == "additive"
              ? sercon_additive_margin(n, norms.data(), js.out(), &satisfied, &total)
              : sercon_multiplicative_margin(n, norms.data(), js.out(), &satisfied, &total));
    write_file(out / "margin.json", js.str() + "\n");
    std::cout << mode << " margin total " << json(total).dump() << ", "
              << (satisfied ? "satisfied" : "not satisfied") << "\n";
    if (get<bool>(cfg, "assemble")) {
      Graph graph = load_graph(cfg);
      OwnedString spectrum;
      int stable = 0;
      check(sercon_margin_assemble_static(graph.get(), mode.c_str(), n, norms.data(),
                                          spectrum.out(), &stable));
      write_file(out / "spectrum.json", spectrum.str() + "\n");
      std::cout << "assembled loop " << (stable ? "stable" : "not stable") << "\n";
    }
  }
  if (kappa > 0.0) {
    Graph graph = load_graph(cfg);
    OwnedString js;
    int consensus = 0;
    check(sercon_lag_bank_experiment(graph.get(), kappa, get<std::uint64_t>(cfg, "seed"),
                                     js.out(), &consensus));
    write_file(out / "lag_bank.json", js.str() + "\n");
    std::cout << "lag bank kappa " << json(kappa).dump() << ": consensus "
              << (consensus ? "true" : "false") << "\n";
  }
  if (samples > 0) {
    Graph graph = load_graph(cfg);
    OwnedString csv;
    int stable = 0, agreed = 0;
    check(sercon_robustness_sweep(graph.get(), mode.c_str(), get<int>(cfg, "order"),
                                  samples, get<double>(cfg, "target"),
                                  get<std::uint64_t>(cfg, "seed"), get<int>(cfg, "jobs"),
                                  csv.out(), &stable, &agreed));
    write_file(out / "robustness.csv", csv.str());
    const json summary{{"samples", samples}, {"stable", stable}, {"consensus", agreed}};
    write_file(out / "robustness_summary.json", summary.dump(2) + "\n");
    std::cout << "robustness: " << stable << "/" << samples << " stable, " << agreed
              << "/" << samples << " reached consensus\n";
  }
  return kExitOk;
}

int run_spectrum(const json& cfg, const fs::path& out) {
  Design design;
  const std::string path = get<std::string>(cfg, "design_json");
  if (!path.empty()) {
    sercon_design* raw = nullptr;
    check(sercon_design_from_json(read_file(path).c_str(), &raw));
    design.reset(raw);
  } else {
    Graph graph = load_graph(cfg);
    design = make_design(graph.get(), cfg);
  }
  OwnedString js;
  int stable = 0;
  double max_re = 0.0;
  check(sercon_design_spectrum(design.get(), js.out(), &stable, &max_re));
  write_file(out / "spectrum.json", pretty(js.str()));
  std::cout << "max Re (excluding structural zeros) = " << json(max_re).dump() << ", "
            << (stable ? "stable" : "unstable") << "\n";
  return kExitOk;
}

struct Command {
  std::string name;
  std::string help;
  int (*run)(const json&, const fs::path&);
  CLI::App* app = nullptr;
  Overrides overrides;
  std::string config_path;
  std::string preset_name;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial consensus experiment runner"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;
  const std::vector<std::tuple<std::string, std::string, int (*)(const json&, const fs::path&)>>
      table{{"synthesize", "Expand a serial design and check its locality", run_synthesize},
            {"sweep", "Stability of a design rule across a graph family", run_sweep},
            {"simulate", "Simulate a closed loop and judge consensus", run_simulate},
            {"margin", "Robustness margins, lag-bank and Monte-Carlo checks", run_margin},
            {"spectrum", "Closed-loop spectrum of a single design", run_spectrum}};
  for (const auto& [name, help, run] : table) {
    auto cmd = std::make_unique<Command>();
    cmd->name = name;
    cmd->help = help;
    cmd->run = run;
    cmd->app = app.add_subcommand(name, help);
    cmd->app->add_option("--config", cmd->config_path, "JSON config (e.g. a saved config.json)");
    cmd->app->add_option("--preset", cmd->preset_name, "Named experiment preset");
    register_options(cmd->app, defaults(name), cmd->overrides);
    commands.push_back(std::move(cmd));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    try {
      const json shape = defaults(cmd->name);
      json cfg = shape;
      if (!cmd->preset_name.empty()) {
        merge_config(cfg, preset(cmd->name, cmd->preset_name), cmd->name);
        cfg["preset"] = cmd->preset_name;
      }
      if (!cmd->config_path.empty()) {
        json file;
        try {
          file = json::parse(read_file(cmd->config_path));
        } catch (const json::exception& e) {
          raise(kExitConfig, std::string("malformed config: ") + e.what());
        }
        merge_config(cfg, file, cmd->name);
      }
      apply_overrides(cfg, shape, cmd->overrides);

      const fs::path out = get<std::string>(cfg, "out");
      std::error_code ec;
      fs::create_directories(out, ec);
      if (ec) raise(kExitConfig, "cannot create '" + out.string() + "': " + ec.message());
      json saved{{"command", cmd->name}};
      saved.update(cfg);
      write_file(out / "config.json", saved.dump(2) + "\n");
      return cmd->run(cfg, out);
    } catch (const Failure& f) {
      std::cerr << "sercon " << cmd->name << ": " << f.message << "\n";
      return f.code;
    }
  }
  return kExitConfig;
}
