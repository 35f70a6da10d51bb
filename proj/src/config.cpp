#include "rss/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "rss/serialization.hpp"

#ifndef RSS_VERSION
#define RSS_VERSION "0.0.0"
#endif

namespace rss {

namespace {

struct IdName {
  ExperimentId id;
  const char* name;
};
constexpr IdName kIds[] = {
    {ExperimentId::fig2_top, "fig2_top"},         {ExperimentId::fig2_bottom, "fig2_bottom"},
    {ExperimentId::fig2_inset, "fig2_inset"},     {ExperimentId::fig3, "fig3"},
    {ExperimentId::fig4_overlap, "fig4_overlap"}, {ExperimentId::fig5_sim, "fig5_sim"},
    {ExperimentId::custom, "custom"},
};

// Grid defaults at desk scale; any field present in the file wins.
void apply_defaults(ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentId::fig2_top:
      c.n_values = {2, 3, 4};
      c.depths = {1, 2};
      c.r_values = {1e-3, 3e-3, 1e-2};
      break;
    case ExperimentId::fig2_bottom:
      c.n_values = {4, 5, 6};
      c.depths = {0, 1, 2};
      c.r_values = {1e-3};
      c.trials = 20;
      break;
    case ExperimentId::fig2_inset:
      c.n_values = {6};
      c.depths = {0, 1, 2};
      c.r_values = {1e-3, 1e-2, 1e-1};
      c.trials = 20;
      c.state_ensemble = "stabilizer";
      break;
    case ExperimentId::fig3:
      c.n_values = {4, 6, 8};
      c.depths = {1, 2};
      c.chi = {2, 4, 8};
      break;
    case ExperimentId::fig4_overlap:
      c.n_values = {8};
      c.depths = {1, 2, 3};
      c.topology = "blocks-4";
      c.theta = std::numbers::pi / std::numbers::sqrt2;
      break;
    case ExperimentId::fig5_sim:
      c.n_values = {5};
      c.depths = {0, 1, 2};
      break;
    case ExperimentId::custom:
      break;
  }
}

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

nlohmann::json to_raw(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = to_string(c.experiment);
  j["n"] = c.n_values;
  j["depth"] = c.depths;
  j["r"] = c.r_values;
  j["noise"] = to_json(c.noise);
  j["ensemble"] = to_string(c.ensemble);
  j["topology"] = c.topology;
  j["shots"] = c.shots;
  j["cal_shots"] = c.cal_shots;
  j["trials"] = c.trials;
  j["state_ensemble"] = c.state_ensemble;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["gamma_samples"] = c.gamma_samples;
  j["circuit_samples"] = c.circuit_samples;
  j["chi"] = c.chi;
  j["bootstrap"] = c.bootstrap;
  j["theta"] = c.theta;
  j["input_state"] = c.input_state;
  j["observables"] = c.observables;
  // threads is left out: it never changes results.
  return j;
}

}  // namespace

std::string to_string(ExperimentId id) {
  for (const auto& e : kIds)
    if (e.id == id) return e.name;
  throw std::invalid_argument("unknown experiment id");
}

ExperimentId parse_experiment_id(std::string_view text) {
  for (const auto& e : kIds)
    if (text == e.name) return e.id;
  throw std::invalid_argument("unknown experiment id: " + std::string(text));
}

std::string ExperimentConfig::digest() const {
  // Where results are written does not change them.
  nlohmann::json j = raw;
  j.erase("out_dir");
  return rss::digest(j.dump());
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a table/object");
  if (!j.contains("seed")) throw std::invalid_argument("config: 'seed' is required");
  ExperimentConfig c;
  c.experiment = parse_experiment_id(j.value("experiment", std::string("custom")));
  apply_defaults(c);
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") continue;
    else if (key == "n") c.n_values = scalar_or_list<int>(value);
    else if (key == "depth") c.depths = scalar_or_list<int>(value);
    else if (key == "r") c.r_values = scalar_or_list<double>(value);
    else if (key == "noise") c.noise = noise_from_json(value);
    else if (key == "ensemble") c.ensemble = parse_ensemble(value.get<std::string>());
    else if (key == "topology") c.topology = value.get<std::string>();
    else if (key == "shots") c.shots = value.get<std::uint64_t>();
    else if (key == "cal_shots") c.cal_shots = value.get<std::uint64_t>();
    else if (key == "trials") c.trials = value.get<int>();
    else if (key == "state_ensemble") c.state_ensemble = value.get<std::string>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "out_dir") c.out_dir = value.get<std::string>();
    else if (key == "gamma_samples") c.gamma_samples = value.get<int>();
    else if (key == "circuit_samples") c.circuit_samples = value.get<int>();
    else if (key == "chi") c.chi = scalar_or_list<int>(value);
    else if (key == "bootstrap") c.bootstrap = value.get<int>();
    else if (key == "threads") c.threads = value.get<int>();
    else if (key == "theta") c.theta = value.get<double>();
    else if (key == "input_state") c.input_state = value.get<std::string>();
    else if (key == "observables") c.observables = scalar_or_list<std::string>(value);
    else if (key == "note") continue;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  if (c.n_values.empty() || c.depths.empty()) throw std::invalid_argument("config: empty n or depth grid");
  for (int n : c.n_values)
    if (n < 1 || n > 20) throw std::invalid_argument("config: n out of range");
  for (int d : c.depths)
    if (d < 0) throw std::invalid_argument("config: negative depth");
  for (double r : c.r_values)
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("config: r must lie in (0, 1)");
  if (c.trials < 1) throw std::invalid_argument("config: trials must be positive");
  if (c.state_ensemble != "haar" && c.state_ensemble != "stabilizer")
    throw std::invalid_argument("config: state_ensemble must be haar or stabilizer");
  if (!std::isfinite(c.theta)) throw std::invalid_argument("config: theta must be finite");
  c.raw = to_raw(c);
  return c;
}

nlohmann::json toml_text_to_json(std::string_view text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw std::invalid_argument(std::string("config: TOML parse error: ") + std::string(e.description()));
  }
  std::ostringstream os;
  os << toml::json_formatter{tbl};
  return nlohmann::json::parse(os.str());
}

nlohmann::json toml_file_to_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return toml_text_to_json(ss.str());
}

ExperimentConfig load_config(const std::string& path) {
  const bool is_toml = path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
  if (is_toml) return config_from_json(toml_file_to_json(path));
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  return config_from_json(nlohmann::json::parse(in));
}

std::string code_version() { return std::string("rss ") + RSS_VERSION; }

}  // namespace rss
