#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rss/circuit.hpp"
#include "rss/noise.hpp"

namespace rss {

enum class ExperimentId { fig2_top, fig2_bottom, fig2_inset, fig3, fig4_overlap, fig5_sim, custom };
std::string to_string(ExperimentId id);
ExperimentId parse_experiment_id(std::string_view text);

struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::custom;
  std::vector<int> n_values{4};
  std::vector<int> depths{1};
  /// Target mean CNOT infidelities; each one sets gamma of the GUE noise.
  std::vector<double> r_values;
  NoiseModel noise;
  Ensemble ensemble = Ensemble::clifford1q;
  std::string topology = "brickwork-open";
  std::uint64_t shots = 10000;
  std::uint64_t cal_shots = 100000;
  int trials = 5;
  /// "haar" or "stabilizer" random targets.
  std::string state_ensemble = "haar";
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int gamma_samples = 20000;
  int circuit_samples = 2000;
  std::vector<int> chi{4, 8};
  int bootstrap = 200;
  int threads = 0;
  /// Phase of the overlap-task trial state.
  double theta = 0.0;
  /// custom: input state tag and observables ("ZZI", "0.5*XX+ZZ", "target").
  std::string input_state = "zero";
  std::vector<std::string> observables;

  /// Normalized JSON of the whole config; digest() hashes its dump.
  nlohmann::json raw;
  std::string digest() const;
};

/// Parses TOML or JSON (chosen by extension; .toml, otherwise JSON). The seed
/// field is required.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json toml_file_to_json(const std::string& path);
nlohmann::json toml_text_to_json(std::string_view text);

/// Version string stamped into every output table.
std::string code_version();

}  // namespace rss
