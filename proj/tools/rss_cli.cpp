// rss: acquire | calibrate | estimate | bias | experiment

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rss/calibration.hpp"
#include "rss/config.hpp"
#include "rss/estimation.hpp"
#include "rss/experiments.hpp"
#include "rss/serialization.hpp"

namespace fs = std::filesystem;
using namespace rss;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shots;
  std::string out;
  std::string mode = "dense";
  int chi = 8;
  int threads = 0;
};

ExperimentConfig load_with_overrides(const Common& o) {
  if (o.config.empty()) throw std::invalid_argument("--config is required");
  nlohmann::json j = o.config.ends_with(".toml") ? toml_file_to_json(o.config) : [&] {
    std::ifstream in(o.config);
    if (!in) throw std::runtime_error("cannot open " + o.config);
    return nlohmann::json::parse(in);
  }();
  if (o.seed) j["seed"] = *o.seed;
  if (o.shots) j["shots"] = *o.shots;
  if (!o.out.empty()) j["out_dir"] = o.out;
  if (o.threads) j["threads"] = o.threads;
  return config_from_json(j);
}

std::string out_dir(const Common& o, const std::string& fallback) {
  const std::string d = o.out.empty() ? fallback : o.out;
  fs::create_directories(d);
  return d;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return digest(ss.str());
}

int cmd_acquire(const Common& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const int n = cfg.n_values.front();
  const int d = cfg.depths.front();
  const NoiseModel noise = noise_grid(cfg).front().noise;
  AcquisitionSpec spec = calibration_spec(n, d, cfg.ensemble, cfg.topology, noise, cfg.shots, cfg.seed);
  spec.header.input_state = cfg.input_state;
  spec.input = make_input_state(cfg.input_state, n);
  const std::string dir = out_dir(o, cfg.out_dir);
  const std::string path = (fs::path(dir) / "records.jsonl").string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_record_header(out, spec.header);
  acquire_stream(spec, 0, cfg.shots, cfg.threads, [&](std::span<const ShadowRecord> recs) {
    for (const auto& r : recs) write_record(out, r);
  });
  out.close();
  std::cout << "records " << path << "\nshots " << cfg.shots << "\nnoise_digest " << spec.header.noise_digest
            << "\nfile_digest " << file_digest(path) << "\n";
  return 0;
}

int cmd_calibrate(const Common& o, const std::string& records, bool histogram) {
  const RecordSet set = read_records(records);
  const std::string dir = out_dir(o, ".");
  CalibrationOptions co;
  co.mode = parse_calibration_mode(o.mode);
  co.chi = o.chi;
  co.threads = o.threads;
  FrameSpectrum f = estimate_f(set.header, set.records, co);
  if (co.mode == CalibrationMode::tt) {
    const std::string path = (fs::path(dir) / "frame_tt.json").string();
    write_frame_tt_json(path, f);
    std::cout << "frame " << path << "\nmax_rank " << f.tt->max_rank() << "\n";
  } else {
    const std::string path = (fs::path(dir) / "frame.csv").string();
    write_frame_csv(path, f);
    std::cout << "frame " << path << "\nflagged " << f.flagged().size() << "\n";
  }
  if (histogram) {
    const auto labels = histogram_labels(set.header.n);
    const std::string path = (fs::path(dir) / "histogram.csv").string();
    Table t;
    t.name = "histogram";
    t.columns = {"record"};
    for (std::size_t l = 0; l < labels.size(); ++l) t.columns.push_back("phi_ps" + std::to_string(l + 1));
    for (std::size_t i = 0; i < set.records.size(); ++i) {
      const Eigen::VectorXd phi = phi_dense(set.records[i].circuit, set.records[i].z);
      std::vector<std::string> row{cell(static_cast<std::uint64_t>(i))};
      for (auto k : labels) row.push_back(cell(phi[static_cast<Eigen::Index>(k)]));
      t.add(std::move(row));
    }
    write_table(path, t, digest(to_json(set.header).dump()));
    std::cout << "histogram " << path << "\n";
  }
  return 0;
}

int cmd_estimate(const Common& o, const std::string& records, const std::string& frame_path,
                 const std::vector<std::string>& observables, bool allow_flagged) {
  const RecordSet set = read_records(records);
  const RecordHeader& h = set.header;
  const FrameSpectrum mitigated = read_frame(frame_path);
  const FrameSpectrum unmitigated = noiseless_frame(h.n, h.depth, h.ensemble, h.topology_id);
  DualOptions mo;
  mo.allow_flagged = allow_flagged;
  std::vector<Estimate> rows;
  Table wide;
  wide.name = "comparison";
  wide.columns = {"observable", "mitigated", "mitigated_stderr", "unmitigated", "unmitigated_stderr", "shots"};
  for (const auto& text : observables) {
    Observable obs;
    if (text == "target") {
      obs = Observable::pure_target(make_input_state(h.input_state, h.n), "target");
    } else if (text.rfind("state:", 0) == 0) {
      obs = Observable::pure_target(make_input_state(text.substr(6), h.n), text);
    } else {
      obs = Observable::parse(text);
      obs.id = text;
    }
    Estimate m = estimate(obs, set.records, mitigated, mo);
    m.frame = "mitigated";
    Estimate u = estimate(obs, set.records, unmitigated);
    u.frame = "unmitigated";
    wide.add({obs.id, cell(m.value), cell(m.se), cell(u.value), cell(u.se), cell(m.shots)});
    rows.push_back(m);
    rows.push_back(u);
  }
  const std::string dir = out_dir(o, ".");
  write_estimates_csv((fs::path(dir) / "estimates.csv").string(), rows);
  write_table((fs::path(dir) / "comparison.csv").string(), wide, digest(to_json(h).dump()));
  for (const auto& e : rows) std::cout << e.observable << " " << e.frame << " " << cell(e.value) << " +- " << cell(e.se) << "\n";
  return 0;
}

int cmd_bias(const Common& o, const std::string& noisy_path, const std::string& ideal_path, int depth,
             const std::string& topology) {
  const FrameSpectrum noisy = read_frame(noisy_path);
  const FrameSpectrum ideal = ideal_path.empty() ? noiseless_frame(noisy.n, depth, Ensemble::clifford1q, topology)
                                                 : read_frame(ideal_path);
  Table t;
  t.name = "bias";
  t.columns = {"support", "worst_case_bias"};
  t.add({"all", cell(worst_case_bias(ideal, noisy))});
  for (int ps = 1; ps <= noisy.n; ++ps) t.add({cell(ps), cell(worst_case_bias_by_support(ideal, noisy, ps))});
  const std::string dir = out_dir(o, ".");
  write_table((fs::path(dir) / "bias.csv").string(), t, digest(noisy_path + "|" + ideal_path));
  for (const auto& r : t.rows) std::cout << r[0] << " " << r[1] << "\n";
  return 0;
}

int cmd_experiment(const Common& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const ExperimentResult res = run_experiment(cfg);
  for (const auto& p : write_experiment(cfg, res)) std::cout << p << "\n";
  std::cout << "config_digest " << cfg.digest() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-robust shallow-circuit classical shadows"};
  app.require_subcommand(1);
  Common o;
  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--config", o.config, "TOML or JSON configuration");
    sc->add_option("--seed", o.seed, "Master seed (overrides the config)");
    sc->add_option("--shots", o.shots, "Shot count (overrides the config)");
    sc->add_option("--out", o.out, "Output directory");
    sc->add_option("--mode", o.mode, "Calibration mode")->check(CLI::IsMember({"dense", "tt"}));
    sc->add_option("--chi", o.chi, "TT rank for --mode tt")->check(CLI::PositiveNumber);
    sc->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  };

  auto* acq = app.add_subcommand("acquire", "Simulate shots and write a record file");
  add_common(acq);

  std::string records;
  bool histogram = false;
  auto* cal = app.add_subcommand("calibrate", "Estimate the frame spectrum from |0^n> records");
  add_common(cal);
  cal->add_option("--records", records, "Record file (JSONL)")->required();
  cal->add_flag("--histogram", histogram, "Also write per-record phi values for one label per support");

  std::string frame;
  std::vector<std::string> observables;
  bool allow_flagged = false;
  auto* est = app.add_subcommand("estimate", "Mitigated and unmitigated estimates");
  add_common(est);
  est->add_option("--records", records, "Record file (JSONL)")->required();
  est->add_option("--frame", frame, "Frame spectrum (.csv or .json)")->required();
  est->add_option("--observable", observables, "Pauli sum like 0.5*ZZI+XIX, 'target' or state:<tag>")->required();
  est->add_flag("--allow-flagged", allow_flagged, "Invert statistically unresolved frame entries anyway");

  std::string ideal;
  int depth = 0;
  std::string topology = "brickwork-open";
  auto* bias = app.add_subcommand("bias", "Worst-case Pauli bias of a frame against the noiseless one");
  add_common(bias);
  bias->add_option("--frame", frame, "Noisy frame spectrum")->required();
  bias->add_option("--ideal", ideal, "Reference spectrum (default: exact noiseless frame)");
  bias->add_option("--depth", depth, "Circuit depth of the default reference");
  bias->add_option("--topology", topology, "Topology of the default reference");

  auto* exp = app.add_subcommand("experiment", "Run a configured experiment grid");
  add_common(exp);

  CLI11_PARSE(app, argc, argv);
  try {
    if (acq->parsed()) return cmd_acquire(o);
    if (cal->parsed()) return cmd_calibrate(o, records, histogram);
    if (est->parsed()) return cmd_estimate(o, records, frame, observables, allow_flagged);
    if (bias->parsed()) return cmd_bias(o, frame, ideal, depth, topology);
    if (exp->parsed()) return cmd_experiment(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
