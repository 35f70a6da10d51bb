#include "rss/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "rss/frame_oracles.hpp"
#include "rss/mals.hpp"
#include "rss/parallel.hpp"
#include "rss/rng.hpp"

namespace rss {

namespace {

constexpr std::uint64_t kChunk = 1024;

std::size_t sz(int n) { return static_cast<std::size_t>(n); }

std::string tag_of(double r) { return std::isnan(r) ? std::string("nan") : cell(r); }

// Mean absolute error over trials, grouped by the leading key columns.
Table summarize_errors(const Table& rows, const std::vector<std::string>& keys, const std::string& error_column) {
  std::vector<std::size_t> key_idx;
  for (const auto& k : keys)
    key_idx.push_back(static_cast<std::size_t>(std::find(rows.columns.begin(), rows.columns.end(), k) - rows.columns.begin()));
  const auto err_idx =
      static_cast<std::size_t>(std::find(rows.columns.begin(), rows.columns.end(), error_column) - rows.columns.begin());
  std::vector<std::vector<std::string>> order;
  std::map<std::vector<std::string>, std::vector<double>> groups;
  for (const auto& row : rows.rows) {
    std::vector<std::string> key;
    for (auto i : key_idx) key.push_back(row[i]);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(std::stod(row[err_idx]));
  }
  Table s;
  s.name = rows.name + "_summary";
  s.columns = keys;
  s.columns.insert(s.columns.end(), {"mean_" + error_column, "stderr", "trials"});
  for (const auto& key : order) {
    const auto& v = groups[key];
    const MeanSe m = mean_se(v);
    std::vector<std::string> row = key;
    row.insert(row.end(), {cell(m.mean), cell(m.se), cell(static_cast<std::uint64_t>(v.size()))});
    s.add(std::move(row));
  }
  return s;
}

double exact_expectation(const Observable& obs, const DenseState& state) {
  if (obs.target) return std::norm(obs.target->inner(state));
  double v = 0;
  for (const auto& [c, p] : obs.terms) v += c * pauli_expectation(state, p);
  return v;
}

NoiseModel restrict_readout(NoiseModel noise, int first, int count) {
  if (noise.readout.size() > 1) {
    std::vector<Readout> part;
    for (int q = first; q < first + count; ++q) part.push_back(noise.readout.at(sz(q)));
    noise.readout = std::move(part);
  }
  return noise;
}

DualOptions override_guard() {
  DualOptions o;
  o.allow_flagged = true;
  return o;
}

std::uint64_t point_seed(std::uint64_t master, std::uint64_t point, std::string_view what) {
  return derive_seed(derive_seed(master, point, "grid-point"), 0, what);
}

// Fidelity estimation grid shared by fig2_bottom and fig2_inset.
ExperimentResult fidelity_grid(const ExperimentConfig& cfg, const std::string& name) {
  Table t;
  t.name = name;
  t.columns = {"r", "gamma", "n", "depth", "trial", "frame", "estimate", "stderr", "exact", "abs_error", "flagged"};
  const auto noises = noise_grid(cfg);
  std::uint64_t point = 0;
  for (const auto& np : noises)
    for (int n : cfg.n_values)
      for (int d : cfg.depths) {
        ++point;
        const AcquisitionSpec cal = calibration_spec(n, d, cfg.ensemble, cfg.topology, np.noise, cfg.cal_shots,
                                                     point_seed(cfg.seed, point, "calibration"));
        CalibrationOptions co;
        co.threads = cfg.threads;
        const FrameSpectrum fhat = calibrate(cal, co);
        const FrameSpectrum fid = noiseless_frame(n, d, cfg.ensemble, cfg.topology);
        const auto flagged = static_cast<std::uint64_t>(fhat.flagged().size());
        for (int trial = 0; trial < cfg.trials; ++trial) {
          // Targets depend only on the trial index: every grid point sees the same states.
          const std::uint64_t ts = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), "target");
          AcquisitionSpec spec;
          spec.header = cal.header;
          spec.header.input_state = cfg.state_ensemble + ":" + std::to_string(ts);
          spec.header.shots = cfg.shots;
          spec.header.master_seed = derive_seed(point_seed(cfg.seed, point, "estimation"), static_cast<std::uint64_t>(trial));
          spec.input = random_target(cfg.state_ensemble, n, ts);
          spec.noise = np.noise;
          const Observable obs = Observable::pure_target(spec.input, "fidelity");
          const std::vector<EstimationJob> jobs{{obs, &fhat, "mitigated", override_guard()},
                                                {obs, &fid, "unmitigated", {}}};
          const auto est = estimate_online(spec, jobs, 0, cfg.shots, cfg.threads);
          for (const auto& e : est)
            t.add({tag_of(np.r), cell(np.noise.gamma), cell(n), cell(d), cell(trial), e.frame, cell(e.value), cell(e.se),
                   cell(1.0), cell(std::abs(e.value - 1.0)), cell(flagged)});
        }
      }
  ExperimentResult res;
  res.tables.push_back(summarize_errors(t, {"r", "n", "depth", "frame"}, "abs_error"));
  res.tables.insert(res.tables.begin(), std::move(t));
  return res;
}

}  // namespace

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::logic_error("Table: row width differs from header in " + name);
  rows.push_back(std::move(row));
}

std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}
std::string cell(std::uint64_t x) { return std::to_string(x); }
std::string cell(int x) { return std::to_string(x); }

void write_table(const std::string& path, const Table& t, const std::string& config_digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# config_digest=" << config_digest << "\n# code_version=" << code_version() << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

NoiseModel incoherent_noise(const NoiseModel& base, double r, int gamma_samples, std::uint64_t seed) {
  NoiseModel m = base;
  Rng rng(seed);
  m.two_qubit = TwoQubitNoise::gue;
  m.gamma = calibrate_gamma(r, gamma_samples, rng);
  return m;
}

std::vector<NoisePoint> noise_grid(const ExperimentConfig& cfg) {
  if (cfg.r_values.empty()) return {NoisePoint{std::numeric_limits<double>::quiet_NaN(), cfg.noise}};
  std::vector<NoisePoint> out;
  // One set of GUE spectra for every r, so gamma is monotone in r.
  const std::uint64_t s = derive_seed(cfg.seed, 0, "gamma");
  for (double r : cfg.r_values) out.push_back({r, incoherent_noise(cfg.noise, r, cfg.gamma_samples, s)});
  return out;
}

DenseState random_target(const std::string& ensemble, int n, std::uint64_t seed) {
  if (ensemble != "haar" && ensemble != "stabilizer") throw std::invalid_argument("unknown state ensemble: " + ensemble);
  return make_input_state(ensemble + ":" + std::to_string(seed), n);
}

FrameSpectrum noiseless_frame(int n, int depth, Ensemble ensemble, const std::string& topology_id) {
  const Topology topo = Topology::from_id(n, topology_id);
  const TensorTrain t = exact_f_tt_pauli_noise(NoiseModel::noiseless(), topo, depth, ensemble);
  FrameSpectrum f = FrameSpectrum::dense(t.to_dense(), FrameProvenance::exact_oracle);
  f.f[0] = 1.0;
  return f;
}

std::vector<std::vector<double>> evaluate_online(const AcquisitionSpec& spec, std::span<const EstimationJob> jobs,
                                                 std::uint64_t first, std::uint64_t count, int threads) {
  spec.noise.validate(spec.header.n);
  const Topology topo = Topology::from_id(spec.header.n, spec.header.topology_id);
  std::vector<DualEvaluator> evals;
  for (const auto& j : jobs) {
    if (!j.frame) throw std::invalid_argument("evaluate_online: job without frame");
    evals.emplace_back(j.observable, *j.frame, j.options);
  }
  std::vector<std::vector<double>> values(jobs.size(), std::vector<double>(static_cast<std::size_t>(count)));
  const auto chunks = static_cast<std::size_t>((count + kChunk - 1) / kChunk);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    const std::uint64_t begin = first + c * kChunk;
    const std::uint64_t end = std::min(first + count, begin + kChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      const ShadowRecord r = simulate_shot(spec, topo, i);
      for (std::size_t j = 0; j < evals.size(); ++j) values[j][static_cast<std::size_t>(i - first)] = evals[j](r);
    }
  });
  return values;
}

std::vector<Estimate> estimate_online(const AcquisitionSpec& spec, std::span<const EstimationJob> jobs,
                                      std::uint64_t first, std::uint64_t count, int threads) {
  if (count == 0) throw std::invalid_argument("estimate_online: no shots");
  const auto values = evaluate_online(spec, jobs, first, count, threads);
  std::vector<Estimate> out;
  for (std::size_t j = 0; j < jobs.size(); ++j) out.push_back(summarize(values[j], jobs[j].observable.id, jobs[j].frame_tag));
  return out;
}

AcquisitionSpec calibration_spec(int n, int depth, Ensemble ensemble, const std::string& topology_id,
                                 const NoiseModel& noise, std::uint64_t shots, std::uint64_t seed) {
  AcquisitionSpec s;
  s.header.n = n;
  s.header.depth = depth;
  s.header.ensemble = ensemble;
  s.header.topology_id = topology_id;
  s.header.input_state = "zero";
  s.header.master_seed = seed;
  s.header.shots = shots;
  s.header.noise_digest = noise_digest(noise);
  s.input = DenseState(n);
  s.noise = noise;
  return s;
}

std::vector<std::uint64_t> guarded_labels(const FrameSpectrum& f, double factor) {
  std::vector<std::uint64_t> out;
  const Eigen::VectorXd v = f.values();
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    const double se = f.se.size() ? f.se[k] : 0.0;
    if (std::abs(v[k]) > factor * se && v[k] != 0.0) out.push_back(static_cast<std::uint64_t>(k));
  }
  return out;
}

double bootstrap_floor(const FrameSpectrum& f, const Eigen::MatrixXd& replicates, std::span<const std::uint64_t> labels,
                       double quantile) {
  if (replicates.cols() == 0) throw std::invalid_argument("bootstrap_floor: no replicates");
  std::vector<double> worst;
  for (Eigen::Index b = 0; b < replicates.cols(); ++b) {
    double w = 0;
    for (std::uint64_t k : labels) {
      const auto i = static_cast<Eigen::Index>(k);
      w = std::max(w, std::abs(replicates(i, b) / f.f[i] - 1.0));
    }
    worst.push_back(w);
  }
  std::sort(worst.begin(), worst.end());
  const auto idx = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(worst.size()))) - 1;
  return worst[std::min(idx, worst.size() - 1)];
}

DenseState overlap_trial_state(double theta) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(256);
  const double c = std::cos(theta), s = std::sin(theta), s2 = std::sin(2 * theta);
  a[static_cast<Eigen::Index>(parse_bitstring("11001100"))] = c * c;
  a[static_cast<Eigen::Index>(parse_bitstring("11000011"))] = 0.5 * s2;
  a[static_cast<Eigen::Index>(parse_bitstring("00111100"))] = 0.5 * s2;
  a[static_cast<Eigen::Index>(parse_bitstring("00110011"))] = s * s;
  return DenseState::from_amplitudes(a);
}

DenseState overlap_walker_state(int which) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(256);
  const double lead = which == 1 ? 0.5 : 1.0 / std::sqrt(2.0);
  const double rest = which == 1 ? 0.5 : 1.0 / std::sqrt(6.0);
  if (which != 1 && which != 2) throw std::invalid_argument("overlap_walker_state: which must be 1 or 2");
  a[static_cast<Eigen::Index>(parse_bitstring("11001100"))] = lead;
  a[static_cast<Eigen::Index>(parse_bitstring("11000011"))] = rest;
  a[static_cast<Eigen::Index>(parse_bitstring("00111100"))] = rest;
  a[static_cast<Eigen::Index>(parse_bitstring("00110011"))] = rest;
  return DenseState::from_amplitudes(a);
}

MeanSe mean_se(std::span<const double> x) {
  MeanSe m;
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return m;
}

ExperimentResult run_fig2_top(const ExperimentConfig& cfg) {
  Table t;
  t.name = "fig2_top";
  t.columns = {"r", "gamma", "n", "depth", "worst_case_bias", "bias_ps1", "bias_ps2", "circuit_samples"};
  for (const auto& np : noise_grid(cfg))
    for (int n : cfg.n_values)
      for (int d : cfg.depths) {
        FrameEnsemble ens{n, d, cfg.ensemble, cfg.topology, false};
        ExactFrameOptions o;
        o.enumerate = false;
        o.circuit_samples = cfg.circuit_samples;
        o.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n * 64 + d), "circuits");
        o.threads = cfg.threads;
        // Same circuits and the same seed for both: only the noise differs.
        const FrameSpectrum ideal = exact_f(ens, NoiseModel::noiseless(), o);
        const FrameSpectrum noisy = exact_f(ens, np.noise, o);
        const double ps1 = worst_case_bias_by_support(ideal, noisy, 1);
        const double ps2 = n >= 2 ? worst_case_bias_by_support(ideal, noisy, 2) : std::nan("");
        t.add({tag_of(np.r), cell(np.noise.gamma), cell(n), cell(d), cell(worst_case_bias(ideal, noisy)), cell(ps1), cell(ps2),
               cell(cfg.circuit_samples)});
      }
  return {{std::move(t)}};
}

ExperimentResult run_fig2_bottom(const ExperimentConfig& cfg) { return fidelity_grid(cfg, "fig2_bottom"); }

ExperimentResult run_fig2_inset(const ExperimentConfig& cfg) { return fidelity_grid(cfg, "fig2_inset"); }

ExperimentResult run_fig3(const ExperimentConfig& cfg) {
  Table t;
  t.name = "fig3";
  t.columns = {"r",        "n",        "depth",    "method",   "chi", "max_rank", "rel_worst_case_bias",
               "floor",    "residual", "relative_residual", "sweeps", "labels"};
  std::uint64_t point = 0;
  const int chi_max = *std::max_element(cfg.chi.begin(), cfg.chi.end());
  for (const auto& np : noise_grid(cfg))
    for (int n : cfg.n_values)
      for (int d : cfg.depths) {
        ++point;
        const AcquisitionSpec cal = calibration_spec(n, d, cfg.ensemble, cfg.topology, np.noise, cfg.cal_shots,
                                                     point_seed(cfg.seed, point, "calibration"));
        const BootstrappedFrame bf =
            calibrate_with_bootstrap(cal, cfg.bootstrap, point_seed(cfg.seed, point, "bootstrap"), cfg.threads);
        const FrameSpectrum& fhat = bf.frame;
        const auto labels = guarded_labels(fhat);
        const double floor = labels.empty() ? 0.0 : bootstrap_floor(fhat, bf.replicates, labels);
        const double norm = fhat.f.norm();
        auto emit = [&](const std::string& method, int chi, const TensorTrain& tt, int sweeps) {
          const FrameSpectrum approx = FrameSpectrum::dense(tt.to_dense(), FrameProvenance::tt_fit);
          const double bias = worst_case_bias_over(fhat, approx, labels);
          const double res = (approx.f - fhat.f).norm();
          t.add({tag_of(np.r), cell(n), cell(d), method, cell(chi), cell(tt.max_rank()), cell(bias), cell(floor), cell(res),
                 cell(res / norm), cell(sweeps), cell(static_cast<std::uint64_t>(labels.size()))});
        };
        const TensorTrain init = TensorTrain::product(std::vector<std::array<double, 2>>(sz(n), {1.0, 1.0 / 3.0}));
        for (int chi : cfg.chi) {
          Truncation tr;
          tr.max_rank = chi;
          emit("tt_svd", chi, tt_svd(fhat.f, tr).tt, 0);
          MalsOptions mo;
          mo.max_rank = chi;
          const MalsResult m = mals_fit(fhat.f, init, mo);
          emit("mals", chi, m.tt, m.sweeps);
        }
        // Rank-adaptive run: cap at twice the largest grid rank, drop singular
        // values below the statistical noise level of f_hat.
        MalsOptions mo;
        mo.max_rank = 2 * chi_max;
        mo.abs_cutoff = fhat.se.norm();
        const MalsResult m = mals_fit(fhat.f, init, mo);
        emit("mals_adaptive", 2 * chi_max, m.tt, m.sweeps);
      }
  return {{std::move(t)}};
}

ExperimentResult run_fig4_overlap(const ExperimentConfig& cfg) {
  constexpr int kBlock = 4;
  constexpr int kN = 8;
  Table left;
  left.name = "fig4_bias";
  left.columns = {"depth", "frame", "worst_case_bias_vs_global"};
  Table right;
  right.name = "fig4_overlap";
  right.columns = {"depth", "target", "frame", "estimate", "stderr", "exact", "abs_error"};
  const NoiseModel& noise = cfg.noise;
  noise.validate(kN);
  const FrameSpectrum g4 = ideal_f(kBlock, IdealEnsemble::global_clifford);
  const FrameSpectrum global = g4.tensor(g4);
  const DenseState psi = overlap_trial_state(cfg.theta);
  const std::vector<std::pair<std::string, DenseState>> targets{
      {"psi_T", psi}, {"phi_1", overlap_walker_state(1)}, {"phi_2", overlap_walker_state(2)}};
  for (int d : cfg.depths) {
    FrameSpectrum blocks[2];
    for (int b = 0; b < 2; ++b) {
      const AcquisitionSpec cal =
          calibration_spec(kBlock, d, cfg.ensemble, "brickwork-open", restrict_readout(noise, b * kBlock, kBlock),
                           cfg.cal_shots, derive_seed(cfg.seed, static_cast<std::uint64_t>(d * 2 + b), "calibration"));
      CalibrationOptions co;
      co.threads = cfg.threads;
      blocks[b] = calibrate(cal, co);
    }
    const FrameSpectrum mitigated = blocks[0].tensor(blocks[1]);
    const FrameSpectrum f4 = noiseless_frame(kBlock, d, cfg.ensemble, "brickwork-open");
    const FrameSpectrum noiseless = f4.tensor(f4);
    left.add({cell(d), "noiseless", cell(worst_case_bias(global, noiseless))});
    left.add({cell(d), "noisy", cell(worst_case_bias(global, mitigated))});

    AcquisitionSpec spec;
    spec.header.n = kN;
    spec.header.depth = d;
    spec.header.ensemble = cfg.ensemble;
    spec.header.topology_id = "blocks-4";
    spec.header.input_state = "amplitudes:psi_T";
    spec.header.master_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(d), "estimation");
    spec.header.shots = cfg.shots;
    spec.header.noise_digest = noise_digest(noise);
    spec.input = psi;
    spec.noise = noise;
    std::vector<EstimationJob> jobs;
    std::vector<double> exact;
    for (const auto& [name, state] : targets) {
      const Observable obs = Observable::pure_target(state, name);
      jobs.push_back({obs, &mitigated, "mitigated", override_guard()});
      jobs.push_back({obs, &noiseless, "unmitigated", {}});
      jobs.push_back({obs, &global, "global_clifford", {}});
      for (int i = 0; i < 3; ++i) exact.push_back(exact_expectation(obs, psi));
    }
    const auto est = estimate_online(spec, jobs, 0, cfg.shots, cfg.threads);
    for (std::size_t i = 0; i < est.size(); ++i)
      right.add({cell(d), est[i].observable, est[i].frame, cell(est[i].value), cell(est[i].se), cell(exact[i]),
                 cell(std::abs(est[i].value - exact[i]))});
  }
  return {{std::move(left), std::move(right)}};
}

ExperimentResult run_fig5_sim(const ExperimentConfig& cfg) {
  constexpr int kBins = 40;
  Table eig;
  eig.name = "fig5_eigenvalues";
  eig.columns = {"r", "depth", "support", "k", "f_hat", "stderr", "f_noiseless", "z_score"};
  Table hist;
  hist.name = "fig5_histograms";
  hist.columns = {"r", "depth", "support", "bin_low", "bin_high", "count"};
  Table cv;
  cv.name = "fig5_crossval";
  cv.columns = {"r", "depth", "target", "frame", "shots", "estimate", "stderr", "exact", "abs_error"};
  std::uint64_t point = 0;
  for (const auto& np : noise_grid(cfg))
    for (int n : cfg.n_values)
      for (int d : cfg.depths) {
        ++point;
        const std::uint64_t total = cfg.cal_shots;
        const std::uint64_t cal_count = total * 9 / 10;
        AcquisitionSpec spec = calibration_spec(n, d, cfg.ensemble, cfg.topology, np.noise, total,
                                                point_seed(cfg.seed, point, "acquisition"));
        const Topology topo = Topology::from_id(n, cfg.topology);
        const auto labels = histogram_labels(n);
        // First 90% of the shots: frame estimate and per-label histograms.
        const auto chunks = static_cast<std::size_t>((cal_count + kChunk - 1) / kChunk);
        std::vector<FrameAccumulator> parts(chunks, FrameAccumulator(n));
        std::vector<std::vector<std::uint64_t>> counts(chunks, std::vector<std::uint64_t>(labels.size() * kBins));
        parallel_chunks(chunks, cfg.threads, [&](std::size_t c) {
          const std::uint64_t end = std::min<std::uint64_t>(cal_count, (c + 1) * kChunk);
          for (std::uint64_t i = c * kChunk; i < end; ++i) {
            const ShadowRecord r = simulate_shot(spec, topo, i);
            const Eigen::VectorXd phi = phi_dense(r.circuit, r.z);
            parts[c].add(phi);
            for (std::size_t l = 0; l < labels.size(); ++l) {
              const double v = phi[static_cast<Eigen::Index>(labels[l])];
              const int bin = std::clamp(static_cast<int>(std::floor((v + 1.0) / 2.0 * kBins)), 0, kBins - 1);
              ++counts[c][l * kBins + static_cast<std::size_t>(bin)];
            }
          }
        });
        FrameAccumulator acc(n);
        for (const auto& p : parts) acc.merge(p);
        const FrameSpectrum fhat = acc.result();
        const FrameSpectrum fid = noiseless_frame(n, d, cfg.ensemble, cfg.topology);
        for (std::size_t l = 0; l < labels.size(); ++l) {
          const auto k = labels[l];
          const double z = fhat.stderr_at(k) > 0 ? (fhat.value(k) - fid.value(k)) / fhat.stderr_at(k) : std::nan("");
          eig.add({tag_of(np.r), cell(d), cell(static_cast<int>(l + 1)), bitstring(k, n), cell(fhat.value(k)),
                   cell(fhat.stderr_at(k)), cell(fid.value(k)), cell(z)});
          for (int b = 0; b < kBins; ++b) {
            std::uint64_t cnt = 0;
            for (const auto& part : counts) cnt += part[l * kBins + static_cast<std::size_t>(b)];
            hist.add({tag_of(np.r), cell(d), cell(static_cast<int>(l + 1)), cell(-1.0 + 2.0 * b / kBins),
                      cell(-1.0 + 2.0 * (b + 1) / kBins), cell(cnt)});
          }
        }
        // Remaining 10%: fidelity with |0^n> and with |0> on the first qubit.
        const std::uint64_t hold = total - cal_count;
        if (hold == 0) continue;
        std::vector<std::pair<double, PauliString>> marginal{{0.5, PauliString(n)}, {0.5, PauliString(n)}};
        marginal[1].second.set(0, Pauli::Z);
        const Observable zero = Observable::pure_target(DenseState(n), "zero_state");
        const Observable marg = Observable::pauli_sum(marginal, "zero_marginal");
        const std::vector<EstimationJob> jobs{{zero, &fhat, "mitigated", override_guard()},
                                              {zero, &fid, "unmitigated", {}},
                                              {marg, &fhat, "mitigated", override_guard()},
                                              {marg, &fid, "unmitigated", {}}};
        const auto values = evaluate_online(spec, jobs, cal_count, hold, cfg.threads);
        std::vector<std::uint64_t> sizes;
        for (std::uint64_t s = 100; s < hold; s *= 10) sizes.push_back(s);
        sizes.push_back(hold);
        for (std::size_t j = 0; j < jobs.size(); ++j)
          for (std::uint64_t s : sizes) {
            const Estimate e = summarize(std::span<const double>(values[j]).first(static_cast<std::size_t>(s)),
                                         jobs[j].observable.id, jobs[j].frame_tag);
            cv.add({tag_of(np.r), cell(d), e.observable, e.frame, cell(s), cell(e.value), cell(e.se), cell(1.0),
                    cell(std::abs(e.value - 1.0))});
          }
      }
  return {{std::move(eig), std::move(hist), std::move(cv)}};
}

ExperimentResult run_custom(const ExperimentConfig& cfg) {
  Table est;
  est.name = "custom_estimates";
  est.columns = {"r", "n", "depth", "observable", "frame", "estimate", "stderr", "exact", "abs_error", "shots"};
  Table bias;
  bias.name = "custom_bias";
  bias.columns = {"r", "n", "depth", "worst_case_bias", "worst_case_bias_guarded", "flagged"};
  std::uint64_t point = 0;
  for (const auto& np : noise_grid(cfg))
    for (int n : cfg.n_values)
      for (int d : cfg.depths) {
        ++point;
        const AcquisitionSpec cal = calibration_spec(n, d, cfg.ensemble, cfg.topology, np.noise, cfg.cal_shots,
                                                     point_seed(cfg.seed, point, "calibration"));
        CalibrationOptions co;
        co.threads = cfg.threads;
        const FrameSpectrum fhat = calibrate(cal, co);
        const FrameSpectrum fid = noiseless_frame(n, d, cfg.ensemble, cfg.topology);
        const auto guarded = guarded_labels(fhat);
        bias.add({tag_of(np.r), cell(n), cell(d), cell(worst_case_bias(fid, fhat)),
                  cell(worst_case_bias_over(fid, fhat, guarded)), cell(static_cast<std::uint64_t>(fhat.flagged().size()))});
        if (cfg.observables.empty() || cfg.shots == 0) continue;
        AcquisitionSpec spec = cal;
        spec.header.input_state = cfg.input_state;
        spec.header.shots = cfg.shots;
        spec.header.master_seed = point_seed(cfg.seed, point, "estimation");
        spec.input = make_input_state(cfg.input_state, n);
        std::vector<EstimationJob> jobs;
        std::vector<double> exact;
        for (const auto& text : cfg.observables) {
          Observable obs = text == "target" ? Observable::pure_target(spec.input, "target") : Observable::parse(text);
          if (obs.id.empty()) obs.id = text;
          if (obs.num_qubits() != n) throw std::invalid_argument("custom: observable " + text + " has the wrong length");
          jobs.push_back({obs, &fhat, "mitigated", override_guard()});
          jobs.push_back({obs, &fid, "unmitigated", {}});
          exact.push_back(exact_expectation(obs, spec.input));
          exact.push_back(exact.back());
        }
        const auto e = estimate_online(spec, jobs, 0, cfg.shots, cfg.threads);
        for (std::size_t i = 0; i < e.size(); ++i)
          est.add({tag_of(np.r), cell(n), cell(d), e[i].observable, e[i].frame, cell(e[i].value), cell(e[i].se),
                   cell(exact[i]), cell(std::abs(e[i].value - exact[i])), cell(e[i].shots)});
      }
  return {{std::move(est), std::move(bias)}};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentId::fig2_top: return run_fig2_top(cfg);
    case ExperimentId::fig2_bottom: return run_fig2_bottom(cfg);
    case ExperimentId::fig2_inset: return run_fig2_inset(cfg);
    case ExperimentId::fig3: return run_fig3(cfg);
    case ExperimentId::fig4_overlap: return run_fig4_overlap(cfg);
    case ExperimentId::fig5_sim: return run_fig5_sim(cfg);
    case ExperimentId::custom: return run_custom(cfg);
  }
  throw std::invalid_argument("run_experiment: unknown id");
}

std::vector<std::string> write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<std::string> paths;
  for (const auto& t : result.tables) {
    const std::string path = (std::filesystem::path(cfg.out_dir) / (t.name + ".csv")).string();
    write_table(path, t, cfg.digest());
    paths.push_back(path);
  }
  return paths;
}

}  // namespace rss
