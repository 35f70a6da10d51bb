#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rss/calibration.hpp"
#include "rss/config.hpp"
#include "rss/estimation.hpp"
#include "rss/simulator.hpp"

namespace rss {

/// Tidy table; cells are preformatted so output is byte-stable.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
};

/// Fixed formatting of numbers in tables ("%.10g"; nan/inf spelled out).
std::string cell(double x);
std::string cell(std::uint64_t x);
std::string cell(int x);

/// CSV preceded by "# config_digest=..." and "# code_version=..." lines.
void write_table(const std::string& path, const Table& t, const std::string& config_digest);

/// One noise model per grid value of r (GUE noise with gamma set to reach r),
/// or the configured model alone when no r grid is given (r reported as NaN).
struct NoisePoint {
  double r = std::numeric_limits<double>::quiet_NaN();
  NoiseModel noise;
};
std::vector<NoisePoint> noise_grid(const ExperimentConfig& cfg);
/// GUE noise with gamma calibrated to mean CNOT infidelity r.
NoiseModel incoherent_noise(const NoiseModel& base, double r, int gamma_samples, std::uint64_t seed);

/// Random target state of the named ensemble ("haar" or "stabilizer").
DenseState random_target(const std::string& ensemble, int n, std::uint64_t seed);

/// Exact spectrum of the noiseless circuit ensemble (channel-level TT, dense).
FrameSpectrum noiseless_frame(int n, int depth, Ensemble ensemble, const std::string& topology_id);

/// One observable evaluated with one frame on a stream of shots.
struct EstimationJob {
  Observable observable;
  const FrameSpectrum* frame = nullptr;
  std::string frame_tag;
  DualOptions options;
};

/// Simulates shots [first, first + count) of `spec` and returns the dual
/// values of every job, one vector per job in shot order. The records are not
/// kept. Independent of the thread count.
std::vector<std::vector<double>> evaluate_online(const AcquisitionSpec& spec, std::span<const EstimationJob> jobs,
                                                 std::uint64_t first, std::uint64_t count, int threads = 0);
std::vector<Estimate> estimate_online(const AcquisitionSpec& spec, std::span<const EstimationJob> jobs,
                                      std::uint64_t first, std::uint64_t count, int threads = 0);

/// Calibration spec: |0^n> input, shots [0, shots).
AcquisitionSpec calibration_spec(int n, int depth, Ensemble ensemble, const std::string& topology_id,
                                 const NoiseModel& noise, std::uint64_t shots, std::uint64_t seed);

/// Labels k != 0 whose estimate clears the spectrum guard |f_k| > factor * se_k.
std::vector<std::uint64_t> guarded_labels(const FrameSpectrum& f, double factor = 10.0);

/// Statistical floor of a relative worst-case bias: the q-quantile over
/// bootstrap replicates of max_k |f_b(k) / f(k) - 1| on `labels`.
double bootstrap_floor(const FrameSpectrum& f, const Eigen::MatrixXd& replicates, std::span<const std::uint64_t> labels,
                       double quantile = 0.95);

/// |Psi_T>, |phi_1>, |phi_2> of the 8-qubit overlap task.
DenseState overlap_trial_state(double theta);
DenseState overlap_walker_state(int which);

/// Mean and standard error of a sample.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(std::span<const double> x);

struct ExperimentResult {
  std::vector<Table> tables;
};

/// Runs the driver selected by cfg.experiment.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Writes every table as <out_dir>/<table name>.csv; returns the paths.
std::vector<std::string> write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result);

ExperimentResult run_fig2_top(const ExperimentConfig& cfg);
ExperimentResult run_fig2_bottom(const ExperimentConfig& cfg);
ExperimentResult run_fig2_inset(const ExperimentConfig& cfg);
ExperimentResult run_fig3(const ExperimentConfig& cfg);
ExperimentResult run_fig4_overlap(const ExperimentConfig& cfg);
ExperimentResult run_fig5_sim(const ExperimentConfig& cfg);
ExperimentResult run_custom(const ExperimentConfig& cfg);

}  // namespace rss
