#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "udnn/signal_model.hpp"
#include "udnn/training.hpp"
#include "udnn/validate.hpp"

namespace udnn {

// Every knob of the experiment harness; defaults reproduce the reference
// setup (N_d = N_b = 4, 6x6 grid, J = 2, K = 5, all-ones symbols,
// lambda_init = 1, Adam at 1e-3).
struct ExperimentConfig {
  OfdmConfig ofdm;
  int grid_delay = 6;
  int grid_doppler = 6;
  int j_paths = 2;
  int trials = 1000;
  std::vector<double> snr_list_db = {0, 5, 10, 15, 20, 25, 30};
  std::uint64_t seed = 20250101;
  int k_layers = 5;
  double init_lambda = 1.0;

  double ista_lambda = 0.01;  // noiseless weight factor
  double ista_tol = 1e-6;
  int ista_max_iter = 100000;

  TrainConfig train;

  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency; timed sections stay serial
  bool force = false;

  void validate() const;
  // Digest over the determinism-relevant fields (not output_dir / threads /
  // force); embedded in every output file.
  std::uint64_t fingerprint() const;
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;
};

struct ResultRecord {
  std::string method;
  bool has_snr = false;
  double snr_db = 0.0;
  double mse_db = 0.0;
  double mean_iterations_or_layers = 0.0;
  double wall_time_s = 0.0;
  int trials = 0;
  std::uint64_t config_fingerprint = 0;
};

std::string results_to_json(const std::vector<ResultRecord>& records);

struct ExampleOutcome {
  std::vector<int> true_support;
  std::vector<int> ista_support;
  std::vector<int> udnn_support;
  bool used_trained_model = false;
  std::string csv_path;
};

// One seeded noiseless instance through both methods; writes the stem-plot
// CSV (grid_index, delay, doppler, true/ista/udnn re+im). Falls back to the
// ISTA-initialized network with a warning when no trained model is given.
ExampleOutcome cmd_example(const ExperimentConfig& cfg,
                           const std::string& model_path);

struct BenchOutcome {
  ResultRecord ista;
  ResultRecord udnn;
  std::string table_path;
};

// Accuracy/iterations/runtime comparison over seeded noiseless trials.
// Matrices and instances are prebuilt; the timed estimation loops run on a
// single thread.
BenchOutcome cmd_bench(const ExperimentConfig& cfg,
                       const std::string& model_path);

struct SweepPoint {
  double snr_db = 0.0;
  double ista_mse_db = 0.0;
  double udnn_mse_db = 0.0;
};

struct SweepOutcome {
  std::vector<SweepPoint> points;
  // worst adjacent increase (dB) per method; monotone when <= slack
  double ista_worst_increase_db = 0.0;
  double udnn_worst_increase_db = 0.0;
  std::string csv_path;
};

// MSE versus SNR for both methods. Noise is common-random-number coupled
// across SNR points (each trial reuses its noise direction, scaled to the
// target SNR) so the curves are comparable at the configured trial counts.
SweepOutcome cmd_snr_sweep(const ExperimentConfig& cfg,
                           const std::string& model_path);

struct TrainCmdOutcome {
  std::string model_path;
  std::string log_path;
  TrainOutcome outcome;
};

// Dataset generation, ISTA initialization (lambda = init_lambda), training,
// best-checkpoint save. Writes a resumable state file after every epoch;
// pass resume=true to continue an interrupted run.
TrainCmdOutcome cmd_train(const ExperimentConfig& cfg, bool resume,
                          bool quiet = false);

// Runs the invariant suite and writes the JSON report; returns the report.
ValidateReport cmd_validate(const ExperimentConfig& cfg,
                            const ValidateOptions& options);

// Refuses to overwrite path when it carries a different config fingerprint
// (unless force). Files written by this harness embed the fingerprint either
// as a "# config_fingerprint=..." comment line or a JSON field.
void ensure_output_compatible(const std::string& path, std::uint64_t fingerprint,
                              bool force);

}  // namespace udnn
