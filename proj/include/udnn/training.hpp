#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "udnn/model.hpp"
#include "udnn/signal_model.hpp"

namespace udnn {

struct SampleMeta {
  std::uint64_t seed = 0;
  bool noiseless = true;
  double snr_db = 0.0;
  int j_paths = 0;
};

struct TrainingSample {
  SplitComplexVector y;
  SplitComplexVector x;
  SampleMeta meta;
};

// Samples stored column-contiguous per row (one row per sample) so batches
// can be processed as matrix products.
struct Dataset {
  RealMatrix y_re, y_im;  // P x N
  RealMatrix x_re, x_im;  // P x M
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint32_t> j_paths;
  bool noiseless = true;
  double snr_db = 0.0;
  std::uint64_t base_seed = 0;
  std::uint64_t grid_fingerprint = 0;

  int p() const { return static_cast<int>(y_re.rows()); }
  int n() const { return static_cast<int>(y_re.cols()); }
  int m() const { return static_cast<int>(x_re.cols()); }

  TrainingSample sample(int idx) const;
};

struct TrainConfig {
  int n_samples = 100000;
  int epochs = 50;
  int batch_size = 256;
  int j_max = 2;
  bool noiseless = true;   // the paper trains on noiseless data
  double snr_db = 0.0;     // used when noiseless == false
  std::uint64_t seed = 1;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double val_fraction = 0.05;

  void validate() const;
};

// P samples: J uniform on {1..j_max}, J distinct uniform grid locations,
// gain parts i.i.d. uniform on [-1, 1], y = A x (+ noise when configured,
// with sigma_w calibrated per instance from the noiseless mean power).
// Deterministic given cfg.seed.
Dataset generate_dataset(const MeasurementModel& model, const TrainConfig& cfg);

// Variant with explicit sample count and seed (validation sets, test sets).
Dataset generate_dataset(const MeasurementModel& model, const TrainConfig& cfg,
                         int n_samples, std::uint64_t seed);

// ||x_hat.re - x.re||^2 + ||x_hat.im - x.im||^2 for one sample.
double loss_mse_split(const SplitComplexVector& x_hat,
                      const SplitComplexVector& x);

// Gradients of loss_mse_split w.r.t. every parameter of every layer.
struct LayerGradients {
  SplitComplexMatrix w1;  // dW1 blocks
  SplitComplexMatrix w2;  // dW2 blocks
  double theta = 0.0;
};

struct GradientSet {
  std::vector<LayerGradients> layers;

  static GradientSet zero_like(const UdnnModel& model);
  void add_scaled(const GradientSet& other, double scale);
  bool all_finite() const;
};

// Exact reverse-mode gradients for one sample, propagating through the
// per-part soft threshold with derivative 1 where |v| > theta and 0
// otherwise (including at |v| == theta).
GradientSet backward(const UdnnModel& model, const ForwardTrace& trace,
                     const SplitComplexVector& y,
                     const SplitComplexVector& x_true);

// Batched forward/backward used by the training loop; gradients are the mean
// over the batch and equal the mean of per-sample backward() results.
struct BatchTrace {
  std::vector<RealMatrix> x_in_re, x_in_im;  // per layer, B x M
  std::vector<RealMatrix> z_re, z_im;        // per layer, B x M
  RealMatrix out_re, out_im;                 // B x M
};

void forward_batch_traced(const UdnnModel& model, const RealMatrix& y_re,
                          const RealMatrix& y_im, BatchTrace& trace);

// Returns the mean per-sample loss; grads receives the mean gradients.
double backward_batch(const UdnnModel& model, const BatchTrace& trace,
                      const RealMatrix& y_re, const RealMatrix& y_im,
                      const RealMatrix& x_re, const RealMatrix& x_im,
                      GradientSet& grads);

// Adam accumulators; shapes mirror the model parameters.
struct AdamTensors {
  SplitComplexMatrix m_w1, v_w1;
  SplitComplexMatrix m_w2, v_w2;
  double m_theta = 0.0, v_theta = 0.0;
};

struct AdamState {
  std::vector<AdamTensors> layers;
  std::int64_t t = 0;
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  static AdamState for_model(const UdnnModel& model, double lr, double beta1,
                             double beta2, double eps);
};

// Standard bias-corrected Adam update; thresholds are projected to >= 0
// afterwards.
void adam_step(UdnnModel& model, const GradientSet& grads, AdamState& state);

struct TrainLogRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_mse_db = 0.0;
  double wall_time_s = 0.0;
};

struct TrainingLog {
  std::vector<TrainLogRow> rows;
  void write_csv(const std::string& path, std::uint64_t fingerprint) const;
};

struct TrainOptions {
  // When nonempty, a resumable state file is written after every epoch and
  // training resumes from it when it already exists.
  std::string state_path;
  bool quiet = true;
};

struct TrainOutcome {
  UdnnModel best_model;
  UdnnModel final_model;
  TrainingLog log;
  int best_epoch = 0;
  double best_val_mse_db = 0.0;
  int start_epoch = 1;  // > 1 when resumed
};

// Mini-batch Adam over the dataset. Epoch 0 logs the untouched
// initialization (its training loss equals the K-step ISTA loss). The
// validation split is generated from a seed stream disjoint from the
// training data. Deterministic given cfg.seed.
TrainOutcome train(const UdnnModel& init_model, const Dataset& dataset,
                   const TrainConfig& cfg, const MeasurementModel& measurement,
                   const TrainOptions& options = {});

using Estimator = std::function<SplitComplexVector(const SplitComplexVector&)>;

// Normalized MSE in dB: 10 log10(mean_p ||xhat_p - x_p||^2 / ||x_p||^2).
// Samples with ||x|| = 0 are excluded and counted. Floored at -300 dB.
double evaluate_mse_db(const Estimator& estimator, const Dataset& test_set,
                       int* excluded_count = nullptr);

// Dataset container: magic "UDNNDAT1", JSON header, packed float64 blocks.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace udnn
