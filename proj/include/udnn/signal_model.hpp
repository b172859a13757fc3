#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "udnn/split_complex.hpp"

namespace udnn {

// OFDM frame geometry: N_d data sub-carriers, N_p cyclic-prefix carriers,
// N_b blocks, sample period T. One OFDM symbol spans N_u T = (N_d + N_p) T.
struct OfdmConfig {
  int n_data = 4;
  int n_cp = 1;
  int n_blocks = 4;
  double sample_period = 1e-6;

  int n_units() const { return n_data + n_cp; }
  // Length of the vectorized measurement y.
  int vec_size() const { return n_data * n_blocks; }

  void validate() const;
};

// Ground-truth channel: J paths of (complex gain, normalized delay in [0,1),
// normalized Doppler in [0,1)).
struct PathSet {
  std::vector<std::complex<double>> gains;
  std::vector<double> delays;
  std::vector<double> dopplers;

  std::size_t size() const { return gains.size(); }
  void validate() const;
};

// Uniform discretization of the delay/Doppler unit square. Columns of the
// dictionary are indexed delay-major: column = delay_idx * G_f + doppler_idx.
struct FrequencyGrid {
  std::vector<double> delay_points;
  std::vector<double> doppler_points;

  int size() const {
    return static_cast<int>(delay_points.size() * doppler_points.size());
  }
  int column_of(int delay_idx, int doppler_idx) const {
    return delay_idx * static_cast<int>(doppler_points.size()) + doppler_idx;
  }
  void validate() const;
};

FrequencyGrid build_grid(int g_delay, int g_doppler);

// The linearized measurement setup: dictionary Phi (N x M), symbol vector
// b-hat, A = diag(b-hat) Phi and its Lipschitz constant L = lambda_max(A^H A).
struct MeasurementModel {
  OfdmConfig config;
  FrequencyGrid grid;
  SplitComplexVector symbols;
  SplitComplexMatrix dictionary;
  SplitComplexMatrix a_matrix;
  double lipschitz = 0.0;
  // Digest over (config, grid, symbols); model checkpoints record it so a
  // network trained against one grid cannot silently run against another.
  std::uint64_t fingerprint = 0;

  int n() const { return static_cast<int>(a_matrix.rows()); }
  int m() const { return static_cast<int>(a_matrix.cols()); }
};

// s(f): entry n = e^{i 2 pi n f}, n = 0..n_blocks-1. f must lie in [0,1).
SplitComplexVector steering_doppler(double f, int n_blocks);
// d(tau): entry k = e^{i 2 pi k tau}, k = 0..n_data-1.
SplitComplexVector steering_delay(double tau, int n_data);

// 2D atom a(tau, f) = conj(d(tau)) (x) s(f); entry at position
// k * n_blocks + n equals e^{i 2 pi (n f - k tau)}.
SplitComplexVector atom(double tau, double f, const OfdmConfig& config);

MeasurementModel build_measurement_model(const OfdmConfig& config,
                                         const FrequencyGrid& grid,
                                         const SplitComplexVector& symbols);

// Convenience: all-ones symbols (the default of the experiments).
MeasurementModel build_measurement_model(const OfdmConfig& config,
                                         const FrequencyGrid& grid);

// Sparse coefficient vector for on-grid paths: zero except at the column of
// each path's (tau, f) pair, which holds that path's gain. Off-grid paths or
// colliding supports are rejected.
SplitComplexVector synthesize_ground_truth_x(const PathSet& paths,
                                             const FrequencyGrid& grid);

// y = A x + w, with w circularly symmetric complex Gaussian: real and
// imaginary parts i.i.d. N(0, sigma_w^2 / 2). Deterministic given rng_seed.
SplitComplexVector synthesize_measurement(const SplitComplexVector& x,
                                          const MeasurementModel& model,
                                          double sigma_w,
                                          std::uint64_t rng_seed);

// Measurement for arbitrary (possibly off-grid) paths, straight from the
// atoms: y = sum_l c_l a(tau_l, f_l) scaled by the symbols, plus noise.
SplitComplexVector synthesize_measurement_offgrid(const PathSet& paths,
                                                  const MeasurementModel& model,
                                                  double sigma_w,
                                                  std::uint64_t rng_seed);

// Mean squared magnitude (1/N)||y||^2; the SNR reference power r is this
// value of the noiseless measurement.
double mean_power(const SplitComplexVector& y);

// sigma_w = sqrt(signal_power / 10^(snr_db / 10)).
double snr_to_sigma(double snr_db, double signal_power);

// A physical path before normalization: complex gain, delay in seconds,
// Doppler in Hz.
struct RawPath {
  std::complex<double> gain;
  double delay_s = 0.0;
  double doppler_hz = 0.0;
};

// Matched-filter output computed by composite-Simpson quadrature of the full
// integrand, keeping e^{i 2 pi fbar t} inside the integral (no constant-phase
// approximation). Entry (n, k) is the output of block n, sub-carrier k.
// Used to bound the approximation error of the closed form below.
SplitComplexMatrix matched_filter_oracle(const std::vector<RawPath>& paths,
                                         const OfdmConfig& config,
                                         const SplitComplexMatrix& symbols_block,
                                         int n_quad);

// Closed-form matched-filter output under the constant-phase approximation:
// y_n(k) = bhat_n(k) sum_l c_l e^{i 2 pi n f_l} e^{-i 2 pi k tau_l} with
// normalized tau_l = delay / (N_d T), f_l = doppler * N_u T.
SplitComplexMatrix matched_filter_closed_form(
    const std::vector<RawPath>& paths, const OfdmConfig& config,
    const SplitComplexMatrix& symbols_block);

// JSON round-trip for the model; the dictionary is regenerated on load from
// (config, grid, symbols) rather than stored.
std::string measurement_model_to_json(const MeasurementModel& model);
MeasurementModel measurement_model_from_json(const std::string& text);
void save_measurement_model(const MeasurementModel& model,
                            const std::string& path);
MeasurementModel load_measurement_model(const std::string& path);

}  // namespace udnn
