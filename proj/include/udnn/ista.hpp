#pragma once

#include <string>

#include "udnn/signal_model.hpp"
#include "udnn/split_complex.hpp"

namespace udnn {

// ISTA hyperparameters. theta = lambda * step is the soft threshold; step is
// the gradient step size rho = 1/L.
struct IstaConfig {
  double lambda = 0.01;
  double step = 0.0;
  double tol = 1e-6;
  int max_iter = 100000;

  double theta() const { return lambda * step; }
  void validate(double lipschitz) const;

  // step = 1/L, the largest admissible value.
  static IstaConfig for_model(const MeasurementModel& model, double lambda,
                              double tol = 1e-6, int max_iter = 100000);
};

struct IstaResult {
  SplitComplexVector x_hat;
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
};

// Per-part shrinkage: every real part and every imaginary part is mapped
// independently by sign(v) * max(|v| - theta, 0). Mirrors the network's
// nonlinear layer so that ISTA and the initialized network are the same
// function.
SplitComplexVector soft_threshold(const SplitComplexVector& z, double theta);

// One iteration of Eq-style ISTA: S_theta(x - rho A^H (A x - y)).
SplitComplexVector ista_step(const SplitComplexVector& x_prev,
                             const SplitComplexVector& y,
                             const MeasurementModel& model,
                             const IstaConfig& cfg);

// Full solve from x = 0. Stops when
//   ||x_k - x_{k-1}|| <= tol * max(||x_{k-1}||, 1e-12)
// or at max_iter (reported via converged=false, not an error).
IstaResult ista_solve(const SplitComplexVector& y,
                      const MeasurementModel& model, const IstaConfig& cfg);

// (1/2)||y - A x||^2 + lambda * (sum |x_R| + sum |x_I|); the l1 norm over the
// stacked real/imaginary vector matches the per-part threshold convention.
double lasso_objective(const SplitComplexVector& x,
                       const SplitComplexVector& y,
                       const MeasurementModel& model, double lambda);

// lambda = 0.01 in noiseless mode; sigma_w * sqrt(2 ln n) in noisy mode.
enum class LambdaMode { kNoiseless, kNoisy };
double select_lambda(LambdaMode mode, double sigma_w, int n);

// Fixed-point (KKT) residuals of the LASSO optimality conditions, evaluated
// per real/imaginary part:
//   active part v != 0:  |g + lambda sign(v)| <= 10 tol lambda
//   zero part:           |g| <= lambda (1 + 10 tol)
// where g is the matching part of [A^H (A x - y)].
struct KktReport {
  double max_active_residual = 0.0;  // max |g + lambda sign(v)| over parts
  double max_zero_residual = 0.0;    // max |g| over zero parts
  double active_budget = 0.0;
  double zero_budget = 0.0;
  bool satisfied() const {
    return max_active_residual <= active_budget &&
           max_zero_residual <= zero_budget;
  }
};

KktReport check_kkt(const SplitComplexVector& x_hat,
                    const SplitComplexVector& y,
                    const MeasurementModel& model, double lambda, double tol);

}  // namespace udnn
