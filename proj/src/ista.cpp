#include "udnn/ista.hpp"

#include <cmath>

#include "udnn/errors.hpp"

namespace udnn {

void IstaConfig::validate(double lipschitz) const {
  if (lambda < 0) throw DomainError("IstaConfig: lambda must be >= 0");
  if (!(step > 0)) throw DomainError("IstaConfig: step must be > 0");
  if (!(tol > 0)) throw DomainError("IstaConfig: tol must be > 0");
  if (max_iter < 1) throw DomainError("IstaConfig: max_iter must be >= 1");
  if (step * lipschitz > 1.0 + 1e-9)
    throw DomainError("IstaConfig: step exceeds 1/L");
}

IstaConfig IstaConfig::for_model(const MeasurementModel& model, double lambda,
                                 double tol, int max_iter) {
  IstaConfig cfg;
  cfg.lambda = lambda;
  cfg.step = 1.0 / model.lipschitz;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.validate(model.lipschitz);
  return cfg;
}

namespace {

inline double shrink(double v, double theta) {
  if (v > theta) return v - theta;
  if (v < -theta) return v + theta;
  return 0.0;
}

}  // namespace

SplitComplexVector soft_threshold(const SplitComplexVector& z, double theta) {
  if (theta < 0) throw DomainError("soft_threshold: theta must be >= 0");
  SplitComplexVector x = z;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.re[i] = shrink(x.re[i], theta);
    x.im[i] = shrink(x.im[i], theta);
  }
  return x;
}

SplitComplexVector ista_step(const SplitComplexVector& x_prev,
                             const SplitComplexVector& y,
                             const MeasurementModel& model,
                             const IstaConfig& cfg) {
  if (x_prev.size() != model.m()) throw ShapeError("ista_step: x length != M");
  if (y.size() != model.n()) throw ShapeError("ista_step: y length != N");

  // residual r = A x - y
  SplitComplexVector r = cmul_mat_vec(model.a_matrix, x_prev);
  r.re -= y.re;
  r.im -= y.im;
  // gradient g = A^H r, computed with the split blocks of A directly:
  // (A^H r).re = A.re^T r.re + A.im^T r.im
  // (A^H r).im = A.re^T r.im - A.im^T r.re
  SplitComplexVector z = x_prev;
  z.re.noalias() -= cfg.step * (model.a_matrix.re.transpose() * r.re);
  z.re.noalias() -= cfg.step * (model.a_matrix.im.transpose() * r.im);
  z.im.noalias() -= cfg.step * (model.a_matrix.re.transpose() * r.im);
  z.im.noalias() += cfg.step * (model.a_matrix.im.transpose() * r.re);
  return soft_threshold(z, cfg.theta());
}

double lasso_objective(const SplitComplexVector& x,
                       const SplitComplexVector& y,
                       const MeasurementModel& model, double lambda) {
  SplitComplexVector r = cmul_mat_vec(model.a_matrix, x);
  r.re -= y.re;
  r.im -= y.im;
  const double n2 = norm2(r);
  const double l1 = x.re.cwiseAbs().sum() + x.im.cwiseAbs().sum();
  return 0.5 * n2 * n2 + lambda * l1;
}

IstaResult ista_solve(const SplitComplexVector& y,
                      const MeasurementModel& model, const IstaConfig& cfg) {
  cfg.validate(model.lipschitz);
  IstaResult result;
  SplitComplexVector x = SplitComplexVector::zero(model.m());
  for (int k = 1; k <= cfg.max_iter; ++k) {
    SplitComplexVector x_next = ista_step(x, y, model, cfg);
    SplitComplexVector d = x_next;
    d.re -= x.re;
    d.im -= x.im;
    const double change = norm2(d);
    const double ref = std::max(norm2(x), 1e-12);
    x = std::move(x_next);
    if (change <= cfg.tol * ref) {
      result.iterations = k;
      result.converged = true;
      break;
    }
    result.iterations = k;
  }
  result.x_hat = std::move(x);
  result.final_objective = lasso_objective(result.x_hat, y, model, cfg.lambda);
  return result;
}

double select_lambda(LambdaMode mode, double sigma_w, int n) {
  if (sigma_w < 0) throw DomainError("select_lambda: sigma_w must be >= 0");
  if (n < 2) throw DomainError("select_lambda: n must be >= 2");
  if (mode == LambdaMode::kNoiseless) return 0.01;
  return sigma_w * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

KktReport check_kkt(const SplitComplexVector& x_hat,
                    const SplitComplexVector& y,
                    const MeasurementModel& model, double lambda, double tol) {
  if (x_hat.size() != model.m()) throw ShapeError("check_kkt: x length != M");
  if (y.size() != model.n()) throw ShapeError("check_kkt: y length != N");

  SplitComplexVector r = cmul_mat_vec(model.a_matrix, x_hat);
  r.re -= y.re;
  r.im -= y.im;
  SplitComplexVector g = cmul_mat_vec(hermitian(model.a_matrix), r);

  KktReport report;
  report.active_budget = 10.0 * tol * lambda;
  report.zero_budget = lambda * (1.0 + 10.0 * tol);
  auto scan = [&](const RealVector& v, const RealVector& gp) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v[i] != 0.0) {
        const double s = v[i] > 0 ? 1.0 : -1.0;
        report.max_active_residual =
            std::max(report.max_active_residual, std::abs(gp[i] + lambda * s));
      } else {
        report.max_zero_residual =
            std::max(report.max_zero_residual, std::abs(gp[i]));
      }
    }
  };
  scan(x_hat.re, g.re);
  scan(x_hat.im, g.im);
  return report;
}

}  // namespace udnn
