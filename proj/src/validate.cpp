#include "udnn/validate.hpp"

#include <cmath>
#include <complex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

#include "udnn/errors.hpp"
#include "udnn/ista.hpp"
#include "udnn/model.hpp"
#include "udnn/rng.hpp"
#include "udnn/signal_model.hpp"
#include "udnn/split_complex.hpp"
#include "udnn/training.hpp"

namespace udnn {

bool ValidateReport::all_passed() const {
  for (const CheckResult& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string ValidateReport::to_json() const {
  nlohmann::json j;
  j["all_passed"] = all_passed();
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& c : checks)
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"metric", c.metric},
                   {"budget", c.budget},
                   {"detail", c.detail}});
  j["checks"] = arr;
  return j.dump(2);
}

namespace {

using Cx = std::complex<double>;

SplitComplexMatrix random_matrix(Rng& rng, int rows, int cols) {
  SplitComplexMatrix a = SplitComplexMatrix::zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      a.re(i, j) = rng.gaussian();
      a.im(i, j) = rng.gaussian();
    }
  return a;
}

SplitComplexVector random_vector(Rng& rng, int n) {
  SplitComplexVector v = SplitComplexVector::zero(n);
  for (int i = 0; i < n; ++i) {
    v.re[i] = rng.gaussian();
    v.im[i] = rng.gaussian();
  }
  return v;
}

// scalar-loop reference for A v, independent of the split-block path
std::vector<Cx> scalar_mat_vec(const SplitComplexMatrix& a,
                               const SplitComplexVector& v) {
  std::vector<Cx> w(a.rows(), Cx(0, 0));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) w[i] += a.at(i, j) * v.at(j);
  return w;
}

double rel_err(Cx got, Cx want) {
  const double scale = std::max(std::abs(want), 1e-30);
  return std::abs(got - want) / scale;
}

// native-complex reference forward pass (scalar loops)
std::vector<Cx> complex_forward(const UdnnModel& model,
                                const SplitComplexVector& y) {
  std::vector<Cx> x(model.meta.m, Cx(0, 0));
  for (const LayerParams& layer : model.layers) {
    std::vector<Cx> z(model.meta.m, Cx(0, 0));
    for (int i = 0; i < model.meta.m; ++i) {
      Cx acc(0, 0);
      for (int j = 0; j < model.meta.m; ++j) acc += layer.w2.at(i, j) * x[j];
      for (int j = 0; j < model.meta.n; ++j)
        acc += layer.w1.at(i, j) * Cx(y.re[j], y.im[j]);
      z[i] = acc;
    }
    for (int i = 0; i < model.meta.m; ++i) {
      auto shrink = [&](double v) {
        if (v > layer.theta) return v - layer.theta;
        if (v < -layer.theta) return v + layer.theta;
        return 0.0;
      };
      x[i] = Cx(shrink(z[i].real()), shrink(z[i].imag()));
    }
  }
  return x;
}

}  // namespace

GradCheckResult finite_difference_check(UdnnModel model,
                                        const SplitComplexVector& y,
                                        const SplitComplexVector& x_true,
                                        double h) {
  GradCheckResult result;
  auto [out, trace] = forward_traced(model, y);
  (void)out;
  GradientSet grads = backward(model, trace, y, x_true);

  // Layers whose pre-threshold values graze a kink make one-sided finite
  // differences invalid for every parameter feeding them; skip those layers.
  int max_kink_layer = -1;
  for (int k = 0; k < model.k_layers(); ++k) {
    const LayerTrace& rec = trace.layers[k];
    const double theta = model.layers[k].theta;
    for (Eigen::Index i = 0; i < rec.z_pre.size(); ++i) {
      if (std::abs(std::abs(rec.z_pre.re[i]) - theta) <= 10 * h ||
          std::abs(std::abs(rec.z_pre.im[i]) - theta) <= 10 * h)
        max_kink_layer = std::max(max_kink_layer, k);
    }
  }
  result.excluded_layers = max_kink_layer + 1;

  auto loss_at = [&]() { return loss_mse_split(forward(model, y), x_true); };
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double lp = loss_at();
    param = saved - h;
    const double lm = loss_at();
    param = saved;
    const double fd = (lp - lm) / (2.0 * h);
    const double err =
        std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-8});
    result.max_rel_err = std::max(result.max_rel_err, err);
    ++result.compared;
  };

  for (int k = max_kink_layer + 1; k < model.k_layers(); ++k) {
    LayerParams& layer = model.layers[k];
    const LayerGradients& lg = grads.layers[k];
    for (Eigen::Index i = 0; i < layer.w1.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.w1.cols(); ++j) {
        probe(layer.w1.re(i, j), lg.w1.re(i, j));
        probe(layer.w1.im(i, j), lg.w1.im(i, j));
      }
    for (Eigen::Index i = 0; i < layer.w2.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.w2.cols(); ++j) {
        probe(layer.w2.re(i, j), lg.w2.re(i, j));
        probe(layer.w2.im(i, j), lg.w2.im(i, j));
      }
    probe(layer.theta, lg.theta);
  }
  return result;
}

ValidateReport run_validation(const ValidateOptions& options) {
  ValidateReport report;
  Rng rng(options.seed);

  // shared fixtures: the experiment-scale measurement model
  OfdmConfig ofdm;
  FrequencyGrid grid = build_grid(6, 6);
  MeasurementModel model = build_measurement_model(ofdm, grid);

  {  // 1. split vs scalar complex arithmetic
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      SplitComplexMatrix a = random_matrix(rng, 5, 7);
      SplitComplexVector v = random_vector(rng, 7);
      SplitComplexVector got = cmul_mat_vec(a, v);
      std::vector<Cx> want = scalar_mat_vec(a, v);
      for (int i = 0; i < 5; ++i)
        worst = std::max(worst, rel_err(got.at(i), want[i]));

      SplitComplexVector x = random_vector(rng, 6);
      SplitComplexVector yv = random_vector(rng, 6);
      Cx alpha(rng.gaussian(), rng.gaussian());
      Cx beta(rng.gaussian(), rng.gaussian());
      SplitComplexVector axpby = cvec_axpby(alpha, x, beta, yv);
      for (int i = 0; i < 6; ++i)
        worst = std::max(
            worst, rel_err(axpby.at(i), alpha * x.at(i) + beta * yv.at(i)));
    }
    report.checks.push_back({"split_complex_equivalence", worst <= 1e-12, worst,
                             1e-12, "split ops vs scalar complex oracle"});
  }

  {  // 2. hermitian involution
    SplitComplexMatrix a = random_matrix(rng, 6, 4);
    SplitComplexMatrix b = hermitian(hermitian(a));
    const double diff = (b.re - a.re).cwiseAbs().maxCoeff() +
                        (b.im - a.im).cwiseAbs().maxCoeff();
    report.checks.push_back({"hermitian_involution", diff == 0.0, diff, 0.0,
                             "hermitian(hermitian(A)) == A exactly"});
  }

  {  // 3. power-iteration bounds
    double worst = 0.0;
    const double l = model.lipschitz;
    for (int trial = 0; trial < 10; ++trial) {
      SplitComplexVector u = random_vector(rng, model.m());
      SplitComplexVector au = cmul_mat_vec(model.a_matrix, u);
      const double q = norm2(au) * norm2(au) / (norm2(u) * norm2(u));
      worst = std::max(worst, q / l - 1.0);
    }
    report.checks.push_back({"lipschitz_upper_bound", worst <= 1e-9, worst,
                             1e-9,
                             "Rayleigh quotients of probes stay below L"});
  }

  {  // 4. dictionary column norms: unit-modulus entries sum to N
    double worst = 0.0;
    for (int c = 0; c < model.m(); ++c) {
      const double n2 = model.dictionary.re.col(c).squaredNorm() +
                        model.dictionary.im.col(c).squaredNorm();
      worst = std::max(worst, std::abs(n2 - model.n()));
    }
    report.checks.push_back({"dictionary_column_norms", worst <= 1e-10, worst,
                             1e-10, "every column has squared norm N"});
  }

  {  // 5. atom phase law
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const double tau = rng.uniform01();
      const double f = rng.uniform01();
      SplitComplexVector a = atom(tau, f, ofdm);
      for (int k = 0; k < ofdm.n_data; ++k)
        for (int n = 0; n < ofdm.n_blocks; ++n) {
          const Cx want = std::polar(1.0, 2.0 * M_PI * (n * f - k * tau));
          worst = std::max(
              worst, std::abs(a.at(k * ofdm.n_blocks + n) - want));
        }
    }
    report.checks.push_back({"atom_phase_law", worst <= 1e-13, worst, 1e-13,
                             "atom entries follow e^{i2pi(n f - k tau)}"});
  }

  {  // 6. initialization equivalence (the structural claim)
    double worst = 0.0;
    const int k_layers = 5;
    for (double lambda : {0.01, 1.0}) {
      UdnnModel net = init_from_ista(model, k_layers, lambda);
      if (options.inject_init_fault) net.layers[1].w2.re(3, 3) += 1e-6;
      IstaConfig cfg = IstaConfig::for_model(model, lambda);
      for (int trial = 0; trial < 10; ++trial) {
        SplitComplexVector y = random_vector(rng, model.n());
        SplitComplexVector via_net = forward(net, y);
        SplitComplexVector via_ista = SplitComplexVector::zero(model.m());
        for (int k = 0; k < k_layers; ++k)
          via_ista = ista_step(via_ista, y, model, cfg);
        worst = std::max(worst,
                         (via_net.re - via_ista.re).cwiseAbs().maxCoeff());
        worst = std::max(worst,
                         (via_net.im - via_ista.im).cwiseAbs().maxCoeff());
      }
    }
    report.checks.push_back({"init_equivalence", worst <= 1e-12, worst, 1e-12,
                             "initialized network equals K ISTA iterations"});
  }

  {  // 7. split forward vs native-complex reference
    double worst = 0.0;
    UdnnModel net = init_from_ista(model, 3, 0.5);
    // randomize weights so the check is not tied to the init point
    for (LayerParams& layer : net.layers) {
      for (Eigen::Index i = 0; i < layer.w2.rows(); ++i)
        for (Eigen::Index j = 0; j < layer.w2.cols(); ++j) {
          layer.w2.re(i, j) += 0.05 * rng.gaussian();
          layer.w2.im(i, j) += 0.05 * rng.gaussian();
        }
      layer.theta = 0.02 + 0.01 * rng.uniform01();
    }
    for (int trial = 0; trial < 10; ++trial) {
      SplitComplexVector y = random_vector(rng, model.n());
      SplitComplexVector got = forward(net, y);
      std::vector<Cx> want = complex_forward(net, y);
      for (int i = 0; i < model.m(); ++i)
        worst = std::max(worst, std::abs(got.at(i) - want[i]));
    }
    report.checks.push_back({"complex_forward_equivalence", worst <= 1e-12,
                             worst, 1e-12,
                             "split-block layers equal native complex ops"});
  }

  {  // 8. backward vs central finite differences (small setup, fast)
    OfdmConfig small;
    small.n_data = 2;
    small.n_blocks = 2;
    MeasurementModel small_model =
        build_measurement_model(small, build_grid(3, 3));
    const double h = 1e-5;
    double worst = 0.0;
    int compared = 0;
    for (int pair = 0; pair < 3; ++pair) {
      UdnnModel net = init_from_ista(small_model, 3, 0.3 + 0.2 * pair);
      for (LayerParams& layer : net.layers) {
        for (Eigen::Index i = 0; i < layer.w1.rows(); ++i)
          for (Eigen::Index j = 0; j < layer.w1.cols(); ++j) {
            layer.w1.re(i, j) += 0.1 * rng.gaussian();
            layer.w1.im(i, j) += 0.1 * rng.gaussian();
          }
      }
      SplitComplexVector y = random_vector(rng, small_model.n());
      SplitComplexVector x_true = random_vector(rng, small_model.m());
      GradCheckResult r = finite_difference_check(net, y, x_true, h);
      worst = std::max(worst, r.max_rel_err);
      compared += r.compared;
    }
    std::ostringstream detail;
    detail << "central differences, " << compared << " components compared";
    report.checks.push_back(
        {"gradient_check", worst <= 1e-5 && compared > 0, worst, 1e-5,
         detail.str()});
  }

  {  // 9. ISTA fixed-point conditions on a noisy instance
    PathSet paths;
    paths.gains = {{0.8, -0.4}, {-0.6, 0.9}};
    paths.delays = {grid.delay_points[1], grid.delay_points[4]};
    paths.dopplers = {grid.doppler_points[2], grid.doppler_points[5]};
    SplitComplexVector x = synthesize_ground_truth_x(paths, grid);
    SplitComplexVector y0 = synthesize_measurement(x, model, 0.0, 0);
    const double sigma = snr_to_sigma(-10.0, mean_power(y0));
    SplitComplexVector y =
        synthesize_measurement(x, model, sigma, mix_seed(options.seed, 9));
    const double lambda = select_lambda(LambdaMode::kNoisy, sigma, model.n());
    IstaConfig cfg = IstaConfig::for_model(model, lambda);
    IstaResult result = ista_solve(y, model, cfg);
    KktReport kkt = check_kkt(result.x_hat, y, model, lambda, cfg.tol);
    const double metric =
        std::max(kkt.max_active_residual / kkt.active_budget,
                 kkt.max_zero_residual / kkt.zero_budget);
    report.checks.push_back({"ista_kkt_fixed_point", kkt.satisfied(), metric,
                             1.0, "LASSO optimality residuals within budget"});
  }

  {  // 10. matched-filter approximation bound
    OfdmConfig mf;
    mf.n_data = 4;
    mf.n_cp = 16;
    mf.n_blocks = 4;
    mf.sample_period = 1e-6;
    SplitComplexMatrix ones = SplitComplexMatrix::zero(mf.n_blocks, mf.n_data);
    ones.re.setOnes();
    const double nu_t = mf.n_units() * mf.sample_period;
    auto rel_gap = [&](double f_nut) {
      std::vector<RawPath> paths = {
          {{1.0, 0.5}, 0.4 * mf.sample_period, f_nut / nu_t}};
      SplitComplexMatrix quad = matched_filter_oracle(paths, mf, ones, 2048);
      SplitComplexMatrix cf = matched_filter_closed_form(paths, mf, ones);
      const double num = std::sqrt((quad.re - cf.re).squaredNorm() +
                                   (quad.im - cf.im).squaredNorm());
      const double den =
          std::sqrt(quad.re.squaredNorm() + quad.im.squaredNorm());
      return num / den;
    };
    const double small_err = rel_gap(0.01);
    const double large_err = rel_gap(0.3);
    std::ostringstream detail;
    detail << "rel err " << small_err << " at fNuT=0.01, " << large_err
           << " at 0.3";
    report.checks.push_back({"matched_filter_approximation",
                             small_err < 0.01 && large_err > small_err,
                             small_err, 0.01, detail.str()});
  }

  {  // 11. zero preservation
    UdnnModel net = init_from_ista(model, 4, 0.7);
    SplitComplexVector out = forward(net, SplitComplexVector::zero(model.n()));
    const double worst = norm2(out);
    report.checks.push_back({"zero_preservation", worst == 0.0, worst, 0.0,
                             "forward(0) == 0 for any parameters"});
  }

  {  // 12. threshold contraction
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      SplitComplexVector a = random_vector(rng, 12);
      SplitComplexVector b = random_vector(rng, 12);
      const double theta = rng.uniform01();
      SplitComplexVector sa = soft_threshold(a, theta);
      SplitComplexVector sb = soft_threshold(b, theta);
      SplitComplexVector d1 = sa, d2 = a;
      d1.re -= sb.re;
      d1.im -= sb.im;
      d2.re -= b.re;
      d2.im -= b.im;
      if (norm2(d2) > 0) worst = std::max(worst, norm2(d1) / norm2(d2));
    }
    report.checks.push_back({"threshold_contraction", worst <= 1.0 + 1e-15,
                             worst, 1.0, "soft threshold is 1-Lipschitz"});
  }

  return report;
}

}  // namespace udnn
