#include "udnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "udnn/errors.hpp"
#include "udnn/fingerprint.hpp"
#include "udnn/ista.hpp"
#include "udnn/rng.hpp"

namespace udnn {

TrainingSample Dataset::sample(int idx) const {
  TrainingSample s;
  s.y = SplitComplexVector::zero(n());
  s.x = SplitComplexVector::zero(m());
  s.y.re = y_re.row(idx).transpose();
  s.y.im = y_im.row(idx).transpose();
  s.x.re = x_re.row(idx).transpose();
  s.x.im = x_im.row(idx).transpose();
  s.meta.seed = seeds[idx];
  s.meta.noiseless = noiseless;
  s.meta.snr_db = snr_db;
  s.meta.j_paths = static_cast<int>(j_paths[idx]);
  return s;
}

void TrainConfig::validate() const {
  if (n_samples < 1) throw DomainError("TrainConfig: n_samples must be >= 1");
  if (epochs < 1) throw DomainError("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw DomainError("TrainConfig: batch_size must be >= 1");
  if (j_max < 1) throw DomainError("TrainConfig: j_max must be >= 1");
  if (!(lr >= 0)) throw DomainError("TrainConfig: lr must be >= 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw DomainError("TrainConfig: betas must lie in [0, 1)");
  if (!(eps > 0)) throw DomainError("TrainConfig: eps must be > 0");
  if (!(val_fraction >= 0 && val_fraction < 1))
    throw DomainError("TrainConfig: val_fraction must lie in [0, 1)");
}

Dataset generate_dataset(const MeasurementModel& model,
                         const TrainConfig& cfg) {
  return generate_dataset(model, cfg, cfg.n_samples, cfg.seed);
}

Dataset generate_dataset(const MeasurementModel& model, const TrainConfig& cfg,
                         int n_samples, std::uint64_t seed) {
  cfg.validate();
  const int n = model.n();
  const int m = model.m();
  if (cfg.j_max > m) throw DomainError("generate_dataset: j_max > M");
  if (n_samples < 1) throw DomainError("generate_dataset: empty dataset");

  Dataset data;
  data.y_re.resize(n_samples, n);
  data.y_im.resize(n_samples, n);
  data.x_re.resize(n_samples, m);
  data.x_im.resize(n_samples, m);
  data.seeds.resize(n_samples);
  data.j_paths.resize(n_samples);
  data.noiseless = cfg.noiseless;
  data.snr_db = cfg.noiseless ? 0.0 : cfg.snr_db;
  data.base_seed = seed;
  data.grid_fingerprint = model.fingerprint;

  std::vector<int> cols(m);
  for (int p = 0; p < n_samples; ++p) {
    const std::uint64_t seed_p = mix_seed(seed, static_cast<std::uint64_t>(p));
    Rng rng(mix_seed(seed_p, 1));
    const int j = 1 + rng.uniform_int(cfg.j_max);

    // partial Fisher-Yates draw of j distinct columns
    std::iota(cols.begin(), cols.end(), 0);
    SplitComplexVector x = SplitComplexVector::zero(m);
    for (int l = 0; l < j; ++l) {
      const int pick = l + rng.uniform_int(m - l);
      std::swap(cols[l], cols[pick]);
      x.re[cols[l]] = rng.uniform(-1.0, 1.0);
      x.im[cols[l]] = rng.uniform(-1.0, 1.0);
    }

    double sigma_w = 0.0;
    if (!cfg.noiseless) {
      SplitComplexVector y0 = cmul_mat_vec(model.a_matrix, x);
      const double power = mean_power(y0);
      sigma_w = power > 0 ? snr_to_sigma(cfg.snr_db, power) : 0.0;
    }
    SplitComplexVector y =
        synthesize_measurement(x, model, sigma_w, mix_seed(seed_p, 2));

    data.y_re.row(p) = y.re.transpose();
    data.y_im.row(p) = y.im.transpose();
    data.x_re.row(p) = x.re.transpose();
    data.x_im.row(p) = x.im.transpose();
    data.seeds[p] = seed_p;
    data.j_paths[p] = static_cast<std::uint32_t>(j);
  }
  return data;
}

double loss_mse_split(const SplitComplexVector& x_hat,
                      const SplitComplexVector& x) {
  if (x_hat.size() != x.size()) throw ShapeError("loss_mse_split: length mismatch");
  return (x_hat.re - x.re).squaredNorm() + (x_hat.im - x.im).squaredNorm();
}

GradientSet GradientSet::zero_like(const UdnnModel& model) {
  GradientSet g;
  g.layers.resize(model.layers.size());
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    g.layers[k].w1 = SplitComplexMatrix::zero(model.meta.m, model.meta.n);
    g.layers[k].w2 = SplitComplexMatrix::zero(model.meta.m, model.meta.m);
    g.layers[k].theta = 0.0;
  }
  return g;
}

void GradientSet::add_scaled(const GradientSet& other, double scale) {
  if (other.layers.size() != layers.size())
    throw ShapeError("GradientSet::add_scaled: layer count mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].w1.re += scale * other.layers[k].w1.re;
    layers[k].w1.im += scale * other.layers[k].w1.im;
    layers[k].w2.re += scale * other.layers[k].w2.re;
    layers[k].w2.im += scale * other.layers[k].w2.im;
    layers[k].theta += scale * other.layers[k].theta;
  }
}

bool GradientSet::all_finite() const {
  for (const LayerGradients& g : layers)
    if (!g.w1.all_finite() || !g.w2.all_finite() || !std::isfinite(g.theta))
      return false;
  return true;
}

GradientSet backward(const UdnnModel& model, const ForwardTrace& trace,
                     const SplitComplexVector& y,
                     const SplitComplexVector& x_true) {
  const int k_layers = model.k_layers();
  if (static_cast<int>(trace.layers.size()) != k_layers)
    throw IntegrityError("backward: trace/model layer count mismatch");
  if (y.size() != model.meta.n || x_true.size() != model.meta.m)
    throw ShapeError("backward: operand length mismatch");
  for (const LayerTrace& rec : trace.layers)
    if (rec.x_input.size() != model.meta.m || rec.z_pre.size() != model.meta.m ||
        rec.x_output.size() != model.meta.m)
      throw IntegrityError("backward: trace shapes do not match model");

  GradientSet grads = GradientSet::zero_like(model);

  // dE/dx^K, per part
  RealVector g_re = 2.0 * (trace.layers.back().x_output.re - x_true.re);
  RealVector g_im = 2.0 * (trace.layers.back().x_output.im - x_true.im);

  for (int k = k_layers - 1; k >= 0; --k) {
    const LayerParams& layer = model.layers[k];
    const LayerTrace& rec = trace.layers[k];
    LayerGradients& lg = grads.layers[k];

    // soft-threshold derivative: pass where |z| > theta, block otherwise
    RealVector u_re(g_re.size()), u_im(g_im.size());
    double dtheta = 0.0;
    for (Eigen::Index i = 0; i < g_re.size(); ++i) {
      const double zr = rec.z_pre.re[i];
      if (std::abs(zr) > layer.theta) {
        u_re[i] = g_re[i];
        dtheta -= (zr > 0 ? 1.0 : -1.0) * g_re[i];
      } else {
        u_re[i] = 0.0;
      }
      const double zi = rec.z_pre.im[i];
      if (std::abs(zi) > layer.theta) {
        u_im[i] = g_im[i];
        dtheta -= (zi > 0 ? 1.0 : -1.0) * g_im[i];
      } else {
        u_im[i] = 0.0;
      }
    }
    lg.theta = dtheta;

    // dW1 = (u_re + i u_im) (y_re - i y_im)^T, split into blocks
    lg.w1.re.noalias() = u_re * y.re.transpose();
    lg.w1.re.noalias() += u_im * y.im.transpose();
    lg.w1.im.noalias() = u_im * y.re.transpose();
    lg.w1.im.noalias() -= u_re * y.im.transpose();

    lg.w2.re.noalias() = u_re * rec.x_input.re.transpose();
    lg.w2.re.noalias() += u_im * rec.x_input.im.transpose();
    lg.w2.im.noalias() = u_im * rec.x_input.re.transpose();
    lg.w2.im.noalias() -= u_re * rec.x_input.im.transpose();

    // propagate to the previous layer's output
    if (k > 0) {
      RealVector next_re = layer.w2.re.transpose() * u_re;
      next_re.noalias() += layer.w2.im.transpose() * u_im;
      RealVector next_im = layer.w2.re.transpose() * u_im;
      next_im.noalias() -= layer.w2.im.transpose() * u_re;
      g_re = std::move(next_re);
      g_im = std::move(next_im);
    }
  }
  return grads;
}

void forward_batch_traced(const UdnnModel& model, const RealMatrix& y_re,
                          const RealMatrix& y_im, BatchTrace& trace) {
  const int k_layers = model.k_layers();
  const Eigen::Index b = y_re.rows();
  const Eigen::Index m = model.meta.m;
  if (y_re.cols() != model.meta.n || y_im.rows() != b ||
      y_im.cols() != model.meta.n)
    throw ShapeError("forward_batch_traced: y block shape mismatch");

  trace.x_in_re.assign(k_layers, RealMatrix());
  trace.x_in_im.assign(k_layers, RealMatrix());
  trace.z_re.assign(k_layers, RealMatrix());
  trace.z_im.assign(k_layers, RealMatrix());

  RealMatrix x_re = RealMatrix::Zero(b, m);
  RealMatrix x_im = RealMatrix::Zero(b, m);
  for (int k = 0; k < k_layers; ++k) {
    const LayerParams& layer = model.layers[k];
    trace.x_in_re[k] = x_re;
    trace.x_in_im[k] = x_im;

    // rows are samples: Z = X W2^T + Y W1^T in the four real blocks
    RealMatrix z_re = x_re * layer.w2.re.transpose();
    z_re.noalias() -= x_im * layer.w2.im.transpose();
    z_re.noalias() += y_re * layer.w1.re.transpose();
    z_re.noalias() -= y_im * layer.w1.im.transpose();
    RealMatrix z_im = x_im * layer.w2.re.transpose();
    z_im.noalias() += x_re * layer.w2.im.transpose();
    z_im.noalias() += y_im * layer.w1.re.transpose();
    z_im.noalias() += y_re * layer.w1.im.transpose();

    const double theta = layer.theta;
    auto shrink_all = [theta](RealMatrix& z, RealMatrix& x) {
      x = z.unaryExpr([theta](double v) {
        if (v > theta) return v - theta;
        if (v < -theta) return v + theta;
        return 0.0;
      });
    };
    shrink_all(z_re, x_re);
    shrink_all(z_im, x_im);
    trace.z_re[k] = std::move(z_re);
    trace.z_im[k] = std::move(z_im);
  }
  trace.out_re = std::move(x_re);
  trace.out_im = std::move(x_im);
}

double backward_batch(const UdnnModel& model, const BatchTrace& trace,
                      const RealMatrix& y_re, const RealMatrix& y_im,
                      const RealMatrix& x_re, const RealMatrix& x_im,
                      GradientSet& grads) {
  const int k_layers = model.k_layers();
  if (static_cast<int>(trace.z_re.size()) != k_layers)
    throw IntegrityError("backward_batch: trace/model mismatch");
  const Eigen::Index b = y_re.rows();

  const double inv_b = 1.0 / static_cast<double>(b);
  const double loss =
      ((trace.out_re - x_re).squaredNorm() + (trace.out_im - x_im).squaredNorm()) *
      inv_b;

  if (static_cast<int>(grads.layers.size()) != k_layers)
    grads = GradientSet::zero_like(model);

  // dE/dX^K of the batch-mean loss
  RealMatrix g_re = (2.0 * inv_b) * (trace.out_re - x_re);
  RealMatrix g_im = (2.0 * inv_b) * (trace.out_im - x_im);

  RealMatrix u_re, u_im;
  for (int k = k_layers - 1; k >= 0; --k) {
    const LayerParams& layer = model.layers[k];
    LayerGradients& lg = grads.layers[k];
    const double theta = layer.theta;

    const RealMatrix& z_re = trace.z_re[k];
    const RealMatrix& z_im = trace.z_im[k];
    u_re = ((z_re.array().abs() > theta).cast<double>() * g_re.array()).matrix();
    u_im = ((z_im.array().abs() > theta).cast<double>() * g_im.array()).matrix();
    lg.theta = -(z_re.array().sign() * u_re.array()).sum() -
               (z_im.array().sign() * u_im.array()).sum();

    lg.w1.re.noalias() = u_re.transpose() * y_re;
    lg.w1.re.noalias() += u_im.transpose() * y_im;
    lg.w1.im.noalias() = u_im.transpose() * y_re;
    lg.w1.im.noalias() -= u_re.transpose() * y_im;

    lg.w2.re.noalias() = u_re.transpose() * trace.x_in_re[k];
    lg.w2.re.noalias() += u_im.transpose() * trace.x_in_im[k];
    lg.w2.im.noalias() = u_im.transpose() * trace.x_in_re[k];
    lg.w2.im.noalias() -= u_re.transpose() * trace.x_in_im[k];

    if (k > 0) {
      RealMatrix next_re = u_re * layer.w2.re;
      next_re.noalias() += u_im * layer.w2.im;
      RealMatrix next_im = u_im * layer.w2.re;
      next_im.noalias() -= u_re * layer.w2.im;
      g_re = std::move(next_re);
      g_im = std::move(next_im);
    }
  }
  return loss;
}

AdamState AdamState::for_model(const UdnnModel& model, double lr, double beta1,
                               double beta2, double eps) {
  AdamState state;
  state.lr = lr;
  state.beta1 = beta1;
  state.beta2 = beta2;
  state.eps = eps;
  state.layers.resize(model.layers.size());
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    AdamTensors& a = state.layers[k];
    a.m_w1 = SplitComplexMatrix::zero(model.meta.m, model.meta.n);
    a.v_w1 = SplitComplexMatrix::zero(model.meta.m, model.meta.n);
    a.m_w2 = SplitComplexMatrix::zero(model.meta.m, model.meta.m);
    a.v_w2 = SplitComplexMatrix::zero(model.meta.m, model.meta.m);
  }
  return state;
}

namespace {

void adam_update_tensor(RealMatrix& param, const RealMatrix& grad,
                        RealMatrix& m, RealMatrix& v, double lr, double beta1,
                        double beta2, double eps, double bc1, double bc2) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

void adam_update_scalar(double& param, double grad, double& m, double& v,
                        double lr, double beta1, double beta2, double eps,
                        double bc1, double bc2) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad * grad;
  param -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
}

}  // namespace

void adam_step(UdnnModel& model, const GradientSet& grads, AdamState& state) {
  if (grads.layers.size() != model.layers.size() ||
      state.layers.size() != model.layers.size())
    throw ShapeError("adam_step: layer count mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    LayerParams& layer = model.layers[k];
    const LayerGradients& g = grads.layers[k];
    AdamTensors& a = state.layers[k];
    adam_update_tensor(layer.w1.re, g.w1.re, a.m_w1.re, a.v_w1.re, state.lr,
                       state.beta1, state.beta2, state.eps, bc1, bc2);
    adam_update_tensor(layer.w1.im, g.w1.im, a.m_w1.im, a.v_w1.im, state.lr,
                       state.beta1, state.beta2, state.eps, bc1, bc2);
    adam_update_tensor(layer.w2.re, g.w2.re, a.m_w2.re, a.v_w2.re, state.lr,
                       state.beta1, state.beta2, state.eps, bc1, bc2);
    adam_update_tensor(layer.w2.im, g.w2.im, a.m_w2.im, a.v_w2.im, state.lr,
                       state.beta1, state.beta2, state.eps, bc1, bc2);
    adam_update_scalar(layer.theta, g.theta, a.m_theta, a.v_theta, state.lr,
                       state.beta1, state.beta2, state.eps, bc1, bc2);
    // Eq. (13) requires a nonnegative threshold
    layer.theta = std::max(layer.theta, 0.0);
  }
}

void TrainingLog::write_csv(const std::string& path,
                            std::uint64_t fingerprint) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  out << "# config_fingerprint=" << fingerprint_hex(fingerprint) << "\n";
  out << "epoch,train_loss,val_mse_db,wall_time_s\n";
  for (const TrainLogRow& row : rows) {
    out << row.epoch << "," << std::setprecision(17) << row.train_loss << ","
        << row.val_mse_db << "," << row.wall_time_s << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// resumable training state

namespace {

constexpr char kStateMagic[8] = {'U', 'D', 'N', 'N', 'T', 'R', 'S', '1'};

struct TrainState {
  UdnnModel model;
  UdnnModel best_model;
  AdamState adam;
  int epoch_completed = 0;
  int best_epoch = 0;
  double best_val_mse_db = 0.0;
  double elapsed_s = 0.0;
  std::vector<TrainLogRow> log_rows;
};

void write_matrix(std::ofstream& out, const RealMatrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void read_matrix(std::ifstream& in, RealMatrix& m, const std::string& path) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(m.size() * sizeof(double)))
    throw IntegrityError("truncated training state: " + path);
}

void write_model_blocks(std::ofstream& out, const UdnnModel& model) {
  for (const LayerParams& layer : model.layers) {
    write_matrix(out, layer.w1.re);
    write_matrix(out, layer.w1.im);
    write_matrix(out, layer.w2.re);
    write_matrix(out, layer.w2.im);
    out.write(reinterpret_cast<const char*>(&layer.theta), sizeof(double));
  }
}

void read_model_blocks(std::ifstream& in, UdnnModel& model,
                       const std::string& path) {
  for (LayerParams& layer : model.layers) {
    read_matrix(in, layer.w1.re, path);
    read_matrix(in, layer.w1.im, path);
    read_matrix(in, layer.w2.re, path);
    read_matrix(in, layer.w2.im, path);
    in.read(reinterpret_cast<char*>(&layer.theta), sizeof(double));
    if (in.gcount() != sizeof(double))
      throw IntegrityError("truncated training state: " + path);
  }
}

void save_train_state(const std::string& path, const TrainState& state,
                      const TrainConfig& cfg) {
  nlohmann::json header;
  header["format"] = "udnn.train_state";
  header["version"] = 1;
  header["epoch_completed"] = state.epoch_completed;
  header["best_epoch"] = state.best_epoch;
  header["best_val_mse_db"] = state.best_val_mse_db;
  header["elapsed_s"] = state.elapsed_s;
  header["adam_t"] = state.adam.t;
  header["n"] = state.model.meta.n;
  header["m"] = state.model.meta.m;
  header["k_layers"] = state.model.meta.k_layers;
  header["init_lambda"] = state.model.meta.init_lambda;
  header["init_lipschitz"] = state.model.meta.init_lipschitz;
  header["grid_fingerprint"] = fingerprint_hex(state.model.meta.grid_fingerprint);
  header["cfg"] = {{"n_samples", cfg.n_samples}, {"epochs", cfg.epochs},
                   {"batch_size", cfg.batch_size}, {"j_max", cfg.j_max},
                   {"noiseless", cfg.noiseless},   {"snr_db", cfg.snr_db},
                   {"seed", cfg.seed},             {"lr", cfg.lr},
                   {"beta1", cfg.beta1},           {"beta2", cfg.beta2},
                   {"eps", cfg.eps},               {"val_fraction", cfg.val_fraction}};
  nlohmann::json log = nlohmann::json::array();
  for (const TrainLogRow& row : state.log_rows)
    log.push_back({{"epoch", row.epoch},
                   {"train_loss", row.train_loss},
                   {"val_mse_db", row.val_mse_db},
                   {"wall_time_s", row.wall_time_s}});
  header["log"] = log;
  const std::string header_text = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + tmp);
    out.write(kStateMagic, sizeof kStateMagic);
    const std::uint32_t len = static_cast<std::uint32_t>(header_text.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    write_model_blocks(out, state.model);
    write_model_blocks(out, state.best_model);
    for (const AdamTensors& a : state.adam.layers) {
      write_matrix(out, a.m_w1.re);
      write_matrix(out, a.m_w1.im);
      write_matrix(out, a.v_w1.re);
      write_matrix(out, a.v_w1.im);
      write_matrix(out, a.m_w2.re);
      write_matrix(out, a.m_w2.im);
      write_matrix(out, a.v_w2.re);
      write_matrix(out, a.v_w2.im);
      double scalars[2] = {a.m_theta, a.v_theta};
      out.write(reinterpret_cast<const char*>(scalars), sizeof scalars);
    }
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

bool load_train_state(const std::string& path, const UdnnModel& like,
                      const TrainConfig& cfg, TrainState& state) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic ||
      std::memcmp(magic, kStateMagic, sizeof magic) != 0)
    throw IntegrityError("not a training state file: " + path);
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string header_text(len, '\0');
  in.read(header_text.data(), len);
  if (in.gcount() != static_cast<std::streamsize>(len))
    throw IntegrityError("truncated training state: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("bad training state header: ") + e.what());
  }
  if (header.value("format", "") != "udnn.train_state")
    throw IntegrityError("unknown training state format: " + path);
  if (header.at("n") != like.meta.n || header.at("m") != like.meta.m ||
      header.at("k_layers") != like.meta.k_layers ||
      fingerprint_from_hex(header.at("grid_fingerprint").get<std::string>()) !=
          like.meta.grid_fingerprint)
    throw IntegrityError("training state does not match this run's model: " + path);
  const nlohmann::json& c = header.at("cfg");
  if (c.at("n_samples") != cfg.n_samples || c.at("batch_size") != cfg.batch_size ||
      c.at("seed") != cfg.seed || c.at("lr") != cfg.lr ||
      c.at("noiseless") != cfg.noiseless || c.at("j_max") != cfg.j_max)
    throw IntegrityError("training state was produced by a different config: " + path);

  state.model = like;
  state.best_model = like;
  state.adam = AdamState::for_model(like, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  state.epoch_completed = header.at("epoch_completed");
  state.best_epoch = header.at("best_epoch");
  state.best_val_mse_db = header.at("best_val_mse_db");
  state.elapsed_s = header.at("elapsed_s");
  state.adam.t = header.at("adam_t");
  state.log_rows.clear();
  for (const nlohmann::json& row : header.at("log"))
    state.log_rows.push_back({row.at("epoch"), row.at("train_loss"),
                              row.at("val_mse_db"), row.at("wall_time_s")});

  read_model_blocks(in, state.model, path);
  read_model_blocks(in, state.best_model, path);
  for (AdamTensors& a : state.adam.layers) {
    read_matrix(in, a.m_w1.re, path);
    read_matrix(in, a.m_w1.im, path);
    read_matrix(in, a.v_w1.re, path);
    read_matrix(in, a.v_w1.im, path);
    read_matrix(in, a.m_w2.re, path);
    read_matrix(in, a.m_w2.im, path);
    read_matrix(in, a.v_w2.re, path);
    read_matrix(in, a.v_w2.im, path);
    double scalars[2];
    in.read(reinterpret_cast<char*>(scalars), sizeof scalars);
    if (in.gcount() != sizeof scalars)
      throw IntegrityError("truncated training state: " + path);
    a.m_theta = scalars[0];
    a.v_theta = scalars[1];
  }
  state.model.validate();
  state.best_model.validate();
  return true;
}

double dataset_mean_loss(const UdnnModel& model, const Dataset& data) {
  const int chunk = 2048;
  double total = 0.0;
  BatchTrace trace;
  for (int start = 0; start < data.p(); start += chunk) {
    const int b = std::min(chunk, data.p() - start);
    RealMatrix y_re = data.y_re.middleRows(start, b);
    RealMatrix y_im = data.y_im.middleRows(start, b);
    forward_batch_traced(model, y_re, y_im, trace);
    total += (trace.out_re - data.x_re.middleRows(start, b)).squaredNorm() +
             (trace.out_im - data.x_im.middleRows(start, b)).squaredNorm();
  }
  return total / data.p();
}

double dataset_mse_db(const UdnnModel& model, const Dataset& data) {
  Estimator est = [&model](const SplitComplexVector& y) {
    return forward(model, y);
  };
  return evaluate_mse_db(est, data);
}

}  // namespace

TrainOutcome train(const UdnnModel& init_model, const Dataset& dataset,
                   const TrainConfig& cfg, const MeasurementModel& measurement,
                   const TrainOptions& options) {
  cfg.validate();
  if (dataset.p() < 1) throw DomainError("train: empty dataset");
  if (dataset.n() != init_model.meta.n || dataset.m() != init_model.meta.m)
    throw ShapeError("train: dataset/model shape mismatch");
  require_compatible(init_model, measurement);
  if (dataset.grid_fingerprint != measurement.fingerprint)
    throw IntegrityError("train: dataset was generated against a different grid");

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&t_start]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  // validation split: disjoint seed stream from the training data
  const int n_val = std::max(1, static_cast<int>(std::lround(
                                    cfg.val_fraction * cfg.n_samples)));
  Dataset val_set =
      generate_dataset(measurement, cfg, n_val, mix_seed(cfg.seed, 0x5a11dull));

  TrainState state;
  double time_offset = 0.0;
  bool resumed = false;
  if (!options.state_path.empty() &&
      load_train_state(options.state_path, init_model, cfg, state)) {
    resumed = true;
    time_offset = state.elapsed_s;
  } else {
    state.model = init_model;
    state.best_model = init_model;
    state.adam =
        AdamState::for_model(init_model, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    state.epoch_completed = 0;
    state.best_epoch = 0;
    state.best_val_mse_db = dataset_mse_db(init_model, val_set);
    state.log_rows.push_back({0, dataset_mean_loss(init_model, dataset),
                              state.best_val_mse_db, 0.0});
    if (!options.quiet)
      std::cerr << "epoch 0: train_loss=" << state.log_rows.back().train_loss
                << " val_mse_db=" << state.best_val_mse_db << "\n";
  }

  const int first_epoch = state.epoch_completed + 1;
  const int p_total = dataset.p();
  std::vector<int> perm(p_total);
  RealMatrix yb_re, yb_im, xb_re, xb_im;
  BatchTrace trace;
  GradientSet grads = GradientSet::zero_like(state.model);

  for (int epoch = first_epoch; epoch <= cfg.epochs; ++epoch) {
    // deterministic shuffle schedule
    Rng shuffle_rng(mix_seed(mix_seed(cfg.seed, 0xe90c45ull), epoch));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = p_total - 1; i > 0; --i)
      std::swap(perm[i], perm[shuffle_rng.uniform_int(i + 1)]);

    double loss_sum = 0.0;
    for (int start = 0; start < p_total; start += cfg.batch_size) {
      const int b = std::min(cfg.batch_size, p_total - start);
      yb_re.resize(b, dataset.n());
      yb_im.resize(b, dataset.n());
      xb_re.resize(b, dataset.m());
      xb_im.resize(b, dataset.m());
      for (int i = 0; i < b; ++i) {
        const int row = perm[start + i];
        yb_re.row(i) = dataset.y_re.row(row);
        yb_im.row(i) = dataset.y_im.row(row);
        xb_re.row(i) = dataset.x_re.row(row);
        xb_im.row(i) = dataset.x_im.row(row);
      }
      forward_batch_traced(state.model, yb_re, yb_im, trace);
      const double batch_loss =
          backward_batch(state.model, trace, yb_re, yb_im, xb_re, xb_im, grads);
      adam_step(state.model, grads, state.adam);
      loss_sum += batch_loss * b;
    }

    const double train_loss = loss_sum / p_total;
    const double val_mse = dataset_mse_db(state.model, val_set);
    if (val_mse < state.best_val_mse_db) {
      state.best_val_mse_db = val_mse;
      state.best_epoch = epoch;
      state.best_model = state.model;
    }
    state.epoch_completed = epoch;
    state.elapsed_s = time_offset + elapsed();
    state.log_rows.push_back({epoch, train_loss, val_mse, state.elapsed_s});
    if (!options.quiet)
      std::cerr << "epoch " << epoch << ": train_loss=" << train_loss
                << " val_mse_db=" << val_mse << " best=" << state.best_val_mse_db
                << " (" << state.elapsed_s << " s)\n";
    if (!options.state_path.empty()) save_train_state(options.state_path, state, cfg);
  }

  TrainOutcome outcome;
  outcome.best_model = state.best_model;
  outcome.final_model = state.model;
  outcome.log.rows = state.log_rows;
  outcome.best_epoch = state.best_epoch;
  outcome.best_val_mse_db = state.best_val_mse_db;
  outcome.start_epoch = resumed ? first_epoch : 1;
  return outcome;
}

double evaluate_mse_db(const Estimator& estimator, const Dataset& test_set,
                       int* excluded_count) {
  if (test_set.p() < 1) throw DomainError("evaluate_mse_db: empty test set");
  double ratio_sum = 0.0;
  int used = 0;
  int excluded = 0;
  for (int p = 0; p < test_set.p(); ++p) {
    TrainingSample s = test_set.sample(p);
    const double xn = norm2(s.x);
    if (xn == 0.0) {
      ++excluded;
      continue;
    }
    SplitComplexVector x_hat = estimator(s.y);
    SplitComplexVector d = x_hat;
    d.re -= s.x.re;
    d.im -= s.x.im;
    const double en = norm2(d);
    ratio_sum += (en * en) / (xn * xn);
    ++used;
  }
  if (excluded_count) *excluded_count = excluded;
  if (used == 0) throw DomainError("evaluate_mse_db: no usable samples");
  const double mean_ratio = ratio_sum / used;
  if (mean_ratio <= 0.0) return -300.0;
  return std::max(10.0 * std::log10(mean_ratio), -300.0);
}

// ---------------------------------------------------------------------------
// dataset container

namespace {
constexpr char kDataMagic[8] = {'U', 'D', 'N', 'N', 'D', 'A', 'T', '1'};
}

void save_dataset(const Dataset& data, const std::string& path) {
  nlohmann::json header;
  header["format"] = "udnn.dataset";
  header["version"] = 1;
  header["p"] = data.p();
  header["n"] = data.n();
  header["m"] = data.m();
  header["noiseless"] = data.noiseless;
  header["snr_db"] = data.snr_db;
  header["seed"] = data.base_seed;
  header["grid_fingerprint"] = fingerprint_hex(data.grid_fingerprint);
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out.write(kDataMagic, sizeof kDataMagic);
  const std::uint32_t len = static_cast<std::uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  write_matrix(out, data.y_re);
  write_matrix(out, data.y_im);
  write_matrix(out, data.x_re);
  write_matrix(out, data.x_im);
  out.write(reinterpret_cast<const char*>(data.seeds.data()),
            static_cast<std::streamsize>(data.seeds.size() * sizeof(std::uint64_t)));
  out.write(reinterpret_cast<const char*>(data.j_paths.data()),
            static_cast<std::streamsize>(data.j_paths.size() * sizeof(std::uint32_t)));
  if (!out) throw IoError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for read: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic ||
      std::memcmp(magic, kDataMagic, sizeof magic) != 0)
    throw IntegrityError("not a dataset file: " + path);
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string header_text(len, '\0');
  in.read(header_text.data(), len);
  if (in.gcount() != static_cast<std::streamsize>(len))
    throw IntegrityError("truncated dataset: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("bad dataset header: ") + e.what());
  }
  if (header.value("format", "") != "udnn.dataset" || header.value("version", 0) != 1)
    throw IntegrityError("unknown dataset format/version: " + path);

  Dataset data;
  const int p = header.at("p");
  const int n = header.at("n");
  const int m = header.at("m");
  if (p < 1 || n < 1 || m < 1)
    throw IntegrityError("bad dataset shapes: " + path);
  data.noiseless = header.at("noiseless");
  data.snr_db = header.at("snr_db");
  data.base_seed = header.at("seed");
  data.grid_fingerprint =
      fingerprint_from_hex(header.at("grid_fingerprint").get<std::string>());
  data.y_re.resize(p, n);
  data.y_im.resize(p, n);
  data.x_re.resize(p, m);
  data.x_im.resize(p, m);
  data.seeds.resize(p);
  data.j_paths.resize(p);
  read_matrix(in, data.y_re, path);
  read_matrix(in, data.y_im, path);
  read_matrix(in, data.x_re, path);
  read_matrix(in, data.x_im, path);
  in.read(reinterpret_cast<char*>(data.seeds.data()),
          static_cast<std::streamsize>(data.seeds.size() * sizeof(std::uint64_t)));
  if (in.gcount() !=
      static_cast<std::streamsize>(data.seeds.size() * sizeof(std::uint64_t)))
    throw IntegrityError("truncated dataset: " + path);
  in.read(reinterpret_cast<char*>(data.j_paths.data()),
          static_cast<std::streamsize>(data.j_paths.size() * sizeof(std::uint32_t)));
  if (in.gcount() !=
      static_cast<std::streamsize>(data.j_paths.size() * sizeof(std::uint32_t)))
    throw IntegrityError("truncated dataset: " + path);
  if (!data.y_re.allFinite() || !data.y_im.allFinite() ||
      !data.x_re.allFinite() || !data.x_im.allFinite())
    throw IntegrityError("dataset contains non-finite values: " + path);
  return data;
}

}  // namespace udnn
