#include "udnn/signal_model.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "udnn/errors.hpp"
#include "udnn/fingerprint.hpp"
#include "udnn/rng.hpp"

namespace udnn {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void check_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v < 1.0))
    throw DomainError(std::string(name) + " must lie in [0, 1)");
}

std::uint64_t model_fingerprint(const OfdmConfig& config,
                                const FrequencyGrid& grid,
                                const SplitComplexVector& symbols) {
  Fingerprint fp;
  fp.add(std::string("measurement_model.v1"));
  fp.add(config.n_data);
  fp.add(config.n_cp);
  fp.add(config.n_blocks);
  fp.add(config.sample_period);
  fp.add(static_cast<std::uint64_t>(grid.delay_points.size()));
  for (double v : grid.delay_points) fp.add(v);
  fp.add(static_cast<std::uint64_t>(grid.doppler_points.size()));
  for (double v : grid.doppler_points) fp.add(v);
  fp.add(static_cast<std::uint64_t>(symbols.size()));
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    fp.add(symbols.re[i]);
    fp.add(symbols.im[i]);
  }
  return fp.value();
}

}  // namespace

std::string fingerprint_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fingerprint_from_hex(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

void OfdmConfig::validate() const {
  if (n_data < 1) throw DomainError("OfdmConfig: n_data must be >= 1");
  if (n_cp < 0) throw DomainError("OfdmConfig: n_cp must be >= 0");
  if (n_blocks < 1) throw DomainError("OfdmConfig: n_blocks must be >= 1");
  if (!(sample_period > 0))
    throw DomainError("OfdmConfig: sample_period must be > 0");
}

void PathSet::validate() const {
  if (delays.size() != gains.size() || dopplers.size() != gains.size())
    throw ShapeError("PathSet: gains/delays/dopplers length mismatch");
  for (double t : delays) check_unit_interval(t, "PathSet delay");
  for (double f : dopplers) check_unit_interval(f, "PathSet doppler");
}

void FrequencyGrid::validate() const {
  auto check_axis = [](const std::vector<double>& pts, const char* name) {
    if (pts.empty()) throw DomainError(std::string(name) + ": empty grid axis");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      check_unit_interval(pts[i], name);
      if (i > 0 && !(pts[i] > pts[i - 1]))
        throw DomainError(std::string(name) + ": points must be increasing");
    }
  };
  check_axis(delay_points, "FrequencyGrid delay");
  check_axis(doppler_points, "FrequencyGrid doppler");
}

FrequencyGrid build_grid(int g_delay, int g_doppler) {
  if (g_delay < 1 || g_doppler < 1)
    throw DomainError("build_grid: grid sizes must be >= 1");
  FrequencyGrid grid;
  grid.delay_points.resize(g_delay);
  grid.doppler_points.resize(g_doppler);
  for (int i = 0; i < g_delay; ++i)
    grid.delay_points[i] = static_cast<double>(i) / g_delay;
  for (int j = 0; j < g_doppler; ++j)
    grid.doppler_points[j] = static_cast<double>(j) / g_doppler;
  return grid;
}

SplitComplexVector steering_doppler(double f, int n_blocks) {
  check_unit_interval(f, "steering_doppler f");
  if (n_blocks < 1) throw DomainError("steering_doppler: n_blocks must be >= 1");
  SplitComplexVector s = SplitComplexVector::zero(n_blocks);
  for (int n = 0; n < n_blocks; ++n) {
    s.re[n] = std::cos(kTwoPi * n * f);
    s.im[n] = std::sin(kTwoPi * n * f);
  }
  return s;
}

SplitComplexVector steering_delay(double tau, int n_data) {
  check_unit_interval(tau, "steering_delay tau");
  if (n_data < 1) throw DomainError("steering_delay: n_data must be >= 1");
  SplitComplexVector d = SplitComplexVector::zero(n_data);
  for (int k = 0; k < n_data; ++k) {
    d.re[k] = std::cos(kTwoPi * k * tau);
    d.im[k] = std::sin(kTwoPi * k * tau);
  }
  return d;
}

SplitComplexVector atom(double tau, double f, const OfdmConfig& config) {
  config.validate();
  SplitComplexVector d = steering_delay(tau, config.n_data);
  SplitComplexVector s = steering_doppler(f, config.n_blocks);
  SplitComplexVector a = SplitComplexVector::zero(config.vec_size());
  for (int k = 0; k < config.n_data; ++k) {
    // conj(d_k) * s_n at Kronecker position k * n_blocks + n
    const double dr = d.re[k];
    const double di = -d.im[k];
    for (int n = 0; n < config.n_blocks; ++n) {
      const Eigen::Index idx = static_cast<Eigen::Index>(k) * config.n_blocks + n;
      a.re[idx] = dr * s.re[n] - di * s.im[n];
      a.im[idx] = dr * s.im[n] + di * s.re[n];
    }
  }
  return a;
}

MeasurementModel build_measurement_model(const OfdmConfig& config,
                                         const FrequencyGrid& grid,
                                         const SplitComplexVector& symbols) {
  config.validate();
  grid.validate();
  const int n = config.vec_size();
  const int m = grid.size();
  if (symbols.size() != n)
    throw ShapeError("build_measurement_model: symbols length must equal N");

  MeasurementModel model;
  model.config = config;
  model.grid = grid;
  model.symbols = symbols;
  model.dictionary = SplitComplexMatrix::zero(n, m);
  model.a_matrix = SplitComplexMatrix::zero(n, m);

  const int g_f = static_cast<int>(grid.doppler_points.size());
  for (std::size_t di = 0; di < grid.delay_points.size(); ++di) {
    for (int fj = 0; fj < g_f; ++fj) {
      const int col = static_cast<int>(di) * g_f + fj;
      SplitComplexVector a =
          atom(grid.delay_points[di], grid.doppler_points[fj], config);
      for (int row = 0; row < n; ++row) {
        model.dictionary.re(row, col) = a.re[row];
        model.dictionary.im(row, col) = a.im[row];
        // A = diag(symbols) * Phi, rowwise complex scaling
        const double br = symbols.re[row];
        const double bi = symbols.im[row];
        model.a_matrix.re(row, col) = br * a.re[row] - bi * a.im[row];
        model.a_matrix.im(row, col) = br * a.im[row] + bi * a.re[row];
      }
    }
  }

  model.lipschitz = largest_eigenvalue_gram(model.a_matrix);
  model.fingerprint = model_fingerprint(config, grid, symbols);
  return model;
}

MeasurementModel build_measurement_model(const OfdmConfig& config,
                                         const FrequencyGrid& grid) {
  SplitComplexVector ones = SplitComplexVector::zero(config.vec_size());
  ones.re.setOnes();
  return build_measurement_model(config, grid, ones);
}

namespace {

int grid_index_of(const std::vector<double>& pts, double v, const char* what) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (std::abs(pts[i] - v) <= 1e-12) return static_cast<int>(i);
  throw DomainError(std::string("synthesize_ground_truth_x: off-grid ") + what);
}

}  // namespace

SplitComplexVector synthesize_ground_truth_x(const PathSet& paths,
                                             const FrequencyGrid& grid) {
  paths.validate();
  grid.validate();
  SplitComplexVector x = SplitComplexVector::zero(grid.size());
  std::vector<bool> used(grid.size(), false);
  for (std::size_t l = 0; l < paths.size(); ++l) {
    const int di = grid_index_of(grid.delay_points, paths.delays[l], "delay");
    const int fj = grid_index_of(grid.doppler_points, paths.dopplers[l], "doppler");
    const int col = grid.column_of(di, fj);
    if (used[col])
      throw DomainError("synthesize_ground_truth_x: duplicate path support");
    used[col] = true;
    x.set(col, paths.gains[l]);
  }
  return x;
}

namespace {

SplitComplexVector add_noise(SplitComplexVector y, double sigma_w,
                             std::uint64_t rng_seed) {
  if (sigma_w < 0) throw DomainError("synthesize_measurement: sigma_w < 0");
  if (sigma_w > 0) {
    Rng rng(rng_seed);
    const double part_sigma = sigma_w / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y.re[i] += part_sigma * rng.gaussian();
      y.im[i] += part_sigma * rng.gaussian();
    }
  }
  return y;
}

}  // namespace

SplitComplexVector synthesize_measurement(const SplitComplexVector& x,
                                          const MeasurementModel& model,
                                          double sigma_w,
                                          std::uint64_t rng_seed) {
  if (x.size() != model.m())
    throw ShapeError("synthesize_measurement: x length must equal M");
  return add_noise(cmul_mat_vec(model.a_matrix, x), sigma_w, rng_seed);
}

SplitComplexVector synthesize_measurement_offgrid(const PathSet& paths,
                                                  const MeasurementModel& model,
                                                  double sigma_w,
                                                  std::uint64_t rng_seed) {
  paths.validate();
  const int n = model.n();
  SplitComplexVector y = SplitComplexVector::zero(n);
  for (std::size_t l = 0; l < paths.size(); ++l) {
    SplitComplexVector a =
        atom(paths.delays[l], paths.dopplers[l], model.config);
    y = cvec_axpby(paths.gains[l], a, {1.0, 0.0}, y);
  }
  // scale by the symbols rowwise
  for (int i = 0; i < n; ++i) {
    const std::complex<double> b = model.symbols.at(i);
    y.set(i, b * y.at(i));
  }
  return add_noise(std::move(y), sigma_w, rng_seed);
}

double mean_power(const SplitComplexVector& y) {
  if (y.size() == 0) throw DomainError("mean_power: empty vector");
  const double n2 = norm2(y);
  return n2 * n2 / static_cast<double>(y.size());
}

double snr_to_sigma(double snr_db, double signal_power) {
  if (!(signal_power > 0))
    throw DomainError("snr_to_sigma: signal_power must be > 0");
  return std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
}

SplitComplexMatrix matched_filter_oracle(const std::vector<RawPath>& paths,
                                         const OfdmConfig& config,
                                         const SplitComplexMatrix& symbols_block,
                                         int n_quad) {
  config.validate();
  if (n_quad < 64) throw DomainError("matched_filter_oracle: n_quad must be >= 64");
  if (symbols_block.rows() != config.n_blocks ||
      symbols_block.cols() != config.n_data)
    throw ShapeError("matched_filter_oracle: symbols_block must be N_b x N_d");
  const double t_unit = config.sample_period;
  const double cp_duration = config.n_cp * t_unit;
  for (const RawPath& p : paths) {
    if (!(p.delay_s >= 0.0) || !(p.delay_s < cp_duration))
      throw DomainError("matched_filter_oracle: delay outside [0, CP duration)");
  }
  if (n_quad % 2 != 0) ++n_quad;  // composite Simpson needs an even count

  const int nb = config.n_blocks;
  const int nd = config.n_data;
  const double nd_t = nd * t_unit;
  const double nu_t = config.n_units() * t_unit;

  SplitComplexMatrix out = SplitComplexMatrix::zero(nb, nd);
  for (int n = 0; n < nb; ++n) {
    const double t0 = n * nu_t;
    const double h = nd_t / n_quad;
    for (int k = 0; k < nd; ++k) {
      std::complex<double> acc = 0.0;
      for (int q_idx = 0; q_idx <= n_quad; ++q_idx) {
        const double t = t0 + q_idx * h;
        // integrand: sum_l c_l e^{i2pi fbar t} sum_q bhat_n(q)
        //            e^{i2pi q (t - taubar_l)/(N_d T)} e^{-i2pi k t/(N_d T)}
        std::complex<double> val = 0.0;
        for (const RawPath& p : paths) {
          const std::complex<double> doppler_phase =
              std::polar(1.0, kTwoPi * p.doppler_hz * t);
          std::complex<double> sym_sum = 0.0;
          for (int q = 0; q < nd; ++q) {
            const std::complex<double> bq = symbols_block.at(n, q);
            const double phase = kTwoPi * (q * (t - p.delay_s) - k * t) / nd_t;
            sym_sum += bq * std::polar(1.0, phase);
          }
          val += p.gain * doppler_phase * sym_sum;
        }
        const double w = (q_idx == 0 || q_idx == n_quad) ? 1.0
                         : (q_idx % 2 == 1)              ? 4.0
                                                         : 2.0;
        acc += w * val;
      }
      acc *= h / 3.0 / nd_t;  // Simpson weights and the 1/(N_d T) prefactor
      if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
        throw NumericError("matched_filter_oracle: non-finite quadrature");
      out.set(n, k, acc);
    }
  }
  return out;
}

SplitComplexMatrix matched_filter_closed_form(
    const std::vector<RawPath>& paths, const OfdmConfig& config,
    const SplitComplexMatrix& symbols_block) {
  config.validate();
  if (symbols_block.rows() != config.n_blocks ||
      symbols_block.cols() != config.n_data)
    throw ShapeError("matched_filter_closed_form: symbols_block must be N_b x N_d");
  const double t_unit = config.sample_period;
  const double nd_t = config.n_data * t_unit;
  const double nu_t = config.n_units() * t_unit;

  SplitComplexMatrix out =
      SplitComplexMatrix::zero(config.n_blocks, config.n_data);
  for (const RawPath& p : paths) {
    const double tau = p.delay_s / nd_t;        // normalized delay
    const double f = p.doppler_hz * nu_t;       // normalized Doppler
    for (int n = 0; n < config.n_blocks; ++n) {
      for (int k = 0; k < config.n_data; ++k) {
        const std::complex<double> ph =
            std::polar(1.0, kTwoPi * (n * f - k * tau));
        out.set(n, k, out.at(n, k) + symbols_block.at(n, k) * p.gain * ph);
      }
    }
  }
  return out;
}

std::string measurement_model_to_json(const MeasurementModel& model) {
  nlohmann::json j;
  j["format"] = "udnn.measurement_model";
  j["version"] = 1;
  j["config"] = {{"n_data", model.config.n_data},
                 {"n_cp", model.config.n_cp},
                 {"n_blocks", model.config.n_blocks},
                 {"sample_period", model.config.sample_period}};
  j["grid"] = {{"delay_points", model.grid.delay_points},
               {"doppler_points", model.grid.doppler_points}};
  std::vector<double> sym_re(model.symbols.re.data(),
                             model.symbols.re.data() + model.symbols.size());
  std::vector<double> sym_im(model.symbols.im.data(),
                             model.symbols.im.data() + model.symbols.size());
  j["symbols"] = {{"re", sym_re}, {"im", sym_im}};
  j["lipschitz"] = model.lipschitz;
  j["column_ordering"] = "delay_major";
  j["fingerprint"] = fingerprint_hex(model.fingerprint);
  return j.dump(2);
}

MeasurementModel measurement_model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("measurement model JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "udnn.measurement_model" || j.at("version") != 1)
      throw IntegrityError("measurement model JSON: unknown format/version");
    OfdmConfig config;
    config.n_data = j.at("config").at("n_data");
    config.n_cp = j.at("config").at("n_cp");
    config.n_blocks = j.at("config").at("n_blocks");
    config.sample_period = j.at("config").at("sample_period");
    FrequencyGrid grid;
    grid.delay_points = j.at("grid").at("delay_points").get<std::vector<double>>();
    grid.doppler_points =
        j.at("grid").at("doppler_points").get<std::vector<double>>();
    std::vector<double> sym_re = j.at("symbols").at("re");
    std::vector<double> sym_im = j.at("symbols").at("im");
    SplitComplexVector symbols(
        Eigen::Map<const RealVector>(sym_re.data(), sym_re.size()),
        Eigen::Map<const RealVector>(sym_im.data(), sym_im.size()));
    MeasurementModel model = build_measurement_model(config, grid, symbols);
    const std::uint64_t stored =
        fingerprint_from_hex(j.at("fingerprint").get<std::string>());
    if (stored != model.fingerprint)
      throw IntegrityError("measurement model JSON: fingerprint mismatch");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("measurement model JSON: ") + e.what());
  }
}

void save_measurement_model(const MeasurementModel& model,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  out << measurement_model_to_json(model) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

MeasurementModel load_measurement_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for read: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return measurement_model_from_json(ss.str());
}

}  // namespace udnn
