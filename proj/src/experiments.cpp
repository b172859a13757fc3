#include "udnn/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <thread>

#include "udnn/errors.hpp"
#include "udnn/fingerprint.hpp"
#include "udnn/ista.hpp"
#include "udnn/model_io.hpp"
#include "udnn/rng.hpp"

namespace udnn {

namespace {

namespace fs = std::filesystem;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void parallel_for(int total, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, total));
  if (threads == 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= total) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// J distinct on-grid locations, gain parts uniform on [-1, 1]
SplitComplexVector draw_sparse_x(const MeasurementModel& model, int j,
                                 std::uint64_t seed) {
  Rng rng(mix_seed(seed, 1));
  const int m = model.m();
  std::vector<int> cols(m);
  std::iota(cols.begin(), cols.end(), 0);
  SplitComplexVector x = SplitComplexVector::zero(m);
  for (int l = 0; l < j; ++l) {
    const int pick = l + rng.uniform_int(m - l);
    std::swap(cols[l], cols[pick]);
    x.re[cols[l]] = rng.uniform(-1.0, 1.0);
    x.im[cols[l]] = rng.uniform(-1.0, 1.0);
  }
  return x;
}

std::vector<int> support_of(const SplitComplexVector& x) {
  std::vector<int> support;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x.re[i] != 0.0 || x.im[i] != 0.0) support.push_back(static_cast<int>(i));
  return support;
}

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << " ";
    out << v[i];
  }
  return out.str();
}

double mean_ratio_db(const std::vector<double>& ratios) {
  double sum = 0.0;
  for (double r : ratios) sum += r;
  const double mean = sum / static_cast<double>(ratios.size());
  if (mean <= 0.0) return -300.0;
  return std::max(10.0 * std::log10(mean), -300.0);
}

double error_ratio(const SplitComplexVector& x_hat,
                   const SplitComplexVector& x_true) {
  SplitComplexVector d = x_hat;
  d.re -= x_true.re;
  d.im -= x_true.im;
  const double xn = norm2(x_true);
  if (xn == 0.0) return norm2(d) == 0.0 ? 0.0 : 1.0;
  const double en = norm2(d);
  return (en * en) / (xn * xn);
}

UdnnModel load_or_init_model(const std::string& model_path,
                             const MeasurementModel& measurement,
                             const ExperimentConfig& cfg, bool* used_trained) {
  if (!model_path.empty()) {
    UdnnModel model = load_model(model_path);
    require_compatible(model, measurement);
    if (used_trained) *used_trained = true;
    return model;
  }
  std::cerr << "warning: no trained model given, falling back to the "
               "ISTA-initialized network\n";
  if (used_trained) *used_trained = false;
  return init_from_ista(measurement, cfg.k_layers, cfg.init_lambda);
}

std::string fingerprint_line_of(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::string first_line;
  std::getline(in, first_line);
  const std::string csv_key = "# config_fingerprint=";
  if (first_line.rfind(csv_key, 0) == 0) return first_line.substr(csv_key.size());
  // JSON outputs carry a "config_fingerprint" field
  in.seekg(0);
  try {
    nlohmann::json j;
    in >> j;
    if (j.is_object() && j.contains("config_fingerprint"))
      return j["config_fingerprint"].get<std::string>();
  } catch (...) {
  }
  return {};
}

}  // namespace

void ensure_output_compatible(const std::string& path,
                              std::uint64_t fingerprint, bool force) {
  if (force || !fs::exists(path)) return;
  const std::string existing = fingerprint_line_of(path);
  if (!existing.empty() && existing != fingerprint_hex(fingerprint))
    throw IntegrityError(
        "refusing to overwrite " + path +
        ": it was produced by a different config (use --force to override)");
}

void ExperimentConfig::validate() const {
  ofdm.validate();
  if (grid_delay < 1 || grid_doppler < 1)
    throw DomainError("ExperimentConfig: grid sizes must be >= 1");
  if (j_paths < 0) throw DomainError("ExperimentConfig: j_paths must be >= 0");
  if (trials < 1) throw DomainError("ExperimentConfig: trials must be >= 1");
  if (k_layers < 1) throw DomainError("ExperimentConfig: k_layers must be >= 1");
  if (init_lambda < 0)
    throw DomainError("ExperimentConfig: init_lambda must be >= 0");
  if (ista_lambda < 0)
    throw DomainError("ExperimentConfig: ista_lambda must be >= 0");
  if (!(ista_tol > 0)) throw DomainError("ExperimentConfig: ista_tol must be > 0");
  if (ista_max_iter < 1)
    throw DomainError("ExperimentConfig: ista_max_iter must be >= 1");
  train.validate();
}

std::uint64_t ExperimentConfig::fingerprint() const {
  Fingerprint fp;
  fp.add(std::string("experiment_config.v1"));
  fp.add(ofdm.n_data);
  fp.add(ofdm.n_cp);
  fp.add(ofdm.n_blocks);
  fp.add(ofdm.sample_period);
  fp.add(grid_delay);
  fp.add(grid_doppler);
  fp.add(j_paths);
  fp.add(trials);
  fp.add(static_cast<std::uint64_t>(snr_list_db.size()));
  for (double s : snr_list_db) fp.add(s);
  fp.add(seed);
  fp.add(k_layers);
  fp.add(init_lambda);
  fp.add(ista_lambda);
  fp.add(ista_tol);
  fp.add(ista_max_iter);
  fp.add(train.n_samples);
  fp.add(train.epochs);
  fp.add(train.batch_size);
  fp.add(train.j_max);
  fp.add(static_cast<int>(train.noiseless));
  fp.add(train.snr_db);
  fp.add(train.seed);
  fp.add(train.lr);
  fp.add(train.beta1);
  fp.add(train.beta2);
  fp.add(train.eps);
  fp.add(train.val_fraction);
  return fp.value();
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["ofdm"] = {{"n_data", ofdm.n_data},
               {"n_cp", ofdm.n_cp},
               {"n_blocks", ofdm.n_blocks},
               {"sample_period", ofdm.sample_period}};
  j["grid"] = {{"delay", grid_delay}, {"doppler", grid_doppler}};
  j["j_paths"] = j_paths;
  j["trials"] = trials;
  j["snr_list_db"] = snr_list_db;
  j["seed"] = seed;
  j["k_layers"] = k_layers;
  j["init_lambda"] = init_lambda;
  j["ista"] = {{"lambda", ista_lambda},
               {"tol", ista_tol},
               {"max_iter", ista_max_iter}};
  j["train"] = {{"n_samples", train.n_samples},
                {"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"j_max", train.j_max},
                {"noiseless", train.noiseless},
                {"snr_db", train.snr_db},
                {"seed", train.seed},
                {"lr", train.lr},
                {"beta1", train.beta1},
                {"beta2", train.beta2},
                {"eps", train.eps},
                {"val_fraction", train.val_fraction}};
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("ofdm")) {
      const auto& o = j["ofdm"];
      cfg.ofdm.n_data = o.value("n_data", cfg.ofdm.n_data);
      cfg.ofdm.n_cp = o.value("n_cp", cfg.ofdm.n_cp);
      cfg.ofdm.n_blocks = o.value("n_blocks", cfg.ofdm.n_blocks);
      cfg.ofdm.sample_period = o.value("sample_period", cfg.ofdm.sample_period);
    }
    if (j.contains("grid")) {
      cfg.grid_delay = j["grid"].value("delay", cfg.grid_delay);
      cfg.grid_doppler = j["grid"].value("doppler", cfg.grid_doppler);
    }
    cfg.j_paths = j.value("j_paths", cfg.j_paths);
    cfg.trials = j.value("trials", cfg.trials);
    if (j.contains("snr_list_db"))
      cfg.snr_list_db = j["snr_list_db"].get<std::vector<double>>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.k_layers = j.value("k_layers", cfg.k_layers);
    cfg.init_lambda = j.value("init_lambda", cfg.init_lambda);
    if (j.contains("ista")) {
      const auto& s = j["ista"];
      cfg.ista_lambda = s.value("lambda", cfg.ista_lambda);
      cfg.ista_tol = s.value("tol", cfg.ista_tol);
      cfg.ista_max_iter = s.value("max_iter", cfg.ista_max_iter);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      cfg.train.n_samples = t.value("n_samples", cfg.train.n_samples);
      cfg.train.epochs = t.value("epochs", cfg.train.epochs);
      cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
      cfg.train.j_max = t.value("j_max", cfg.train.j_max);
      cfg.train.noiseless = t.value("noiseless", cfg.train.noiseless);
      cfg.train.snr_db = t.value("snr_db", cfg.train.snr_db);
      cfg.train.seed = t.value("seed", cfg.train.seed);
      cfg.train.lr = t.value("lr", cfg.train.lr);
      cfg.train.beta1 = t.value("beta1", cfg.train.beta1);
      cfg.train.beta2 = t.value("beta2", cfg.train.beta2);
      cfg.train.eps = t.value("eps", cfg.train.eps);
      cfg.train.val_fraction = t.value("val_fraction", cfg.train.val_fraction);
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.threads = j.value("threads", cfg.threads);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  out << to_json() << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::string results_to_json(const std::vector<ResultRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRecord& r : records) {
    nlohmann::json j = {{"method", r.method},
                        {"mse_db", r.mse_db},
                        {"mean_iterations_or_layers", r.mean_iterations_or_layers},
                        {"wall_time_s", r.wall_time_s},
                        {"trials", r.trials},
                        {"config_fingerprint", fingerprint_hex(r.config_fingerprint)}};
    if (r.has_snr)
      j["snr_db"] = r.snr_db;
    else
      j["snr_db"] = nullptr;
    arr.push_back(j);
  }
  nlohmann::json out;
  out["config_fingerprint"] =
      records.empty() ? "" : fingerprint_hex(records.front().config_fingerprint);
  out["results"] = arr;
  return out.dump(2);
}

ExampleOutcome cmd_example(const ExperimentConfig& cfg,
                           const std::string& model_path) {
  cfg.validate();
  const std::uint64_t fp = cfg.fingerprint();
  MeasurementModel measurement =
      build_measurement_model(cfg.ofdm, build_grid(cfg.grid_delay, cfg.grid_doppler));

  ExampleOutcome outcome;
  UdnnModel net = load_or_init_model(model_path, measurement, cfg,
                                     &outcome.used_trained_model);

  SplitComplexVector x = draw_sparse_x(measurement, cfg.j_paths, cfg.seed);
  SplitComplexVector y = synthesize_measurement(x, measurement, 0.0, 0);

  IstaConfig ista_cfg = IstaConfig::for_model(measurement, cfg.ista_lambda,
                                              cfg.ista_tol, cfg.ista_max_iter);
  IstaResult ista = ista_solve(y, measurement, ista_cfg);
  SplitComplexVector udnn_hat = forward(net, y);

  outcome.true_support = support_of(x);
  outcome.ista_support = support_of(ista.x_hat);
  outcome.udnn_support = support_of(udnn_hat);

  fs::create_directories(cfg.output_dir);
  outcome.csv_path = (fs::path(cfg.output_dir) / "example.csv").string();
  ensure_output_compatible(outcome.csv_path, fp, cfg.force);
  std::ofstream out(outcome.csv_path);
  if (!out) throw IoError("cannot open for write: " + outcome.csv_path);
  out << "# config_fingerprint=" << fingerprint_hex(fp) << "\n";
  out << "grid_index,delay_point,doppler_point,true_re,true_im,ista_re,ista_im,"
         "udnn_re,udnn_im\n";
  out << std::setprecision(17);
  const int g_f = static_cast<int>(measurement.grid.doppler_points.size());
  for (int col = 0; col < measurement.m(); ++col) {
    const int di = col / g_f;
    const int fj = col % g_f;
    out << col << "," << measurement.grid.delay_points[di] << ","
        << measurement.grid.doppler_points[fj] << "," << x.re[col] << ","
        << x.im[col] << "," << ista.x_hat.re[col] << "," << ista.x_hat.im[col]
        << "," << udnn_hat.re[col] << "," << udnn_hat.im[col] << "\n";
  }
  if (!out) throw IoError("write failed: " + outcome.csv_path);

  std::cout << "true support: " << join_ints(outcome.true_support) << "\n";
  std::cout << "ista support: " << join_ints(outcome.ista_support)
            << " (iterations " << ista.iterations << ")\n";
  std::cout << "udnn support: " << join_ints(outcome.udnn_support) << "\n";
  return outcome;
}

BenchOutcome cmd_bench(const ExperimentConfig& cfg,
                       const std::string& model_path) {
  cfg.validate();
  const std::uint64_t fp = cfg.fingerprint();
  MeasurementModel measurement =
      build_measurement_model(cfg.ofdm, build_grid(cfg.grid_delay, cfg.grid_doppler));
  UdnnModel net = load_or_init_model(model_path, measurement, cfg, nullptr);

  // prebuild all instances; nothing below allocates files or matrices
  // inside the timed loops
  const int trials = cfg.trials;
  std::vector<SplitComplexVector> xs(trials), ys(trials);
  for (int t = 0; t < trials; ++t) {
    xs[t] = draw_sparse_x(measurement, cfg.j_paths, mix_seed(cfg.seed, t));
    ys[t] = synthesize_measurement(xs[t], measurement, 0.0, 0);
  }
  IstaConfig ista_cfg = IstaConfig::for_model(measurement, cfg.ista_lambda,
                                              cfg.ista_tol, cfg.ista_max_iter);

  std::vector<double> ista_ratio(trials), udnn_ratio(trials);
  double iter_sum = 0.0;

  // timed single-threaded by contract
  const double t0 = now_seconds();
  for (int t = 0; t < trials; ++t) {
    IstaResult r = ista_solve(ys[t], measurement, ista_cfg);
    ista_ratio[t] = error_ratio(r.x_hat, xs[t]);
    iter_sum += r.iterations;
  }
  const double ista_wall = now_seconds() - t0;

  const double t1 = now_seconds();
  for (int t = 0; t < trials; ++t)
    udnn_ratio[t] = error_ratio(forward(net, ys[t]), xs[t]);
  const double udnn_wall = now_seconds() - t1;

  BenchOutcome outcome;
  outcome.ista = {"ista",     false,     0.0, mean_ratio_db(ista_ratio),
                  iter_sum / trials, ista_wall, trials, fp};
  outcome.udnn = {"udnn",     false,     0.0, mean_ratio_db(udnn_ratio),
                  static_cast<double>(net.k_layers()), udnn_wall, trials, fp};

  fs::create_directories(cfg.output_dir);
  outcome.table_path = (fs::path(cfg.output_dir) / "bench.csv").string();
  ensure_output_compatible(outcome.table_path, fp, cfg.force);
  std::ofstream out(outcome.table_path);
  if (!out) throw IoError("cannot open for write: " + outcome.table_path);
  out << "# config_fingerprint=" << fingerprint_hex(fp) << "\n";
  out << "method,mse_db,mean_iterations_or_layers,wall_time_s,trials\n";
  out << std::setprecision(10);
  for (const ResultRecord* r : {&outcome.ista, &outcome.udnn})
    out << r->method << "," << r->mse_db << "," << r->mean_iterations_or_layers
        << "," << r->wall_time_s << "," << r->trials << "\n";
  if (!out) throw IoError("write failed: " + outcome.table_path);

  const std::string json_path = (fs::path(cfg.output_dir) / "bench.json").string();
  ensure_output_compatible(json_path, fp, cfg.force);
  std::ofstream jout(json_path);
  jout << results_to_json({outcome.ista, outcome.udnn}) << "\n";

  std::cout << "method  mse_db      iters/layers  wall_s\n";
  for (const ResultRecord* r : {&outcome.ista, &outcome.udnn})
    std::cout << std::left << std::setw(7) << r->method << " " << std::setw(11)
              << r->mse_db << " " << std::setw(13) << r->mean_iterations_or_layers
              << " " << r->wall_time_s << "\n";
  return outcome;
}

SweepOutcome cmd_snr_sweep(const ExperimentConfig& cfg,
                           const std::string& model_path) {
  cfg.validate();
  if (cfg.snr_list_db.empty())
    throw DomainError("cmd_snr_sweep: snr_list_db must be nonempty");
  const std::uint64_t fp = cfg.fingerprint();
  MeasurementModel measurement =
      build_measurement_model(cfg.ofdm, build_grid(cfg.grid_delay, cfg.grid_doppler));
  UdnnModel net = load_or_init_model(model_path, measurement, cfg, nullptr);

  const int trials = cfg.trials;
  const int n_snr = static_cast<int>(cfg.snr_list_db.size());
  std::vector<std::vector<double>> ista_ratio(n_snr,
                                              std::vector<double>(trials));
  std::vector<std::vector<double>> udnn_ratio(n_snr,
                                              std::vector<double>(trials));

  parallel_for(trials, cfg.threads, [&](int t) {
    const std::uint64_t seed_t = mix_seed(cfg.seed, t);
    SplitComplexVector x = draw_sparse_x(measurement, cfg.j_paths, seed_t);
    SplitComplexVector y0 = synthesize_measurement(x, measurement, 0.0, 0);
    const double power = mean_power(y0);
    const std::uint64_t noise_seed = mix_seed(seed_t, 2);
    for (int s = 0; s < n_snr; ++s) {
      // common random numbers across SNR points: the same seed scales the
      // same noise direction to each sigma
      const double sigma = power > 0 ? snr_to_sigma(cfg.snr_list_db[s], power) : 0.0;
      SplitComplexVector y =
          synthesize_measurement(x, measurement, sigma, noise_seed);
      const double lambda = select_lambda(LambdaMode::kNoisy, sigma, measurement.n());
      IstaConfig ista_cfg = IstaConfig::for_model(
          measurement, lambda, cfg.ista_tol, cfg.ista_max_iter);
      IstaResult r = ista_solve(y, measurement, ista_cfg);
      ista_ratio[s][t] = error_ratio(r.x_hat, x);
      udnn_ratio[s][t] = error_ratio(forward(net, y), x);
    }
  });

  SweepOutcome outcome;
  outcome.points.resize(n_snr);
  for (int s = 0; s < n_snr; ++s) {
    outcome.points[s].snr_db = cfg.snr_list_db[s];
    outcome.points[s].ista_mse_db = mean_ratio_db(ista_ratio[s]);
    outcome.points[s].udnn_mse_db = mean_ratio_db(udnn_ratio[s]);
  }
  for (int s = 0; s + 1 < n_snr; ++s) {
    outcome.ista_worst_increase_db =
        std::max(outcome.ista_worst_increase_db,
                 outcome.points[s + 1].ista_mse_db - outcome.points[s].ista_mse_db);
    outcome.udnn_worst_increase_db =
        std::max(outcome.udnn_worst_increase_db,
                 outcome.points[s + 1].udnn_mse_db - outcome.points[s].udnn_mse_db);
  }

  fs::create_directories(cfg.output_dir);
  outcome.csv_path = (fs::path(cfg.output_dir) / "snr_sweep.csv").string();
  ensure_output_compatible(outcome.csv_path, fp, cfg.force);
  std::ofstream out(outcome.csv_path);
  if (!out) throw IoError("cannot open for write: " + outcome.csv_path);
  out << "# config_fingerprint=" << fingerprint_hex(fp) << "\n";
  out << "snr_db,method,mse_db\n";
  out << std::setprecision(10);
  for (const SweepPoint& p : outcome.points) {
    out << p.snr_db << ",ista," << p.ista_mse_db << "\n";
    out << p.snr_db << ",udnn," << p.udnn_mse_db << "\n";
  }
  out << "# monotonicity ista worst_increase_db=" << outcome.ista_worst_increase_db
      << "\n";
  out << "# monotonicity udnn worst_increase_db=" << outcome.udnn_worst_increase_db
      << "\n";
  if (!out) throw IoError("write failed: " + outcome.csv_path);

  std::cout << "snr_db  ista_mse_db  udnn_mse_db\n";
  for (const SweepPoint& p : outcome.points)
    std::cout << std::setw(6) << p.snr_db << "  " << std::setw(11)
              << p.ista_mse_db << "  " << p.udnn_mse_db << "\n";
  return outcome;
}

TrainCmdOutcome cmd_train(const ExperimentConfig& cfg, bool resume,
                          bool quiet) {
  cfg.validate();
  const std::uint64_t fp = cfg.fingerprint();
  MeasurementModel measurement =
      build_measurement_model(cfg.ofdm, build_grid(cfg.grid_delay, cfg.grid_doppler));
  UdnnModel init = init_from_ista(measurement, cfg.k_layers, cfg.init_lambda);

  fs::create_directories(cfg.output_dir);
  TrainOptions options;
  options.state_path = (fs::path(cfg.output_dir) / "train_state.bin").string();
  options.quiet = quiet;
  if (!resume && fs::exists(options.state_path))
    fs::remove(options.state_path);

  Dataset dataset = generate_dataset(measurement, cfg.train);
  TrainOutcome outcome = train(init, dataset, cfg.train, measurement, options);

  TrainCmdOutcome result;
  result.outcome = outcome;
  result.model_path = (fs::path(cfg.output_dir) / "udnn_model.bin").string();
  result.log_path = (fs::path(cfg.output_dir) / "training_log.csv").string();
  save_model(outcome.best_model, result.model_path);
  ensure_output_compatible(result.log_path, fp, cfg.force);
  outcome.log.write_csv(result.log_path, fp);

  std::cout << "trained " << cfg.train.epochs << " epochs (started at epoch "
            << outcome.start_epoch << "); best val mse "
            << outcome.best_val_mse_db << " dB at epoch " << outcome.best_epoch
            << "\nmodel: " << result.model_path << "\nlog: " << result.log_path
            << "\n";
  return result;
}

ValidateReport cmd_validate(const ExperimentConfig& cfg,
                            const ValidateOptions& options) {
  ValidateReport report = run_validation(options);
  fs::create_directories(cfg.output_dir);
  const std::string path =
      (fs::path(cfg.output_dir) / "validate_report.json").string();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  out << report.to_json() << "\n";
  for (const CheckResult& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (metric "
              << c.metric << ", budget " << c.budget << ")\n";
  std::cout << (report.all_passed() ? "all checks passed" : "CHECKS FAILED")
            << "\n";
  return report;
}

}  // namespace udnn
