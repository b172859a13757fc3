// Command-line harness for the delay-Doppler channel estimation experiments:
// dataset/train/bench/snr-sweep/example/validate/model-info.

#include <CLI11.hpp>
#include <iostream>

#include "udnn/errors.hpp"
#include "udnn/experiments.hpp"
#include "udnn/model_io.hpp"
#include "udnn/rng.hpp"

namespace {

// exit codes: 0 success, 1 check failure, 2 usage error, 3 integrity error
constexpr int kOk = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsageError = 2;
constexpr int kIntegrityError = 3;

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::string model_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  int threads = -1;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--output", args.output_dir, "output directory");
  cmd->add_option("--seed", args.seed, "base RNG seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--trials", args.trials, "Monte-Carlo trials");
  cmd->add_option("--threads", args.threads,
                  "worker threads (ignored inside timed sections)");
  cmd->add_flag("--force", args.force, "overwrite outputs from other configs");
}

udnn::ExperimentConfig make_config(const CommonArgs& args) {
  udnn::ExperimentConfig cfg;
  if (!args.config_path.empty())
    cfg = udnn::ExperimentConfig::load(args.config_path);
  if (args.seed_set) {
    cfg.seed = args.seed;
    cfg.train.seed = udnn::mix_seed(args.seed, 0x7e41ull);
  }
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  if (args.trials > 0) cfg.trials = args.trials;
  if (args.threads >= 0) cfg.threads = args.threads;
  cfg.force = args.force;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-Doppler sparse channel estimation: ISTA baseline and "
               "unfolded network"};
  app.require_subcommand(1);

  CommonArgs example_args, train_args, bench_args, sweep_args, validate_args;

  CLI::App* example = app.add_subcommand(
      "example", "one noiseless instance through both estimators");
  add_common(example, example_args);
  example->add_option("--model", example_args.model_path, "trained checkpoint");

  CLI::App* train_cmd =
      app.add_subcommand("train", "generate data, train, save best checkpoint");
  add_common(train_cmd, train_args);
  bool resume = false;
  train_cmd->add_flag("--resume", resume, "continue from the state file");
  bool train_verbose = false;
  train_cmd->add_flag("--verbose", train_verbose, "per-epoch progress");
  std::string dataset_out;
  train_cmd->add_option("--save-dataset", dataset_out,
                        "also write the generated dataset here");

  CLI::App* bench = app.add_subcommand(
      "bench", "accuracy/iterations/runtime comparison (timed single-thread)");
  add_common(bench, bench_args);
  bench->add_option("--model", bench_args.model_path, "trained checkpoint")
      ->required();

  CLI::App* sweep = app.add_subcommand("snr-sweep", "MSE versus SNR curves");
  add_common(sweep, sweep_args);
  sweep->add_option("--model", sweep_args.model_path, "trained checkpoint")
      ->required();

  CLI::App* validate =
      app.add_subcommand("validate", "run the cross-module invariant suite");
  add_common(validate, validate_args);
  bool inject_fault = false;
  validate->add_flag("--inject-init-fault", inject_fault,
                     "negative control: perturb the initialization");

  CLI::App* info = app.add_subcommand("model-info", "print checkpoint header");
  std::string info_path;
  info->add_option("path", info_path, "checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (example->parsed()) {
      udnn::cmd_example(make_config(example_args), example_args.model_path);
      return kOk;
    }
    if (train_cmd->parsed()) {
      udnn::ExperimentConfig cfg = make_config(train_args);
      if (!dataset_out.empty()) {
        udnn::MeasurementModel measurement = udnn::build_measurement_model(
            cfg.ofdm, udnn::build_grid(cfg.grid_delay, cfg.grid_doppler));
        udnn::save_dataset(udnn::generate_dataset(measurement, cfg.train),
                           dataset_out);
      }
      udnn::cmd_train(cfg, resume, !train_verbose);
      return kOk;
    }
    if (bench->parsed()) {
      udnn::cmd_bench(make_config(bench_args), bench_args.model_path);
      return kOk;
    }
    if (sweep->parsed()) {
      udnn::cmd_snr_sweep(make_config(sweep_args), sweep_args.model_path);
      return kOk;
    }
    if (validate->parsed()) {
      udnn::ExperimentConfig cfg = make_config(validate_args);
      udnn::ValidateOptions options;
      if (validate_args.seed_set) options.seed = validate_args.seed;
      options.inject_init_fault = inject_fault;
      udnn::ValidateReport report = udnn::cmd_validate(cfg, options);
      return report.all_passed() ? kOk : kCheckFailure;
    }
    if (info->parsed()) {
      std::cout << udnn::model_header_json(info_path) << "\n";
      return kOk;
    }
  } catch (const udnn::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kIntegrityError;
  } catch (const udnn::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIntegrityError;
  } catch (const udnn::DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const udnn::ShapeError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailure;
  }
  return kUsageError;
}
