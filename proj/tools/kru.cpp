// kru: train, evaluate, benchmark and inspect Kronecker recurrent models.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kru/checkpoint.hpp"
#include "kru/config.hpp"
#include "kru/diagnostics.hpp"
#include "kru/experiment.hpp"
#include "kru/rng.hpp"

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kData = 3, kDiverged = 4 };

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
};

kru::RunConfig load_config(const std::string& path, const Globals& g) {
  kru::RunConfig cfg = kru::load_run_config(path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.out_dir) {
    cfg.out_dir = *g.out_dir;
  } else if (const char* env = std::getenv(kru::kOutDirEnv); env != nullptr && *env != '\0') {
    cfg.out_dir = env;
  }
  return cfg;
}

bool is_checkpoint_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kru::DataError("cannot open " + path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  return j.is_object() && j.value("format", "") == "kru-checkpoint";
}

std::vector<double> parse_doubles(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw kru::ConfigError("bad number '" + item + "' in --sweep list");
    }
  }
  if (out.empty()) throw kru::ConfigError("--sweep needs at least one lambda");
  return out;
}

int cmd_train(const std::string& config, const std::optional<std::string>& resume, const Globals& g) {
  const auto cfg = load_config(config, g);
  kru::TrainOptions opts;
  opts.log = &std::cerr;
  if (resume) opts.resume = *resume;
  kru::write_file_atomic(cfg.out_dir / "config.json", kru::run_config_to_json(cfg) + "\n");
  const auto out = kru::train(cfg, opts);
  std::cout << out.summary_json << "\n";
  return kOk;
}

int cmd_eval(const std::string& ckpt, const std::string& config, const Globals& g) {
  const auto cfg = load_config(config, g);
  std::cout << kru::evaluate_checkpoint(ckpt, cfg) << "\n";
  return kOk;
}

int cmd_bench(const std::vector<std::size_t>& sizes, const std::vector<std::string>& modes,
              std::size_t batch, std::size_t reps, const Globals& g) {
  kru::BenchOptions o;
  if (!sizes.empty()) o.sizes = sizes;
  if (!modes.empty()) o.modes = modes;
  o.batch = batch;
  o.reps = reps;
  if (g.seed) o.seed = *g.seed;
  const auto rows = kru::run_bench(o);
  const std::string csv = kru::bench_csv(rows);
  std::cout << csv;
  if (g.out_dir) kru::write_file_atomic(std::filesystem::path(*g.out_dir) / "bench.csv", csv);
  return kOk;
}

int cmd_diag(const std::string& target, const std::optional<std::string>& sweep, const Globals& g) {
  if (is_checkpoint_manifest(target)) {
    if (sweep) throw kru::ConfigError("--sweep needs a run config, not a checkpoint");
    std::cout << kru::diagnostics_json(kru::load_checkpoint(target).params) << "\n";
    return kOk;
  }
  const auto cfg = load_config(target, g);
  if (sweep) {
    const auto rows = kru::amplitude_sweep(cfg, parse_doubles(*sweep), &std::cerr);
    const std::string csv = kru::sweep_csv(rows);
    kru::write_file_atomic(cfg.out_dir / "sweep.csv", csv);
    std::cout << csv;
    return kOk;
  }
  // A freshly initialized model from the config.
  const kru::TaskData data(cfg);
  const auto params =
      kru::init_parameters(kru::cell_shape(cfg, data.input_dim(), data.output_dim()),
                           kru::Rng(cfg.seed, kru::Stream::init).next_u64());
  std::cout << kru::diagnostics_json(params) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kronecker recurrent units: training, evaluation, benchmarks and diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned threads = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Override the run seed")->check(CLI::NonNegativeNumber);
  auto* out_opt = app.add_option("--out-dir", out_dir,
                                 std::string("Output directory (else $") + kru::kOutDirEnv + ", else the config)");
  auto* thr_opt = app.add_option("--threads", threads, "Worker threads for Kronecker kernels")
                      ->check(CLI::Range(1u, 256u));

  std::string config, ckpt, target, resume, sweep;
  auto* train = app.add_subcommand("train", "Train a model from a JSON config");
  train->add_option("config", config, "Run config")->required();
  auto* resume_opt = train->add_option("--resume", resume, "Checkpoint manifest to resume from");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the validation and test splits");
  eval->add_option("checkpoint", ckpt, "Checkpoint manifest")->required();
  eval->add_option("config", config, "Run config")->required();

  std::vector<std::size_t> sizes;
  std::vector<std::string> modes;
  std::size_t batch = 32, reps = 21;
  auto* bench = app.add_subcommand("bench", "Time dense versus Kronecker products");
  bench->add_option("--sizes", sizes, "Hidden sizes (powers of two)")->delimiter(',');
  bench->add_option("--modes", modes, "dense, kron")->delimiter(',')->check(CLI::IsMember({"dense", "kron"}));
  bench->add_option("--batch", batch, "Rows of X");
  bench->add_option("--reps", reps, "Timed repetitions");

  auto* diag = app.add_subcommand("diag", "Spectral report of a checkpoint or config, or a lambda sweep");
  diag->add_option("target", target, "Checkpoint manifest or run config")->required();
  auto* sweep_opt = diag->add_option("--sweep", sweep, "Comma-separated soft unitary amplitudes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (*seed_opt) g.seed = seed;
  if (*out_opt) g.out_dir = out_dir;
  if (*thr_opt) g.threads = threads;

  try {
    if (*train) return cmd_train(config, *resume_opt ? std::optional(resume) : std::nullopt, g);
    if (*eval) return cmd_eval(ckpt, config, g);
    if (*bench) return cmd_bench(sizes, modes, batch, reps, g);
    return cmd_diag(target, *sweep_opt ? std::optional(sweep) : std::nullopt, g);
  } catch (const kru::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const kru::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const kru::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const kru::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
