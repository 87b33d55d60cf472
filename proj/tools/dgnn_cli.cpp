// dgnn: train, evaluate, benchmark and verify disconnected GNN energy models.
//
// Exit codes: 0 success, 1 validation or verification failure, 2 usage error.

#include <cstdio>
#include <exception>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "dgnn/dataset.hpp"
#include "dgnn/error.hpp"
#include "dgnn/harness.hpp"
#include "dgnn/verify.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int run_train(const std::string& config_path, bool quiet) {
  const dgnn::TrainConfig config = dgnn::read_train_config(config_path);
  const auto result = dgnn::train(config, [&](const dgnn::EpochLog& e) {
    if (quiet) return;
    if (e.val_id_mae) {
      std::printf("epoch %3d  train_loss %.6f  val_id_mae %.6f\n", e.epoch, e.train_loss, *e.val_id_mae);
    } else {
      std::printf("epoch %3d  train_loss %.6f\n", e.epoch, e.train_loss);
    }
    std::fflush(stdout);
  });
  std::printf("best epoch %d", result.checkpoint.best_epoch);
  if (result.checkpoint.val_id_mae) std::printf("  val_id_mae %.6f", *result.checkpoint.val_id_mae);
  std::printf("\ncheckpoint written to %s\n", config.checkpoint_path.c_str());
  return 0;
}

int run_eval(const std::string& checkpoint, const std::string& data, const std::string& dump, std::size_t batch) {
  const dgnn::Checkpoint ckpt = dgnn::read_checkpoint(checkpoint);
  const dgnn::EvalReport report = dgnn::evaluate(ckpt.model, dgnn::read_dataset(data), batch);
  std::fputs(dgnn::format_eval_report(report).c_str(), stdout);
  if (!dump.empty()) dgnn::write_predictions(report, dump);
  return 0;
}

int run_bench(const std::string& checkpoint, const std::string& data, int reps, std::size_t batch) {
  const dgnn::Checkpoint ckpt = dgnn::read_checkpoint(checkpoint);
  const dgnn::Dataset dataset = dgnn::read_dataset(data);
  const auto s = dgnn::benchmark_throughput(ckpt.model, dataset.systems, reps, batch);
  std::printf("variant %s, %zu systems, batch size %zu, %zu repetitions after 1 warm-up\n",
              std::string(dgnn::to_string(ckpt.model.spec().variant)).c_str(), s.n_samples, s.batch_size,
              s.seconds.size());
  for (std::size_t i = 0; i < s.seconds.size(); ++i) {
    std::printf("  rep %zu: %.6f s  %.1f samples/s\n", i + 1, s.seconds[i], s.samples_per_second[i]);
  }
  std::printf("throughput %.1f +- %.1f samples/s\n", s.mean, s.std);
  return 0;
}

int run_gen(std::uint64_t seed, const std::string& mode, const std::string& out, int n_train, int n_val,
            double noise) {
  dgnn::SyntheticConfig c;
  c.seed = seed;
  c.interaction_mode = dgnn::parse_interaction_mode(mode);
  c.n_train = n_train;
  c.n_val_per_split = n_val;
  c.noise_std = noise;
  const dgnn::Dataset d = dgnn::generate_synthetic(c);
  dgnn::write_dataset(d, out);
  std::printf("wrote %zu systems (%s, seed %llu) to %s\n", d.systems.size(), mode.c_str(),
              static_cast<unsigned long long>(seed), out.c_str());
  return 0;
}

int run_stats(const std::string& data) {
  const dgnn::Dataset d = dgnn::read_dataset(data);
  std::printf("%-14s %8s\n", "split", "systems");
  for (auto split : dgnn::kSplitNames) {
    std::printf("%-14s %8zu\n", std::string(split).c_str(), d.split(split).size());
  }
  const auto s = dgnn::duplicate_target_stats(d);
  std::printf("\ngroups by (adsorbate_id, bulk_id, cell_hash): %zu\n", s.n_groups);
  std::printf("systems in multi-target groups: %zu of %zu\n", s.n_multi_target, s.n_systems);
  std::printf("duplicate-target fraction: %.6f\n", s.fraction_multi_target);
  return 0;
}

int run_verify(const std::string& scope, std::uint64_t seed, bool inject) {
  dgnn::VerifyOptions o;
  o.scope = scope;
  o.seed = seed;
  o.inject_cross_edge = inject;
  const dgnn::VerifyReport r = dgnn::run_verify(o);
  std::fputs(dgnn::format_verify_report(r).c_str(), stdout);
  return r.passed() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Keep large tensor buffers on the heap instead of fresh mmap'd pages.
  mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
#endif

  CLI::App app{"Disconnected GNN energy models: training, evaluation, benchmarking and verification"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, data, dump, out, mode, scope = "all";
  std::uint64_t seed = 0;
  int reps = 5, n_train = 2000, n_val = 200;
  std::size_t batch = 32;
  double noise = 0.05;
  bool quiet = false, inject = false;

  auto* train = app.add_subcommand("train", "Train a model from a JSON TrainConfig");
  train->add_option("--config", config_path, "TrainConfig JSON file")->required()->check(CLI::ExistingFile);
  train->add_flag("--quiet", quiet, "Do not print the per-epoch log");

  auto* eval = app.add_subcommand("eval", "Per-split MAE of a checkpoint on a dataset");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON file")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "Dataset (JSON Lines)")->required()->check(CLI::ExistingFile);
  eval->add_option("--dump-predictions", dump, "Write per-sample predictions as JSON Lines");
  eval->add_option("--batch-size", batch, "Evaluation batch size")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "Forward-pass throughput of a checkpoint");
  bench->add_option("--checkpoint", checkpoint, "Checkpoint JSON file")->required()->check(CLI::ExistingFile);
  bench->add_option("--data", data, "Dataset (JSON Lines)")->required()->check(CLI::ExistingFile);
  bench->add_option("--reps", reps, "Timed repetitions (>= 5)")->required();
  bench->add_option("--batch-size", batch, "Benchmark batch size")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic adslab dataset");
  gen->add_option("--seed", seed, "Generator seed")->required();
  gen->add_option("--mode", mode, "Target mode")->required()->check(CLI::IsMember({"separable", "binding"}));
  gen->add_option("--out", out, "Output dataset path")->required();
  gen->add_option("--n-train", n_train, "Train systems");
  gen->add_option("--n-val", n_val, "Systems per validation split");
  gen->add_option("--noise", noise, "Target noise standard deviation, eV");

  auto* stats = app.add_subcommand("stats", "Split sizes and the duplicate-target statistic");
  stats->add_option("--data", data, "Dataset (JSON Lines)")->required()->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "Run the invariance, oracle and gradient-check suites");
  std::vector<std::string> scopes{"all"};
  for (auto s : dgnn::kVerifyScopes) scopes.emplace_back(s);
  verify->add_option("--scope", scope, "Module to verify")->check(CLI::IsMember(scopes));
  verify->add_option("--seed", seed, "Seed for the random models and systems");
  verify->add_flag("--inject-cross-edge", inject, "Negative control: plant a cross edge before the disconnection check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) return run_train(config_path, quiet);
    if (*eval) return run_eval(checkpoint, data, dump, batch);
    if (*bench) return run_bench(checkpoint, data, reps, batch);
    if (*gen) return run_gen(seed, mode, out, n_train, n_val, noise);
    if (*stats) return run_stats(data);
    if (*verify) return run_verify(scope, seed, inject);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
