#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgnn/dataset.hpp"
#include "dgnn/model.hpp"
#include "json.hpp"

namespace dgnn {

// ---------------------------------------------------------------------------
// Configuration

struct OptimizerConfig {
  std::string kind = "adam";
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// "constant", or "cosine": lr·(1 + cos(π·t/T))/2 over the T steps of the run.
  std::string schedule = "cosine";
  bool operator==(const OptimizerConfig&) const = default;
};

/// Backbone used by the default training configuration: hidden size 32,
/// 3 interactions, 20 RBFs, cutoff 6 Å.
BackboneConfig desk_backbone();

struct TrainConfig {
  ModelSpec model;
  OptimizerConfig optimizer;
  int batch_size = 32;
  int epochs = 30;
  std::uint64_t seed = 0;
  std::string loss = "l1";
  std::string dataset_path;
  std::string checkpoint_path;
  std::string log_path;  // optional JSON Lines epoch log

  /// Desk preset for `variant`.
  static TrainConfig defaults(VariantKind variant);
  /// lr ≥ 0 (lr = 0 is an allowed no-op run), batch_size ≥ 1, epochs ≥ 1.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

nlohmann::ordered_json model_spec_to_json(const ModelSpec& spec);
/// Missing fields take the desk defaults; unknown fields are rejected.
ModelSpec model_spec_from_json(const nlohmann::json& j);

nlohmann::ordered_json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig read_train_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  Model model;
  int best_epoch = 0;
  std::optional<double> val_id_mae;
};

/// {"format_version": 1, "model": spec, "normalizer": {"mean", "std"},
///  "training": {"best_epoch", "val_id_mae"},
///  "parameters": {name: {"shape": [...], "data": [...]}}}
std::string format_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text);
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Training

class Adam {
 public:
  explicit Adam(const OptimizerConfig& config);
  /// One update of every parameter from its accumulated gradient.
  void step(ParameterSet& params);
  long steps() const { return t_; }
  double learning_rate() const { return config_.lr; }
  void set_learning_rate(double lr) { config_.lr = lr; }

 private:
  OptimizerConfig config_;
  long t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

struct EpochLog {
  int epoch = 0;                    // 1-based
  double train_loss = 0.0;          // mean |error| over the train split, eV
  std::optional<double> val_id_mae; // eV
};

struct TrainResult {
  Checkpoint checkpoint;  // best val_id epoch (last epoch without val_id)
  std::vector<EpochLog> log;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Seeded, single-threaded training on dataset.split("train"), selecting on
/// val_id. Throws TrainingError on a non-finite loss or gradient, naming the
/// epoch and step.
TrainResult train(const TrainConfig& config, const Dataset& dataset, const EpochCallback& on_epoch = {});

/// Reads config.dataset_path, trains, writes config.checkpoint_path (and the
/// epoch log to config.log_path when set).
TrainResult train(const TrainConfig& config, const EpochCallback& on_epoch = {});

Normalizer fit_normalizer(const std::vector<const AtomicSystem*>& systems);

// ---------------------------------------------------------------------------
// Evaluation

struct SplitMetrics {
  std::size_t n_samples = 0;
  double mae = 0.0;
};

struct PredictionRecord {
  std::string id;
  std::string split;
  double pred = 0.0;
  double target = 0.0;
};

struct ThroughputStats {
  double mean = 0.0;  // samples/s
  double std = 0.0;   // sample standard deviation over repetitions
  std::size_t n_samples = 0;
  std::size_t batch_size = 0;
  std::vector<double> seconds;             // one entry per timed repetition
  std::vector<double> samples_per_second;  // one entry per timed repetition
};

struct EvalReport {
  std::map<std::string, SplitMetrics> mae_per_split;  // only splits with samples
  std::optional<double> mae_average;  // mean over the present validation splits
  std::vector<std::string> warnings;
  std::vector<PredictionRecord> predictions;
  std::optional<ThroughputStats> throughput;
};

/// MAE per split; every system needs a target energy.
EvalReport evaluate(const Model& model, const Dataset& dataset, std::size_t batch_size = 32);
/// JSON Lines {"id", "pred", "target"}.
void write_predictions(const EvalReport& report, const std::filesystem::path& path);
std::string format_eval_report(const EvalReport& report);

/// Forward-pass-only timing: graphs are built and batched up front, one
/// warm-up pass, then `repetitions` timed passes over all systems.
ThroughputStats benchmark_throughput(const Model& model, const std::vector<AtomicSystem>& systems,
                                     int repetitions, std::size_t batch_size = 32);

// ---------------------------------------------------------------------------
// Gradient check

/// Per parameter block: max |analytic − numeric| / max(max |numeric|, 1e-6),
/// numeric being the central difference of the summed raw outputs.
std::map<std::string, double> gradient_check(Model& model, const std::vector<AtomicSystem>& systems,
                                             double eps = 1e-5);

}  // namespace dgnn
