#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dgnn/dataset.hpp"
#include "dgnn/error.hpp"
#include "dgnn/harness.hpp"
#include "dgnn/verify.hpp"
#include "json.hpp"

using namespace dgnn;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dgnn_test_harness_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Dataset small_dataset(std::uint64_t seed = 3, int n_train = 48, int n_val = 8) {
  SyntheticConfig c;
  c.seed = seed;
  c.n_train = n_train;
  c.n_val_per_split = n_val;
  c.interaction_mode = InteractionMode::Binding;
  return generate_synthetic(c);
}

TrainConfig small_config(VariantKind v) {
  TrainConfig c = TrainConfig::defaults(v);
  BackboneConfig b;
  b.hidden_dim = 8;
  b.num_interactions = 2;
  b.rbf_count = 8;
  b.cutoff = 5.0;
  c.model = ModelSpec::defaults(v, b);
  c.model.attention.edge_rbf_count = 6;
  c.epochs = 2;
  c.batch_size = 16;
  c.seed = 11;
  return c;
}

/// Zero parameters make every raw output 0, so the model predicts the
/// normalizer mean for every system.
Model constant_model(double c) {
  Model m(small_config(VariantKind::DisconnectedBaseline).model, 0);
  for (auto& [_, t] : m.parameters().entries())
    for (auto& x : t.mutable_data()) x = 0.0;
  m.set_normalizer({c, 1.0});
  return m;
}

}  // namespace

TEST_CASE("TrainConfig validation") {
  TrainConfig c = TrainConfig::defaults(VariantKind::Connected);
  CHECK_NOTHROW(c.validate());
  CHECK(c.optimizer.kind == "adam");
  CHECK(c.loss == "l1");
  CHECK(c.model.backbone == desk_backbone());

  auto bad = c;
  bad.optimizer.lr = -1e-3;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.loss = "l2";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.optimizer.kind = "sgd";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.optimizer.schedule = "step";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.optimizer.schedule = "constant";
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("TrainConfig JSON round trip and errors") {
  for (auto v : kAllVariants) {
    const TrainConfig c = small_config(v);
    CHECK(train_config_from_json(train_config_to_json(c)) == c);
  }
  const auto j = nlohmann::json::parse(R"({"model": {"variant": "Attention"}, "epochs": 3})");
  const TrainConfig c = train_config_from_json(j);
  CHECK(c.model.variant == VariantKind::Attention);
  CHECK(c.model.backbone == desk_backbone());
  CHECK(c.model.second_backbone.has_value());
  CHECK(c.epochs == 3);

  CHECK_THROWS_AS(train_config_from_json(nlohmann::json::parse(R"({"epochz": 3})")), ValidationError);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json::parse(R"({"model": {"variant": "Nope"}})")),
                  ValidationError);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json::parse(R"({"epochs": "three"})")), ValidationError);
  CHECK_THROWS_AS(read_train_config(temp_file("does_not_exist.json")), Error);
}

TEST_CASE("Adam: one step from a fresh state moves each parameter by lr against its gradient sign") {
  ParameterSet p;
  p.add("w", Tensor::vector({1.0, -2.0, 0.5}, true));
  p.get("w").mutable_grad()[0] = 0.3;
  p.get("w").mutable_grad()[1] = -4.0;
  p.get("w").mutable_grad()[2] = 0.0;
  OptimizerConfig cfg;
  cfg.lr = 0.01;
  Adam adam(cfg);
  adam.step(p);
  CHECK(adam.steps() == 1);
  // m̂ = g, v̂ = g², so the update is lr·g/(|g| + eps).
  CHECK(p.get("w").data()[0] == doctest::Approx(1.0 - 0.01 * 0.3 / (0.3 + 1e-8)).epsilon(1e-14));
  CHECK(p.get("w").data()[1] == doctest::Approx(-2.0 + 0.01 * 4.0 / (4.0 + 1e-8)).epsilon(1e-14));
  CHECK(p.get("w").data()[2] == 0.5);

  adam.set_learning_rate(0.0);
  const std::vector<double> before(p.get("w").data().begin(), p.get("w").data().end());
  adam.step(p);
  CHECK(std::equal(before.begin(), before.end(), p.get("w").data().begin()));
}

TEST_CASE("train: lr = 0 leaves parameters bit-identical and the loss log constant") {
  const Dataset data = small_dataset();
  TrainConfig cfg = small_config(VariantKind::Attention);
  cfg.optimizer.lr = 0.0;
  cfg.epochs = 3;
  const TrainResult r = train(cfg, data);
  const Model fresh(cfg.model, cfg.seed);
  for (const auto& [name, t] : fresh.parameters().entries()) {
    CAPTURE(name);
    const auto got = r.checkpoint.model.parameters().get(name).data();
    CHECK(std::equal(got.begin(), got.end(), t.data().begin(), t.data().end()));
  }
  REQUIRE(r.log.size() == 3);
  for (const auto& e : r.log) {
    CHECK(e.train_loss == r.log[0].train_loss);
    CHECK(e.val_id_mae == r.log[0].val_id_mae);
  }
}

TEST_CASE("train: a single sample is memorized by the Connected head within 500 steps") {
  Dataset one = small_dataset();
  one.systems.resize(1);
  REQUIRE(one.systems[0].metadata.split == "train");
  TrainConfig cfg = small_config(VariantKind::Connected);
  cfg.epochs = 500;
  cfg.batch_size = 1;
  cfg.optimizer.lr = 1e-3;
  const TrainResult r = train(cfg, one);
  REQUIRE(r.log.size() == 500);
  const auto best = std::min_element(r.log.begin(), r.log.end(),
                                     [](const EpochLog& a, const EpochLog& b) { return a.train_loss < b.train_loss; });
  CHECK(best->train_loss < 1e-3);
  CHECK(r.log.front().train_loss > 1e-2);
  CHECK_FALSE(r.log.back().val_id_mae.has_value());
  CHECK(r.checkpoint.best_epoch == 500);
}

TEST_CASE("train: identical seeds give byte-identical checkpoints and logs") {
  const Dataset data = small_dataset();
  const auto data_path = temp_file("det.jsonl");
  write_dataset(data, data_path);
  for (auto v : {VariantKind::Connected, VariantKind::IndependentPooling, VariantKind::Attention}) {
    CAPTURE(to_string(v));
    std::string ckpt[2], log[2];
    for (int run = 0; run < 2; ++run) {
      TrainConfig cfg = small_config(v);
      cfg.dataset_path = data_path.string();
      cfg.checkpoint_path = temp_file("det" + std::to_string(run) + ".ckpt.json").string();
      cfg.log_path = temp_file("det" + std::to_string(run) + ".log.jsonl").string();
      train(cfg);
      ckpt[run] = slurp(cfg.checkpoint_path);
      log[run] = slurp(cfg.log_path);
    }
    CHECK(!ckpt[0].empty());
    CHECK(ckpt[0] == ckpt[1]);
    CHECK(log[0] == log[1]);
  }
  TrainConfig other = small_config(VariantKind::Connected);
  other.seed = 12;
  CHECK(format_checkpoint(train(other, data).checkpoint) !=
        format_checkpoint(train(small_config(VariantKind::Connected), data).checkpoint));
}

TEST_CASE("train: epoch log fields, callback and error paths") {
  const Dataset data = small_dataset();
  TrainConfig cfg = small_config(VariantKind::DisconnectedBaseline);
  cfg.epochs = 3;
  int calls = 0;
  const TrainResult r = train(cfg, data, [&](const EpochLog& e) { CHECK(e.epoch == ++calls); });
  CHECK(calls == 3);
  const auto best = std::min_element(r.log.begin(), r.log.end(),
                                     [](const EpochLog& a, const EpochLog& b) { return *a.val_id_mae < *b.val_id_mae; });
  CHECK(r.checkpoint.best_epoch == best->epoch);
  CHECK(r.checkpoint.val_id_mae == best->val_id_mae);

  Dataset no_train = data;
  std::erase_if(no_train.systems, [](const AtomicSystem& s) { return s.metadata.split == "train"; });
  CHECK_THROWS_AS(train(cfg, no_train), ValidationError);

  Dataset no_target = data;
  no_target.systems[0].target_energy.reset();
  CHECK_THROWS_AS(train(cfg, no_target), ValidationError);

  TrainConfig nan_cfg = cfg;
  nan_cfg.optimizer.lr = 1e300;
  CHECK_THROWS_AS(train(nan_cfg, data), TrainingError);
  try {
    train(nan_cfg, data);
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip reproduces the logged val_id MAE") {
  const Dataset data = small_dataset();
  for (auto v : kAllVariants) {
    CAPTURE(to_string(v));
    const TrainResult r = train(small_config(v), data);
    const auto path = temp_file("roundtrip.ckpt.json");
    write_checkpoint(r.checkpoint, path);
    const Checkpoint back = read_checkpoint(path);
    CHECK(back.model.spec() == r.checkpoint.model.spec());
    CHECK(back.model.normalizer() == r.checkpoint.model.normalizer());
    CHECK(back.best_epoch == r.checkpoint.best_epoch);
    CHECK(format_checkpoint(back) == slurp(path));
    const EvalReport report = evaluate(back.model, data);
    CHECK(std::fabs(report.mae_per_split.at("val_id").mae - *r.checkpoint.val_id_mae) <= 1e-9);
  }
  CHECK_THROWS_AS(parse_checkpoint("{}"), ValidationError);
  CHECK_THROWS_AS(parse_checkpoint("not json"), ValidationError);
}

TEST_CASE("evaluate: predictions equal to targets give zero MAE") {
  Dataset data = small_dataset();
  const Model m = constant_model(0.0);
  for (auto& s : data.systems) s.target_energy = m.predict(s);
  const EvalReport r = evaluate(m, data);
  REQUIRE(r.mae_per_split.size() == 5);
  for (const auto& [split, metrics] : r.mae_per_split) {
    CAPTURE(split);
    CHECK(metrics.mae == 0.0);
  }
  CHECK(r.mae_average == 0.0);
  CHECK(r.warnings.empty());
}

TEST_CASE("evaluate: constant predictor on targets {0, 2}") {
  Dataset data = small_dataset();
  data.systems.resize(2);
  data.systems[0].metadata.split = "val_id";
  data.systems[1].metadata.split = "val_id";
  data.systems[0].target_energy = 0.0;
  data.systems[1].target_energy = 2.0;
  for (double c : {-1.5, 0.0, 0.75, 2.0, 3.25}) {
    CAPTURE(c);
    const EvalReport r = evaluate(constant_model(c), data);
    REQUIRE(r.mae_per_split.size() == 1);
    CHECK(r.mae_per_split.at("val_id").n_samples == 2);
    CHECK(r.mae_per_split.at("val_id").mae == doctest::Approx((std::fabs(c) + std::fabs(c - 2.0)) / 2).epsilon(1e-15));
    // Only val_id is present: the average is over it alone, with a warning per missing split.
    CHECK(r.mae_average == r.mae_per_split.at("val_id").mae);
    CHECK(r.warnings.size() == 3);
  }
}

TEST_CASE("evaluate: split MAEs match a recomputation over the prediction dump") {
  const Dataset data = small_dataset();
  const TrainResult trained = train(small_config(VariantKind::IndependentBackbones), data);
  const EvalReport r = evaluate(trained.checkpoint.model, data, 7);
  const auto path = temp_file("dump.jsonl");
  write_predictions(r, path);

  std::map<std::string, std::string> split_of;
  for (const auto& s : data.systems) split_of[s.id] = s.metadata.split;
  std::map<std::string, std::pair<double, int>> acc;
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.size() == 3);
    auto& [sum, n] = acc[split_of.at(j.at("id").get<std::string>())];
    sum += std::fabs(j.at("pred").get<double>() - j.at("target").get<double>());
    ++n;
    ++lines;
  }
  CHECK(lines == static_cast<int>(data.systems.size()));
  double avg = 0.0;
  for (auto split : kValidationSplits) {
    const auto& [sum, n] = acc.at(std::string(split));
    CHECK(r.mae_per_split.at(std::string(split)).mae == doctest::Approx(sum / n).epsilon(1e-12));
    avg += sum / n / 4.0;
  }
  CHECK(*r.mae_average == doctest::Approx(avg).epsilon(1e-12));
  const auto& [tsum, tn] = acc.at("train");
  CHECK(r.mae_per_split.at("train").mae == doctest::Approx(tsum / tn).epsilon(1e-12));

  const EvalReport again = evaluate(trained.checkpoint.model, data, 32);
  for (const auto& [split, m] : r.mae_per_split) CHECK(again.mae_per_split.at(split).mae == doctest::Approx(m.mae).epsilon(1e-12));

  Dataset missing = data;
  missing.systems[3].target_energy.reset();
  CHECK_THROWS_AS(evaluate(trained.checkpoint.model, missing), ValidationError);
}

TEST_CASE("benchmark_throughput: repetitions, duplication and variant direction") {
  const Dataset data = small_dataset(5, 40, 1);
  const std::vector<AtomicSystem> systems(data.systems.begin(), data.systems.begin() + 40);
  TrainConfig base = TrainConfig::defaults(VariantKind::Connected);
  const Model connected(base.model, 1);
  const Model disconnected(ModelSpec::defaults(VariantKind::DisconnectedBaseline, base.model.backbone), 1);

  const ThroughputStats s = benchmark_throughput(connected, systems, 5);
  CHECK(s.seconds.size() == 5);
  CHECK(s.samples_per_second.size() == 5);
  CHECK(s.n_samples == 40);
  CHECK(s.batch_size == 32);
  CHECK(s.mean > 0.0);
  CHECK(s.std >= 0.0);

  // Rate, not total: doubling the input by duplication keeps samples/s.
  std::vector<AtomicSystem> doubled = systems;
  doubled.insert(doubled.end(), systems.begin(), systems.end());
  const ThroughputStats d = benchmark_throughput(connected, doubled, 5);
  CHECK(d.n_samples == 80);
  CHECK(std::fabs(d.mean - s.mean) / s.mean < 0.2);

  std::vector<AtomicSystem> same(100, systems[0]);
  const double c = benchmark_throughput(connected, same, 5).mean;
  const double b = benchmark_throughput(disconnected, same, 5).mean;
  CHECK(b >= c);

  CHECK_THROWS_AS(benchmark_throughput(connected, {}, 5), ValidationError);
  CHECK_THROWS_AS(benchmark_throughput(connected, systems, 4), ValidationError);
}

TEST_CASE("verify: every scope passes; the injected cross edge is caught and named") {
  VerifyOptions all;
  const VerifyReport r = run_verify(all);
  for (const auto& c : r.checks) {
    CAPTURE(c.scope);
    CAPTURE(c.name);
    CHECK(c.passed);
  }
  std::set<std::string> scopes;
  for (const auto& c : r.checks) scopes.insert(c.scope);
  CHECK(scopes.size() == std::size(kVerifyScopes));

  VerifyOptions only;
  only.scope = "tensor-autodiff";
  for (const auto& c : run_verify(only).checks) CHECK(c.scope == "tensor-autodiff");

  VerifyOptions control;
  control.scope = "atomic-graph";
  control.inject_cross_edge = true;
  const VerifyReport bad = run_verify(control);
  CHECK_FALSE(bad.passed());
  const auto failed = std::find_if(bad.checks.begin(), bad.checks.end(), [](const CheckResult& c) { return !c.passed; });
  REQUIRE(failed != bad.checks.end());
  CHECK(failed->name.find("disconnection") != std::string::npos);
  CHECK(format_verify_report(bad).find("[FAIL]") != std::string::npos);

  VerifyOptions unknown;
  unknown.scope = "nope";
  CHECK_THROWS_AS(run_verify(unknown), ValidationError);
}
