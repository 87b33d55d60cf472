#include "dgnn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "dgnn/error.hpp"
#include "dgnn/ops.hpp"

namespace dgnn {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= key == a;
    if (!ok) throw ValidationError("unknown field '" + key + "' in " + where);
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + " has the wrong type");
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("I/O failure writing " + path.string());
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + ": malformed JSON: " + e.what());
  }
}

ojson backbone_to_json(const BackboneConfig& b) {
  ojson j;
  j["hidden_dim"] = b.hidden_dim;
  j["num_interactions"] = b.num_interactions;
  j["rbf_count"] = b.rbf_count;
  j["rbf_gamma"] = b.rbf_gamma;
  j["cutoff"] = b.cutoff;
  j["use_tag_embedding"] = b.use_tag_embedding;
  return j;
}

BackboneConfig backbone_from_json(const json& j, BackboneConfig b, const std::string& where) {
  check_keys(j, {"hidden_dim", "num_interactions", "rbf_count", "rbf_gamma", "cutoff", "use_tag_embedding"}, where);
  read_field(j, "hidden_dim", b.hidden_dim, where);
  read_field(j, "num_interactions", b.num_interactions, where);
  read_field(j, "rbf_count", b.rbf_count, where);
  read_field(j, "rbf_gamma", b.rbf_gamma, where);
  read_field(j, "cutoff", b.cutoff, where);
  read_field(j, "use_tag_embedding", b.use_tag_embedding, where);
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

BackboneConfig desk_backbone() {
  BackboneConfig b;
  b.hidden_dim = 32;
  b.num_interactions = 3;
  b.rbf_count = 20;
  b.rbf_gamma = 10.0;
  b.cutoff = 6.0;
  return b;
}

TrainConfig TrainConfig::defaults(VariantKind variant) {
  TrainConfig c;
  c.model = ModelSpec::defaults(variant, desk_backbone());
  return c;
}

void TrainConfig::validate() const {
  model.validate();
  if (optimizer.kind != "adam") throw ValidationError("optimizer.kind must be \"adam\"");
  if (!(optimizer.lr >= 0.0) || !std::isfinite(optimizer.lr)) throw ValidationError("optimizer.lr must be >= 0");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) || !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    throw ValidationError("optimizer.betas must lie in [0, 1)");
  }
  if (!(optimizer.eps > 0.0)) throw ValidationError("optimizer.eps must be positive");
  if (optimizer.schedule != "constant" && optimizer.schedule != "cosine") {
    throw ValidationError("optimizer.schedule must be \"constant\" or \"cosine\"");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (loss != "l1") throw ValidationError("loss.kind must be \"l1\"");
}

ojson model_spec_to_json(const ModelSpec& s) {
  ojson j;
  j["variant"] = std::string(to_string(s.variant));
  j["backbone"] = backbone_to_json(s.backbone);
  j["second_backbone"] = s.second_backbone ? backbone_to_json(*s.second_backbone) : ojson(nullptr);
  j["head_mlp_dims"] = s.head_mlp_dims;
  j["attention"] = {{"edge_rbf_count", s.attention.edge_rbf_count},
                    {"heads", s.attention.heads},
                    {"leaky_slope", s.attention.leaky_slope}};
  j["graph"] = {{"max_neighbors", s.graph.max_neighbors},
                {"remove_tag0", s.graph.remove_tag0},
                {"center_z_on_surface", s.graph.center_z_on_surface}};
  return j;
}

ModelSpec model_spec_from_json(const json& j) {
  check_keys(j, {"variant", "backbone", "second_backbone", "head_mlp_dims", "attention", "graph"}, "model");
  if (!j.contains("variant") || !j["variant"].is_string()) throw ValidationError("model.variant is required");
  const VariantKind variant = parse_variant(j["variant"].get<std::string>());
  BackboneConfig backbone = desk_backbone();
  if (j.contains("backbone")) backbone = backbone_from_json(j["backbone"], backbone, "model.backbone");
  ModelSpec s = ModelSpec::defaults(variant, backbone);
  if (j.contains("second_backbone")) {
    if (j["second_backbone"].is_null()) s.second_backbone.reset();
    else s.second_backbone = backbone_from_json(j["second_backbone"], backbone, "model.second_backbone");
  }
  read_field(j, "head_mlp_dims", s.head_mlp_dims, "model");
  if (j.contains("attention")) {
    const auto& a = j["attention"];
    check_keys(a, {"edge_rbf_count", "heads", "leaky_slope"}, "model.attention");
    read_field(a, "edge_rbf_count", s.attention.edge_rbf_count, "model.attention");
    read_field(a, "heads", s.attention.heads, "model.attention");
    read_field(a, "leaky_slope", s.attention.leaky_slope, "model.attention");
  }
  if (j.contains("graph")) {
    const auto& g = j["graph"];
    check_keys(g, {"max_neighbors", "remove_tag0", "center_z_on_surface"}, "model.graph");
    read_field(g, "max_neighbors", s.graph.max_neighbors, "model.graph");
    read_field(g, "remove_tag0", s.graph.remove_tag0, "model.graph");
    read_field(g, "center_z_on_surface", s.graph.center_z_on_surface, "model.graph");
  }
  s.validate();
  return s;
}

ojson train_config_to_json(const TrainConfig& c) {
  ojson j;
  j["model"] = model_spec_to_json(c.model);
  j["optimizer"] = {{"kind", c.optimizer.kind},
                    {"lr", c.optimizer.lr},
                    {"betas", {c.optimizer.beta1, c.optimizer.beta2}},
                    {"eps", c.optimizer.eps},
                    {"schedule", c.optimizer.schedule}};
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["loss"] = {{"kind", c.loss}};
  j["dataset_path"] = c.dataset_path;
  j["checkpoint_path"] = c.checkpoint_path;
  j["log_path"] = c.log_path;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  check_keys(j, {"model", "optimizer", "batch_size", "epochs", "seed", "loss", "dataset_path", "checkpoint_path",
                 "log_path"},
             "config");
  if (!j.contains("model")) throw ValidationError("config.model is required");
  TrainConfig c;
  c.model = model_spec_from_json(j["model"]);
  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    check_keys(o, {"kind", "lr", "betas", "eps", "schedule"}, "config.optimizer");
    read_field(o, "kind", c.optimizer.kind, "config.optimizer");
    read_field(o, "lr", c.optimizer.lr, "config.optimizer");
    read_field(o, "eps", c.optimizer.eps, "config.optimizer");
    read_field(o, "schedule", c.optimizer.schedule, "config.optimizer");
    if (o.contains("betas")) {
      if (!o["betas"].is_array() || o["betas"].size() != 2) {
        throw ValidationError("config.optimizer.betas must be [beta1, beta2]");
      }
      c.optimizer.beta1 = o["betas"][0].get<double>();
      c.optimizer.beta2 = o["betas"][1].get<double>();
    }
  }
  read_field(j, "batch_size", c.batch_size, "config");
  read_field(j, "epochs", c.epochs, "config");
  read_field(j, "seed", c.seed, "config");
  if (j.contains("loss")) {
    check_keys(j["loss"], {"kind"}, "config.loss");
    read_field(j["loss"], "kind", c.loss, "config.loss");
  }
  read_field(j, "dataset_path", c.dataset_path, "config");
  read_field(j, "checkpoint_path", c.checkpoint_path, "config");
  read_field(j, "log_path", c.log_path, "config");
  c.validate();
  return c;
}

TrainConfig read_train_config(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  return train_config_from_json(parse_json(text, path.string()));
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string format_checkpoint(const Checkpoint& c) {
  const Model& m = c.model;
  ojson j;
  j["format_version"] = 1;
  j["model"] = model_spec_to_json(m.spec());
  j["normalizer"] = {{"mean", m.normalizer().mean}, {"std", m.normalizer().std}};
  j["training"] = {{"best_epoch", c.best_epoch}, {"val_id_mae", c.val_id_mae ? ojson(*c.val_id_mae) : ojson(nullptr)}};
  ojson params = ojson::object();
  for (const auto& [name, t] : m.parameters().entries()) {
    ojson p;
    p["shape"] = t.shape();
    p["data"] = std::vector<double>(t.data().begin(), t.data().end());
    params[name] = std::move(p);
  }
  j["parameters"] = std::move(params);
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  const json j = parse_json(text, "checkpoint");
  check_keys(j, {"format_version", "model", "normalizer", "training", "parameters"}, "checkpoint");
  if (!j.contains("format_version") || j["format_version"] != 1) {
    throw ValidationError("checkpoint format_version must be 1");
  }
  for (const char* key : {"model", "normalizer", "parameters"})
    if (!j.contains(key)) throw ValidationError(std::string("checkpoint is missing '") + key + "'");
  const ModelSpec spec = model_spec_from_json(j["model"]);
  Normalizer norm;
  check_keys(j["normalizer"], {"mean", "std"}, "checkpoint.normalizer");
  read_field(j["normalizer"], "mean", norm.mean, "checkpoint.normalizer");
  read_field(j["normalizer"], "std", norm.std, "checkpoint.normalizer");

  ParameterSet params;
  if (!j["parameters"].is_object()) throw ValidationError("checkpoint.parameters must be an object");
  for (const auto& [name, p] : j["parameters"].items()) {
    check_keys(p, {"shape", "data"}, "checkpoint.parameters." + name);
    Shape shape;
    std::vector<double> data;
    read_field(p, "shape", shape, "checkpoint.parameters." + name);
    read_field(p, "data", data, "checkpoint.parameters." + name);
    if (shape_numel(shape) != data.size()) {
      throw ValidationError("checkpoint parameter '" + name + "': shape " + shape_str(shape) + " needs " +
                            std::to_string(shape_numel(shape)) + " values, got " + std::to_string(data.size()));
    }
    params.add(name, Tensor(std::move(shape), std::move(data)));
  }
  Checkpoint c{Model(spec, std::move(params), norm), 0, std::nullopt};
  if (j.contains("training")) {
    const auto& t = j["training"];
    check_keys(t, {"best_epoch", "val_id_mae"}, "checkpoint.training");
    read_field(t, "best_epoch", c.best_epoch, "checkpoint.training");
    if (t.contains("val_id_mae") && !t["val_id_mae"].is_null()) c.val_id_mae = t["val_id_mae"].get<double>();
  }
  return c;
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_text(path, format_checkpoint(checkpoint));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(slurp(path)); }

// ---------------------------------------------------------------------------
// Training

Adam::Adam(const OptimizerConfig& config) : config_(config) {}

void Adam::step(ParameterSet& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (auto& [name, p] : params.entries()) {
    auto& m = m_[name];
    auto& v = v_[name];
    if (m.empty()) {
      m.assign(p.numel(), 0.0);
      v.assign(p.numel(), 0.0);
    }
    const auto g = p.grad();
    auto x = p.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
      x[i] -= config_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
    }
  }
}

Normalizer fit_normalizer(const std::vector<const AtomicSystem*>& systems) {
  if (systems.empty()) throw ValidationError("cannot fit a normalizer on zero systems");
  double mean = 0.0;
  for (const auto* s : systems) mean += *s->target_energy;
  mean /= static_cast<double>(systems.size());
  double var = 0.0;
  for (const auto* s : systems) var += (*s->target_energy - mean) * (*s->target_energy - mean);
  var /= static_cast<double>(systems.size());
  const double sd = std::sqrt(var);
  return {mean, sd > 1e-6 ? sd : 1.0};
}

namespace {

void require_targets(const std::vector<const AtomicSystem*>& systems, const std::string& what) {
  for (const auto* s : systems)
    if (!s->target_energy) throw ValidationError(what + " system '" + s->id + "' has no target energy");
}

std::vector<double> predict_prepared(const Model& model, const std::vector<PreparedSystem>& prepared,
                                     std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(prepared.size());
  const Normalizer& n = model.normalizer();
  for (std::size_t start = 0; start < prepared.size(); start += batch_size) {
    const std::size_t end = std::min(prepared.size(), start + batch_size);
    std::vector<const PreparedSystem*> ptrs;
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&prepared[i]);
    const Tensor raw = model.forward(collate(ptrs));
    for (double r : raw.data()) out.push_back(n.mean + n.std * r);
  }
  return out;
}

double mean_abs_error(const std::vector<double>& pred, const std::vector<const AtomicSystem*>& systems) {
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::fabs(pred[i] - *systems[i]->target_energy);
  return total / static_cast<double>(pred.size());
}

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& dataset, const EpochCallback& on_epoch) {
  config.validate();
  const auto train_systems = dataset.split("train");
  const auto val_systems = dataset.split("val_id");
  if (train_systems.empty()) throw ValidationError("dataset has no train split");
  require_targets(train_systems, "train");
  require_targets(val_systems, "val_id");

  Model model(config.model, config.seed);
  model.set_normalizer(fit_normalizer(train_systems));
  const Normalizer norm = model.normalizer();

  std::vector<PreparedSystem> prepared, val_prepared;
  for (const auto* s : train_systems) prepared.push_back(prepare_system(config.model, *s));
  for (const auto* s : val_systems) val_prepared.push_back(prepare_system(config.model, *s));

  Adam adam(config.optimizer);
  Rng shuffle_rng = Rng(config.seed).fork(7);
  const std::size_t n = prepared.size();
  const auto bs = static_cast<std::size_t>(config.batch_size);
  const double total_steps = static_cast<double>(config.epochs) * static_cast<double>((n + bs - 1) / bs);

  TrainResult result{Checkpoint{model, 0, std::nullopt}, {}};
  std::optional<double> best;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    std::vector<double> abs_err(n, 0.0);
    long step = 0;
    for (std::size_t start = 0; start < n; start += bs, ++step) {
      const std::size_t end = std::min(n, start + bs);
      std::vector<const PreparedSystem*> ptrs;
      std::vector<double> targets;
      for (std::size_t k = start; k < end; ++k) {
        ptrs.push_back(&prepared[order[k]]);
        targets.push_back((*train_systems[order[k]]->target_energy - norm.mean) / norm.std);
      }
      const std::string where = "epoch " + std::to_string(epoch) + ", step " + std::to_string(step);
      try {
        const Tensor raw = model.forward(collate(ptrs));
        const Tensor diff = ops::sub(raw, Tensor::vector(targets));
        const Tensor loss = ops::mean(ops::abs(diff));
        if (!std::isfinite(loss.item())) throw TrainingError("non-finite loss at " + where);
        for (std::size_t k = start; k < end; ++k) abs_err[order[k]] = std::fabs(diff.data()[k - start]) * norm.std;
        model.parameters().zero_grad();
        loss.backward();
      } catch (const NonFiniteError& e) {
        throw TrainingError(std::string("non-finite value at ") + where + ": " + e.what());
      }
      for (const auto& [name, p] : model.parameters().entries())
        for (double g : p.grad())
          if (!std::isfinite(g)) throw TrainingError("non-finite gradient for " + name + " at " + where);
      if (config.optimizer.schedule == "cosine") {
        const double t = static_cast<double>(adam.steps()) / total_steps;
        adam.set_learning_rate(config.optimizer.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t)));
      }
      adam.step(model.parameters());
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = std::accumulate(abs_err.begin(), abs_err.end(), 0.0) / static_cast<double>(n);
    if (!val_prepared.empty()) log.val_id_mae = mean_abs_error(predict_prepared(model, val_prepared, 32), val_systems);
    if (!log.val_id_mae || !best || *log.val_id_mae < *best) {
      best = log.val_id_mae;
      result.checkpoint = Checkpoint{model, epoch, log.val_id_mae};
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return result;
}

TrainResult train(const TrainConfig& config, const EpochCallback& on_epoch) {
  if (config.dataset_path.empty()) throw ValidationError("config.dataset_path is required");
  const Dataset dataset = read_dataset(config.dataset_path);
  std::ofstream log_file;
  if (!config.log_path.empty()) {
    log_file.open(config.log_path, std::ios::binary | std::ios::trunc);
    if (!log_file) throw Error("cannot write " + config.log_path);
  }
  TrainResult r = train(config, dataset, [&](const EpochLog& e) {
    if (log_file.is_open()) {
      ojson j{{"epoch", e.epoch}, {"train_loss", e.train_loss},
              {"val_id_mae", e.val_id_mae ? ojson(*e.val_id_mae) : ojson(nullptr)}};
      log_file << j.dump() << '\n' << std::flush;
    }
    if (on_epoch) on_epoch(e);
  });
  if (!config.checkpoint_path.empty()) write_checkpoint(r.checkpoint, config.checkpoint_path);
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation

EvalReport evaluate(const Model& model, const Dataset& dataset, std::size_t batch_size) {
  std::vector<const AtomicSystem*> all;
  for (const auto& s : dataset.systems) all.push_back(&s);
  require_targets(all, "evaluation");
  const std::vector<double> pred = model.predict(dataset.systems, batch_size);

  EvalReport report;
  std::map<std::string, double> totals;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const AtomicSystem& s = dataset.systems[i];
    report.predictions.push_back({s.id, s.metadata.split, pred[i], *s.target_energy});
    totals[s.metadata.split] += std::fabs(pred[i] - *s.target_energy);
    ++report.mae_per_split[s.metadata.split].n_samples;
  }
  for (auto& [split, m] : report.mae_per_split) m.mae = totals[split] / static_cast<double>(m.n_samples);

  double sum = 0.0;
  int present = 0;
  for (auto split : kValidationSplits) {
    const auto it = report.mae_per_split.find(std::string(split));
    if (it == report.mae_per_split.end()) {
      report.warnings.push_back("split " + std::string(split) + " has no samples; excluded from the average");
      continue;
    }
    sum += it->second.mae;
    ++present;
  }
  if (present > 0) report.mae_average = sum / present;
  return report;
}

void write_predictions(const EvalReport& report, const std::filesystem::path& path) {
  std::string text;
  for (const auto& p : report.predictions) {
    const ojson j{{"id", p.id}, {"pred", p.pred}, {"target", p.target}};
    text += j.dump();
    text += '\n';
  }
  write_text(path, text);
}

std::string format_eval_report(const EvalReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %8s %14s\n", "split", "n", "MAE (eV)");
  out += line;
  for (auto split : kSplitNames) {
    const auto it = report.mae_per_split.find(std::string(split));
    if (it == report.mae_per_split.end()) continue;
    std::snprintf(line, sizeof(line), "%-14s %8zu %14.6f\n", it->first.c_str(), it->second.n_samples, it->second.mae);
    out += line;
  }
  for (const auto& [split, m] : report.mae_per_split) {
    if (is_known_split(split)) continue;
    std::snprintf(line, sizeof(line), "%-14s %8zu %14.6f\n", split.c_str(), m.n_samples, m.mae);
    out += line;
  }
  if (report.mae_average) {
    std::snprintf(line, sizeof(line), "%-14s %8s %14.6f\n", "average", "", *report.mae_average);
    out += line;
  }
  for (const auto& w : report.warnings) out += "warning: " + w + "\n";
  if (report.throughput) {
    std::snprintf(line, sizeof(line), "throughput: %.1f +/- %.1f samples/s\n", report.throughput->mean,
                  report.throughput->std);
    out += line;
  }
  return out;
}

ThroughputStats benchmark_throughput(const Model& model, const std::vector<AtomicSystem>& systems,
                                     int repetitions, std::size_t batch_size) {
  if (systems.empty()) throw ValidationError("throughput benchmark needs at least one system");
  if (repetitions < 5) throw ValidationError("throughput benchmark needs at least 5 repetitions");
  if (batch_size == 0) throw ValidationError("batch_size must be >= 1");

  std::vector<PreparedSystem> prepared;
  prepared.reserve(systems.size());
  for (const auto& s : systems) prepared.push_back(prepare_system(model.spec(), s));
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < prepared.size(); start += batch_size) {
    std::vector<const PreparedSystem*> ptrs;
    for (std::size_t i = start; i < std::min(prepared.size(), start + batch_size); ++i) ptrs.push_back(&prepared[i]);
    batches.push_back(collate(ptrs));
  }

  double sink = 0.0;
  const auto pass = [&] {
    for (const auto& b : batches) sink += model.forward(b).data()[0];
  };
  pass();  // warm-up

  ThroughputStats st;
  st.n_samples = systems.size();
  st.batch_size = batch_size;
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    pass();
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    st.seconds.push_back(sec);
    st.samples_per_second.push_back(static_cast<double>(systems.size()) / sec);
  }
  if (!std::isfinite(sink)) throw NonFiniteError("non-finite output during benchmark");
  st.mean = std::accumulate(st.samples_per_second.begin(), st.samples_per_second.end(), 0.0) / repetitions;
  double var = 0.0;
  for (double x : st.samples_per_second) var += (x - st.mean) * (x - st.mean);
  st.std = std::sqrt(var / (repetitions - 1));
  return st;
}

// ---------------------------------------------------------------------------

std::map<std::string, double> gradient_check(Model& model, const std::vector<AtomicSystem>& systems, double eps) {
  std::vector<PreparedSystem> prepared;
  for (const auto& s : systems) prepared.push_back(prepare_system(model.spec(), s));
  std::vector<const PreparedSystem*> ptrs;
  for (const auto& p : prepared) ptrs.push_back(&p);
  const Batch batch = collate(ptrs);
  const auto loss = [&] { return ops::sum(model.forward(batch)); };

  model.parameters().zero_grad();
  loss().backward();
  std::map<std::string, double> out;
  for (auto& [name, p] : model.parameters().entries()) {
    std::vector<double> analytic(p.grad().begin(), p.grad().end());
    if (analytic.empty()) analytic.assign(p.numel(), 0.0);
    auto x = p.mutable_data();
    double max_diff = 0.0, max_num = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double keep = x[i];
      x[i] = keep + eps;
      const double up = loss().item();
      x[i] = keep - eps;
      const double down = loss().item();
      x[i] = keep;
      const double numeric = (up - down) / (2.0 * eps);
      max_diff = std::max(max_diff, std::fabs(numeric - analytic[i]));
      max_num = std::max(max_num, std::fabs(numeric));
    }
    out[name] = max_diff / std::max(max_num, 1e-6);
  }
  model.parameters().zero_grad();
  return out;
}

}  // namespace dgnn
