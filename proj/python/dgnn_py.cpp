#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dgnn/dataset.hpp"
#include "dgnn/error.hpp"
#include "dgnn/harness.hpp"
#include "dgnn/model.hpp"
#include "dgnn/verify.hpp"

namespace py = pybind11;
using namespace dgnn;

namespace {

py::dict eval_to_dict(const EvalReport& r) {
  py::dict mae, counts;
  for (const auto& [split, m] : r.mae_per_split) {
    mae[py::str(split)] = m.mae;
    counts[py::str(split)] = m.n_samples;
  }
  py::dict out;
  out["mae_per_split"] = mae;
  out["n_samples"] = counts;
  out["mae_average"] = r.mae_average ? py::object(py::float_(*r.mae_average)) : py::object(py::none());
  out["warnings"] = r.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the dgnn package";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<IndexError>(m, "IndexError", PyExc_IndexError);
  py::register_exception<NonFiniteError>(m, "NonFiniteError", PyExc_ArithmeticError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  py::class_<SystemMetadata>(m, "SystemMetadata")
      .def(py::init<>())
      .def_readwrite("adsorbate_id", &SystemMetadata::adsorbate_id)
      .def_readwrite("bulk_id", &SystemMetadata::bulk_id)
      .def_readwrite("cell_hash", &SystemMetadata::cell_hash)
      .def_readwrite("split", &SystemMetadata::split);

  py::class_<AtomicSystem>(m, "AtomicSystem")
      .def(py::init<>())
      .def_readwrite("id", &AtomicSystem::id)
      .def_readwrite("atomic_numbers", &AtomicSystem::atomic_numbers)
      .def_readwrite("positions", &AtomicSystem::positions)
      .def_readwrite("tags", &AtomicSystem::tags)
      .def_readwrite("cell", &AtomicSystem::cell)
      .def_readwrite("target_energy", &AtomicSystem::target_energy)
      .def_readwrite("metadata", &AtomicSystem::metadata)
      .def("validate", &AtomicSystem::validate, py::arg("require_components") = true)
      .def("__len__", &AtomicSystem::size)
      .def("__repr__", [](const AtomicSystem& s) {
        return "<AtomicSystem '" + s.id + "' with " + std::to_string(s.size()) + " atoms>";
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("systems", &Dataset::systems)
      .def("validate", &Dataset::validate)
      .def("split", [](const Dataset& d, const std::string& name) {
        std::vector<AtomicSystem> out;
        for (const auto* s : d.split(name)) out.push_back(*s);
        return out;
      })
      .def("__len__", [](const Dataset& d) { return d.systems.size(); });

  m.def("read_dataset", &read_dataset, py::arg("path"));
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"));
  m.def("format_dataset", &format_dataset, py::arg("dataset"));
  m.def("parse_dataset", [](const std::string& text) { return parse_dataset(text); }, py::arg("text"));

  py::class_<DuplicateTargetStats>(m, "DuplicateTargetStats")
      .def_readonly("n_groups", &DuplicateTargetStats::n_groups)
      .def_readonly("n_systems", &DuplicateTargetStats::n_systems)
      .def_readonly("n_multi_target", &DuplicateTargetStats::n_multi_target)
      .def_readonly("fraction_multi_target", &DuplicateTargetStats::fraction_multi_target);
  m.def("duplicate_target_stats", &duplicate_target_stats, py::arg("dataset"));

  m.def(
      "generate_synthetic",
      [](std::uint64_t seed, const std::string& mode, int n_train, int n_val_per_split, double noise_std,
         int adsorbate_vocab_size, int catalyst_vocab_size) {
        SyntheticConfig c;
        c.seed = seed;
        c.interaction_mode = parse_interaction_mode(mode);
        c.n_train = n_train;
        c.n_val_per_split = n_val_per_split;
        c.noise_std = noise_std;
        c.adsorbate_vocab_size = adsorbate_vocab_size;
        c.catalyst_vocab_size = catalyst_vocab_size;
        return generate_synthetic(c);
      },
      py::arg("seed") = 0, py::arg("mode") = "separable", py::arg("n_train") = 2000,
      py::arg("n_val_per_split") = 200, py::arg("noise_std") = 0.05, py::arg("adsorbate_vocab_size") = 24,
      py::arg("catalyst_vocab_size") = 24);

  m.attr("VARIANTS") = [] {
    std::vector<std::string> names;
    for (auto v : kAllVariants) names.emplace_back(to_string(v));
    return names;
  }();

  py::class_<Model>(m, "Model")
      .def(py::init([](const std::string& variant, std::uint64_t seed) {
             return Model(ModelSpec::defaults(parse_variant(variant), desk_backbone()), seed);
           }),
           py::arg("variant"), py::arg("seed") = 0)
      .def_property_readonly("variant", [](const Model& self) { return std::string(to_string(self.spec().variant)); })
      .def_property_readonly("num_parameters", [](const Model& self) { return self.parameters().total_elements(); })
      .def("predict", py::overload_cast<const AtomicSystem&>(&Model::predict, py::const_), py::arg("system"))
      .def(
          "predict_many",
          [](const Model& self, const std::vector<AtomicSystem>& systems, std::size_t batch_size) {
            return self.predict(systems, batch_size);
          },
          py::arg("systems"), py::arg("batch_size") = 32);

  m.def("read_checkpoint", [](const std::filesystem::path& p) { return read_checkpoint(p).model; }, py::arg("path"));

  m.def(
      "train",
      [](const std::string& config_json) {
        const TrainConfig c = train_config_from_json(nlohmann::json::parse(config_json));
        const TrainResult r = train(c);
        py::list log;
        for (const auto& e : r.log) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["train_loss"] = e.train_loss;
          d["val_id_mae"] = e.val_id_mae ? py::object(py::float_(*e.val_id_mae)) : py::object(py::none());
          log.append(d);
        }
        return py::make_tuple(r.checkpoint.model, log);
      },
      py::arg("config_json"), "Train from a TrainConfig JSON string; returns (model, epoch log).");

  m.def(
      "evaluate",
      [](const Model& model, const Dataset& data, std::size_t batch_size) {
        return eval_to_dict(evaluate(model, data, batch_size));
      },
      py::arg("model"), py::arg("dataset"), py::arg("batch_size") = 32);

  m.def(
      "verify",
      [](const std::string& scope, std::uint64_t seed) {
        VerifyOptions o;
        o.scope = scope;
        o.seed = seed;
        py::list out;
        for (const auto& c : run_verify(o).checks) {
          py::dict d;
          d["scope"] = c.scope;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["value"] = c.value;
          d["tolerance"] = c.tolerance;
          out.append(d);
        }
        return out;
      },
      py::arg("scope") = "all", py::arg("seed") = 0);
}
