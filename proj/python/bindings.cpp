#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twinworld/corpus_builder.hpp"
#include "twinworld/errors.hpp"
#include "twinworld/evaluator.hpp"
#include "twinworld/nav_builder.hpp"
#include "twinworld/perturber.hpp"
#include "twinworld/pipeline.hpp"
#include "twinworld/universe_sampler.hpp"

namespace py = pybind11;
using namespace twinworld;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<std::string> k_core_ids(const std::vector<std::pair<std::string, std::string>>& edges, int k) {
  std::set<std::string> ids;
  std::vector<Fact> facts;
  for (const auto& [a, b] : edges) {
    ids.insert(a);
    ids.insert(b);
    Fact f;
    f.subject = a;
    f.property = "P0";
    f.property_label = "edge";
    f.object.entity = b;
    facts.push_back(f);
  }
  std::vector<Entity> ents;
  for (const auto& id : ids) {
    Entity e;
    e.id = id;
    e.label = id;
    ents.push_back(e);
  }
  auto core = k_core(KnowledgeGraph::build(ents, facts), k);
  std::vector<std::string> out;
  for (const auto& [id, e] : core.entities()) out.push_back(id);
  return out;
}

py::object run_stage_py(const std::string& name, const std::string& config, const std::string& out, bool mock,
                        std::optional<std::uint64_t> seed, std::optional<int> in_flight,
                        std::optional<std::string> variant, std::optional<std::string> mode) {
  RunManifest m;
  {
    py::gil_scoped_release release;
    StageContext ctx = make_context(config, out, mock, seed, in_flight);
    if (variant) ctx.variant = variant_from(*variant);
    if (mode) ctx.mode = observation_mode_from(*mode);
    m = run_stage(name, ctx);
  }
  return to_python(m.to_json());
}

}  // namespace

PYBIND11_MODULE(_twinworld, m) {
  m.attr("__version__") = TWINWORLD_VERSION;

  static py::exception<Error> error(m, "Error");
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<InputError> input_error(m, "InputError", error.ptr());
  static py::exception<DependencyError> dependency_error(m, "DependencyError", input_error.ptr());
  static py::exception<GateFailure> gate_error(m, "GateError", error.ptr());
  static py::exception<TransportError> transport_error(m, "TransportError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DependencyError& e) {
      dependency_error(e.what());
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const InputError& e) {
      input_error(e.what());
    } catch (const GateFailure& e) {
      gate_error(e.what());
    } catch (const TransportError& e) {
      transport_error(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def("token_f1", [](const std::string& p, const std::string& g) { return token_f1(p, g); },
        py::arg("prediction"), py::arg("gold"));
  m.def("normalize_answer", [](const std::string& s) { return normalize_answer(s); }, py::arg("text"));
  m.def("dl_distance", [](const std::string& a, const std::string& b) { return dl_distance(a, b); });
  m.def("dl_similarity", [](const std::string& a, const std::string& b) { return dl_similarity(a, b); });
  m.def("shift_timestamp", &shift_timestamp, py::arg("value"), py::arg("delta_years") = 39);
  m.def("relation_distribution", &relation_distribution, py::arg("group_sizes"), py::arg("uniformity"));
  m.def("k_core_ids", &k_core_ids, py::arg("edges"), py::arg("k"),
        "Vertices of the k-core of an undirected edge list.");
  m.def(
      "expected_hitting_time",
      [](const std::map<std::string, std::set<std::string>>& links, const std::string& source,
         const std::string& target) { return expected_hitting_time(DocGraph(links), source, target); },
      py::arg("links"), py::arg("source"), py::arg("target"));
  m.def("stage_names", &stage_names);
  m.def("run_stage", &run_stage_py, py::arg("name"), py::arg("config"), py::arg("out"), py::arg("mock") = true,
        py::arg("seed") = py::none(), py::arg("in_flight") = py::none(), py::arg("variant") = py::none(),
        py::arg("mode") = py::none(), "Runs one pipeline stage and returns its manifest.");
}
