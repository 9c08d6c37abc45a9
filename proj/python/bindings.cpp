#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "atlasbench/dataset.hpp"
#include "atlasbench/errors.hpp"
#include "atlasbench/metrics.hpp"
#include "atlasbench/report.hpp"
#include "atlasbench/scene_sim.hpp"

namespace py = pybind11;
using namespace atlasbench;

namespace {

BinSpec spec_named(const std::string& name) {
  if (name == "spatial") return BinSpec::spatial();
  if (name == "velocity") return BinSpec::velocity();
  if (name == "acceleration") return BinSpec::acceleration();
  if (name == "yaw") return BinSpec::yaw();
  throw py::value_error("unknown bin spec '" + name + "'");
}

Trajectory to_trajectory(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() != kPlanLength) throw py::value_error("trajectories need 6 waypoints");
  Trajectory t;
  for (std::size_t i = 0; i < pts.size(); ++i) t[i] = {pts[i].first, pts[i].second};
  return t;
}

std::vector<Scene> scenes_from(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return read_scenes_jsonl(in);
}

}  // namespace

PYBIND11_MODULE(_atlasbench, m) {
  m.attr("__version__") = "0.1.0";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("encode_bin", [](double v, const std::string& spec) { return encode_bin(v, spec_named(spec)).value(); },
        py::arg("value"), py::arg("spec") = "spatial");
  m.def("decode_bin", [](int b, const std::string& spec) { return decode_bin(BinIndex(b), spec_named(spec)); },
        py::arg("bin"), py::arg("spec") = "spatial");

  m.def("f1_from_pr", &f1_from_pr, py::arg("precision"), py::arg("recall"));

  m.def(
      "l2_horizons",
      [](const std::vector<std::pair<double, double>>& pred, const std::vector<std::pair<double, double>>& gt,
         const std::string& convention) {
        if (convention != "stp3" && convention != "at-horizon") throw py::value_error("convention: stp3 or at-horizon");
        const auto h = l2_horizons(to_trajectory(pred), to_trajectory(gt),
                                   convention == "stp3" ? L2Convention::stp3 : L2Convention::at_horizon);
        return py::dict(py::arg("1s") = h.h1, py::arg("2s") = h.h2, py::arg("3s") = h.h3, py::arg("avg") = h.avg);
      },
      py::arg("pred"), py::arg("gt"), py::arg("convention") = "stp3");

  m.def(
      "parse_planning_answer",
      [](const std::string& text, const std::string& chain) {
        const auto r = parse_planning_answer(text, ChainSpec::parse(chain));
        if (!r.ok()) throw py::value_error(r.error().message());
        std::vector<std::pair<double, double>> wps;
        for (const auto& p : r.value().decoded_waypoints()) wps.emplace_back(p.x, p.y);
        return wps;
      },
      py::arg("text"), py::arg("chain") = "V-A-P", "Decoded waypoints; raises ValueError with the error position.");

  m.def(
      "generate_scenes",
      [](std::uint64_t first_seed, int count) {
        std::ostringstream out;
        write_scenes_jsonl(generate_scenes(first_seed, count), out);
        return out.str();
      },
      py::arg("first_seed"), py::arg("count"), "Scenes as JSONL text.");

  m.def(
      "build_dataset",
      [](const std::string& scenes_jsonl, const std::vector<std::string>& tasks, const std::string& chain,
         std::uint64_t seed) {
        DatasetOptions o;
        o.tasks.clear();
        for (const auto& t : tasks) {
          const auto task = parse_task(t);
          if (!task) throw py::value_error("unknown task '" + t + "'");
          o.tasks.push_back(*task);
        }
        o.chain = ChainSpec::parse(chain);
        o.seed = seed;
        std::ostringstream out;
        write_qa_jsonl(build_dataset(scenes_from(scenes_jsonl), o), out);
        return out.str();
      },
      py::arg("scenes_jsonl"), py::arg("tasks") = std::vector<std::string>{"planning"}, py::arg("chain") = "V-A-P",
      py::arg("seed") = 0, "QA pairs as JSONL text.");

  m.def(
      "evaluate",
      [](const std::string& preds_jsonl, const std::string& scenes_jsonl, const std::string& method) {
        std::istringstream in(preds_jsonl);
        const auto preds = read_predictions_jsonl(in);
        EvalOptions o;
        o.method = method;
        return to_json(evaluate(preds, scenes_from(scenes_jsonl), o)).dump(2);
      },
      py::arg("preds_jsonl"), py::arg("scenes_jsonl"), py::arg("method") = "model", "Metric report as JSON text.");
}
