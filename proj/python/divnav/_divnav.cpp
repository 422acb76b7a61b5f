// Python bindings for the divnav core. Grid-valued results cross the
// boundary as numpy arrays (row-major, shape [height, width]); whole
// documents (worlds, episodes, results, reports) cross as JSON strings so
// Python sees exactly what the CLI reads and writes.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "divnav/exploration.hpp"
#include "divnav/fusion.hpp"
#include "divnav/io.hpp"
#include "divnav/pipeline.hpp"

namespace py = pybind11;
using namespace divnav;

namespace {

SimilarityMap map_from_array(const py::array_t<double>& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-D array of scores");
  const GridSpec spec{1.0, static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 0.0, 0.0};
  SimilarityMap m{spec, std::vector<double>(static_cast<size_t>(spec.cells()))};
  const auto r = a.unchecked<2>();
  for (int row = 0; row < spec.height; ++row)
    for (int col = 0; col < spec.width; ++col) m.at({col, row}) = r(row, col);
  return m;
}

py::array_t<double> array_from_map(const SimilarityMap& m) {
  py::array_t<double> a({m.spec.height, m.spec.width});
  auto w = a.mutable_unchecked<2>();
  for (int row = 0; row < m.spec.height; ++row)
    for (int col = 0; col < m.spec.width; ++col) w(row, col) = m.at({col, row});
  return a;
}

std::vector<SimilarityMap> stack_from_list(const std::vector<py::array_t<double>>& arrays) {
  std::vector<SimilarityMap> maps;
  maps.reserve(arrays.size());
  for (const auto& a : arrays) maps.push_back(map_from_array(a));
  return maps;
}

PipelineConfig config_from_kwargs(double alpha, bool primary_only, bool validate_constraint,
                                  double eps_false_negative, double eps_false_positive,
                                  int step_budget) {
  PipelineConfig cfg;
  cfg.alpha = alpha;
  cfg.primary_only = primary_only;
  cfg.validate_constraint = validate_constraint;
  cfg.eps_false_negative = eps_false_negative;
  cfg.eps_false_positive = eps_false_positive;
  if (step_budget > 0) cfg.step_budget = step_budget;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_divnav, m) {
  m.doc() = "Spatially-constrained object search: decomposition, fusion, planning, simulation";

  py::register_exception<LoadError>(m, "LoadError");
  py::register_exception<VocabularyError>(m, "VocabularyError");

  py::class_<SpatialRelation>(m, "SpatialRelation")
      .def_property_readonly("kind", [](const SpatialRelation& r) { return to_string(r.kind); })
      .def_readonly("subject", &SpatialRelation::subject)
      .def_readonly("object", &SpatialRelation::object)
      .def("__repr__", [](const SpatialRelation& r) {
        return "SpatialRelation(" + r.subject + " " + to_string(r.kind) + " " + r.object + ")";
      });

  py::class_<QueryDecomposition>(m, "QueryDecomposition")
      .def_readonly("raw", &QueryDecomposition::raw)
      .def_readonly("primary", &QueryDecomposition::primary)
      .def_readonly("explicit_targets", &QueryDecomposition::explicit_targets)
      .def_readonly("inferred_targets", &QueryDecomposition::inferred_targets)
      .def_readonly("implicit_targets", &QueryDecomposition::implicit_targets)
      .def_readonly("relations", &QueryDecomposition::relations)
      .def_readonly("proximity_set", &QueryDecomposition::proximity_set)
      .def_property_readonly("parse_quality",
                             [](const QueryDecomposition& d) {
                               switch (d.parse_quality) {
                                 case ParseQuality::Full: return "full";
                                 case ParseQuality::Partial: return "partial";
                                 default: return "fallback";
                               }
                             })
      .def("to_json", &decomposition_to_json)
      .def("__repr__", [](const QueryDecomposition& d) {
        return "QueryDecomposition(primary='" + d.primary + "', |Q|=" +
               std::to_string(d.proximity_set.size()) + ")";
      });

  m.def(
      "decompose",
      [](const std::string& text) { return decompose(text, Lexicon::defaults()); },
      py::arg("text"),
      "Rule-based decomposition of a language query into a primary target, "
      "related targets and spatial relations.");

  m.def(
      "intersect",
      [](const std::vector<py::array_t<double>>& maps) {
        return array_from_map(intersect(stack_from_list(maps)));
      },
      py::arg("maps"), "Per-cell minimum across similarity maps (value intersection).");

  m.def(
      "combine",
      [](const std::vector<py::array_t<double>>& maps, double alpha) {
        return array_from_map(combine(stack_from_list(maps), FusionConfig{alpha}));
      },
      py::arg("maps"), py::arg("alpha") = 0.8,
      "alpha * per-cell min + (1 - alpha) * per-cell max across similarity maps.");

  m.def(
      "plan_path",
      [](const py::array_t<std::uint8_t>& navigable, std::pair<int, int> start,
         std::pair<int, int> goal,
         int snap_radius) -> std::optional<std::vector<std::pair<int, int>>> {
        if (navigable.ndim() != 2) throw DimensionError("expected a 2-D navigable mask");
        const GridSpec spec{1.0, static_cast<int>(navigable.shape(1)),
                            static_cast<int>(navigable.shape(0)), 0.0, 0.0};
        ExplorationState state = ExplorationState::empty(spec);
        const auto r = navigable.unchecked<2>();
        for (int row = 0; row < spec.height; ++row)
          for (int col = 0; col < spec.width; ++col)
            state.navigable.at({col, row}) = r(row, col) ? 1 : 0;
        const auto path = plan_path(state, Cell{start.first, start.second},
                                    Cell{goal.first, goal.second}, PlannerConfig{snap_radius});
        if (!path) return std::nullopt;
        std::vector<std::pair<int, int>> out;
        out.reserve(path->size());
        for (const Cell c : *path) out.emplace_back(c.col, c.row);
        return out;
      },
      py::arg("navigable"), py::arg("start"), py::arg("goal"), py::arg("snap_radius") = 4,
      "8-connected A* over a [height, width] navigable mask. Cells are (col, row) "
      "pairs; returns the path as (col, row) pairs or None if unreachable.");

  m.def(
      "make_decoy_world",
      [](std::uint64_t seed) {
        const auto [world, episode] = make_decoy_world(seed);
        return std::make_pair(world_to_json(world), episode_to_json(episode));
      },
      py::arg("seed"),
      "Procedural benchmark world with one constrained goal and same-label "
      "decoys. Returns (world_json, episode_json).");

  m.def(
      "run_episode",
      [](const std::string& world_json, const std::string& episode_json, std::uint64_t seed,
         double alpha, bool primary_only, bool validate_constraint, double eps_false_negative,
         double eps_false_positive, int step_budget) {
        const WorldModel world = parse_world(world_json);
        const Episode episode = parse_episode(episode_json);
        const PipelineConfig cfg =
            config_from_kwargs(alpha, primary_only, validate_constraint, eps_false_negative,
                               eps_false_positive, step_budget);
        EpisodeResult result = run_episode(world, episode, cfg, seed);
        result.config_fingerprint = config_fingerprint(cfg);
        return result_to_json(result);
      },
      py::arg("world_json"), py::arg("episode_json"), py::arg("seed") = 0,
      py::arg("alpha") = 0.8, py::arg("primary_only") = false,
      py::arg("validate_constraint") = true, py::arg("eps_false_negative") = 0.0,
      py::arg("eps_false_positive") = 0.0, py::arg("step_budget") = 0,
      py::call_guard<py::gil_scoped_release>(),
      "Run one search episode end to end; returns the result document as JSON.");

  m.def(
      "aggregate",
      [](const std::vector<std::string>& result_jsons) {
        std::vector<EpisodeResult> results;
        results.reserve(result_jsons.size());
        for (const auto& s : result_jsons) results.push_back(parse_result(s));
        return report_to_json(aggregate(results));
      },
      py::arg("results"),
      "Aggregate episode result JSON documents into a metrics report (SR, Pr, "
      "SRAT, FP, TNF with 95% confidence intervals) as JSON.");

  m.def("clopper_pearson", &clopper_pearson, py::arg("successes"), py::arg("trials"),
        py::arg("confidence") = 0.95, "Exact binomial confidence interval as (low, high).");

  m.def(
      "report_table",
      [](const std::string& report_json) { return report_to_table(parse_report(report_json)); },
      py::arg("report_json"), "Render a metrics report JSON document as a plain-text table.");
}
