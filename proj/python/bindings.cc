// Copyright 2026 The judgetune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "judgetune/analysis.h"
#include "judgetune/annotation.h"
#include "judgetune/cli.h"
#include "judgetune/cost_model.h"
#include "judgetune/errors.h"
#include "judgetune/metrics.h"
#include "judgetune/moo.h"
#include "judgetune/search_space.h"
#include "judgetune/tuning.h"
#include "judgetune/verdict.h"

namespace py = pybind11;
using namespace judgetune;

namespace {

PromptConfig MakePrompt(const std::string& output_type, bool provide_answer,
                        bool provide_explanation, bool provide_example, bool use_json) {
  return {ParseOutputType(output_type), provide_answer, provide_explanation, provide_example,
          use_json};
}

std::vector<ObjectivePoint> Points(const std::vector<std::vector<double>>& objectives) {
  std::vector<ObjectivePoint> pts;
  pts.reserve(objectives.size());
  for (const auto& o : objectives) pts.push_back({"", o, 0});
  return pts;
}

ObjectiveSchema Schema(const std::vector<std::string>& directions) {
  ObjectiveSchema s;
  for (const auto& d : directions) {
    if (d == "max") {
      s.directions.push_back(Direction::kMaximize);
    } else if (d == "min") {
      s.directions.push_back(Direction::kMinimize);
    } else {
      throw std::invalid_argument("direction must be 'min' or 'max'");
    }
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "judgetune core bindings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", PyExc_ArithmeticError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_RuntimeError);

  m.def(
      "enumerate_configs",
      [](const std::string& search_space_path) {
        const SearchSpace space =
            search_space_path.empty() ? DefaultSearchSpace() : LoadSearchSpace(search_space_path);
        std::vector<std::string> out;
        for (const auto& c : EnumerateConfigs(space)) out.push_back(CanonicalJson(c));
        return out;
      },
      py::arg("search_space_path") = "",
      "Canonical JSON of every config; the default space when no file is given.");
  m.def(
      "canonical_json",
      [](const std::string& json) { return CanonicalJson(ParseJudgeConfig(json)); });
  m.def("config_hash", [](const std::string& json) { return ConfigHash(ParseJudgeConfig(json)); });
  m.def(
      "render_prompt",
      [](const std::string& output_type, bool provide_answer, bool provide_explanation,
         bool provide_example, bool use_json, const std::string& instruction,
         const std::string& output_a, const std::string& output_b) {
        return RenderPrompt(
            MakePrompt(output_type, provide_answer, provide_explanation, provide_example, use_json),
            instruction, output_a, output_b);
      },
      py::arg("output_type"), py::arg("provide_answer"), py::arg("provide_explanation"),
      py::arg("provide_example"), py::arg("use_json"), py::arg("instruction"),
      py::arg("output_a"), py::arg("output_b"));
  m.def(
      "parse_preference",
      [](const std::string& output_type, bool use_json,
         const std::string& completion) -> py::object {
        const ParseResult r = ParseCompletion(ParseOutputType(output_type), use_json, completion);
        if (const auto* f = std::get_if<ParseFailure>(&r)) {
          return py::make_tuple(py::none(), std::string(ParseErrorCodeName(f->code)));
        }
        return py::make_tuple(VerdictToPreference(std::get<Verdict>(r)).value(), py::none());
      },
      py::arg("output_type"), py::arg("use_json"), py::arg("completion"),
      "(preference, None) on success, (None, reason code) on failure.");
  m.def(
      "discretize",
      [](double p, double tie_band) { return Discretize(PreferenceScore(p), tie_band); },
      py::arg("p"), py::arg("tie_band") = kDefaultTieBand);
  m.def("combine_orders", &CombineOrders, py::arg("p_ab"), py::arg("p_ba"));

  m.def(
      "non_dominated_sort",
      [](const std::vector<std::vector<double>>& objectives,
         const std::vector<std::string>& directions) {
        return NonDominatedSort(Points(objectives), Schema(directions));
      },
      py::arg("objectives"), py::arg("directions"));
  m.def(
      "rank_configs",
      [](const std::vector<std::vector<double>>& objectives,
         const std::vector<std::string>& directions) {
        return RankConfigs(Points(objectives), Schema(directions));
      },
      py::arg("objectives"), py::arg("directions"));

  m.def("spearman", [](const std::vector<double>& a, const std::vector<double>& b) {
    return Spearman(a, b);
  });
  m.def("average_ranks", [](const std::vector<double>& v) { return AverageRanks(v); });
  m.def("coefficient_of_variation", &CoefficientOfVariation, py::arg("mean"), py::arg("std"));
  m.def(
      "bootstrap_mean",
      [](const std::vector<double>& values, int n_resamples, uint64_t seed) {
        const BootstrapResult r = BootstrapMean(values, n_resamples, seed);
        return py::make_tuple(r.mean, r.std);
      },
      py::arg("values"), py::arg("n_resamples"), py::arg("seed"));
  m.def(
      "stability_matrix",
      [](const std::vector<std::vector<double>>& scores) {
        const StabilityMatrix s = PromptStabilityMatrix(scores);
        std::vector<std::vector<py::object>> out(s.size);
        for (size_t i = 0; i < s.size; ++i) {
          for (size_t j = 0; j < s.size; ++j) {
            out[i].push_back(s.is_defined(i, j) ? py::cast(s.at(i, j)) : py::none());
          }
        }
        return out;
      },
      "Row correlation matrix; None where a row is constant.");

  m.def("planned_annotations",
        [](const std::vector<std::pair<size_t, size_t>>& rungs) {
          RungPlan plan;
          for (const auto& [s, n] : rungs) plan.rungs.push_back({s, n});
          plan.Validate();
          return py::make_tuple(plan.PlannedAnnotations(), plan.IncrementalAnnotations());
        },
        py::arg("rungs"), "(planned, incremental) annotation counts of a rung plan.");
  m.def("campaign_cost_estimate", &CampaignCostEstimate, py::arg("total_annotations"),
        py::arg("seconds_per_annotation") = 0.6, py::arg("hourly_rate") = 2.79);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = RunCli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the judgetune tool; returns (exit code, stdout, stderr).");
}
