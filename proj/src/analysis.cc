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

#include "judgetune/analysis.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "judgetune/errors.h"
#include "judgetune/rng.h"

namespace judgetune {
namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string Flag(bool b) { return b ? "true" : "false"; }

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string XmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

using HyperValues = std::vector<std::pair<std::string, std::string>>;

HyperValues Hyperparameters(const JudgeConfig& c) {
  return {{"model", c.model_id},
          {"temperature", Num(c.temperature)},
          {"average_orders", Flag(c.average_orders)},
          {"output_type", std::string(OutputTypeName(c.prompt.output_type))},
          {"provide_answer", Flag(c.prompt.provide_answer)},
          {"provide_explanation", Flag(c.prompt.provide_explanation)},
          {"provide_example", Flag(c.prompt.provide_example)},
          {"use_json", Flag(c.prompt.use_json)}};
}

FrequencyTable EmptyTable(const SearchSpace& space,
                          const std::vector<std::string>& models) {
  FrequencyTable t;
  for (const auto& m : models) t["model"][m] = 0.0;
  for (double temp : space.temperatures) t["temperature"][Num(temp)] = 0.0;
  for (bool o : space.order_modes) t["average_orders"][Flag(o)] = 0.0;
  for (OutputType type : kAllOutputTypes) {
    t["output_type"][std::string(OutputTypeName(type))] = 0.0;
  }
  for (const char* flag : {"provide_answer", "provide_explanation",
                           "provide_example", "use_json"}) {
    t[flag]["false"] = 0.0;
    t[flag]["true"] = 0.0;
  }
  return t;
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw DataError("cannot write " + path.string());
}

std::string ScatterSvg(const RungState& rung, size_t r) {
  constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 20, kTop = 40,
                   kBottom = 60;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& e : rung.evaluated) {
    if (!e.agreement) continue;
    xmin = std::min(xmin, e.cost_per_annotation);
    xmax = std::max(xmax, e.cost_per_annotation);
    ymin = std::min(ymin, *e.agreement);
    ymax = std::max(ymax, *e.agreement);
  }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5 * std::max(std::abs(xmin), 1e-9), xmax = 2 * xmax - xmin;
  if (ymax == ymin) ymin -= 0.05, ymax += 0.05;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - ymin) / (ymax - ymin) * (kH - kTop - kBottom); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">rung " << r << ": "
      << rung.instruction_count << " instructions</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\""
      << kW - kRight << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    svg << "<text x=\"" << Num(x) << "\" y=\"" << Num(y) << "\" text-anchor=\""
        << anchor << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << XmlEscape(text) << "</text>\n";
  };
  label(kLeft, kH - kBottom + 16, Num(xmin), "start");
  label(kW - kRight, kH - kBottom + 16, Num(xmax), "end");
  label(kLeft - 6, kH - kBottom, Num(ymin), "end");
  label(kLeft - 6, kTop + 4, Num(ymax), "end");
  label((kLeft + kW - kRight) / 2, kH - 16, "cost per annotation", "middle");
  label(16, kTop - 12, "agreement", "start");
  std::set<std::string> front(rung.pareto_front.begin(), rung.pareto_front.end());
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& e : rung.evaluated) {
      if (!e.agreement) continue;
      const bool on_front = front.count(e.config_hash) > 0;
      if (on_front != (pass == 1)) continue;
      svg << "<circle cx=\"" << Num(px(e.cost_per_annotation)) << "\" cy=\""
          << Num(py(*e.agreement)) << "\" r=\"" << (on_front ? 4 : 2.5)
          << "\" fill=\"" << (on_front ? "#d62728" : "#1f77b4")
          << "\" fill-opacity=\"" << (on_front ? "1" : "0.5") << "\"><title>"
          << e.config_hash << "</title></circle>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

SurvivalReport SurvivalAnalysis(std::span<const JudgeConfig> ranked, size_t k,
                                const SearchSpace& space,
                                double size_threshold_b) {
  if (k > ranked.size()) {
    throw std::invalid_argument("k exceeds the number of ranked configs");
  }
  SurvivalReport report;
  report.k = k;
  report.size_threshold_b = size_threshold_b;
  report.small.name = "small";
  report.large.name = "large";
  std::vector<std::string> small_models, large_models;
  for (const auto& m : space.models) {
    (m.params_b < size_threshold_b ? small_models : large_models).push_back(m.id);
  }
  std::map<std::string, std::map<std::string, size_t>> counts[2];
  for (const auto& c : ranked) {
    const ModelInfo* m = space.FindModel(c.model_id);
    if (m == nullptr) throw std::invalid_argument("unknown model " + c.model_id);
    const int s = m->params_b < size_threshold_b ? 0 : 1;
    SurvivalStratum& stratum = s == 0 ? report.small : report.large;
    if (stratum.n_configs == k) continue;
    ++stratum.n_configs;
    for (const auto& [name, value] : Hyperparameters(c)) ++counts[s][name][value];
  }
  for (int s = 0; s < 2; ++s) {
    SurvivalStratum& stratum = s == 0 ? report.small : report.large;
    if (stratum.n_configs == 0) continue;
    FrequencyTable t = EmptyTable(space, s == 0 ? small_models : large_models);
    for (const auto& [name, values] : counts[s]) {
      for (const auto& [value, n] : values) {
        t[name][value] = static_cast<double>(n) / stratum.n_configs;
      }
    }
    stratum.frequencies = std::move(t);
  }
  return report;
}

StabilityMatrix PromptStabilityMatrix(const std::vector<std::vector<double>>& scores) {
  const size_t m = scores.size();
  const size_t n = m == 0 ? 0 : scores[0].size();
  if (n < 2) throw std::invalid_argument("need at least 2 columns");
  for (const auto& row : scores) {
    if (row.size() != n) throw std::invalid_argument("rows differ in length");
  }
  std::vector<std::vector<double>> z(m, std::vector<double>(n));
  std::vector<bool> constant(m, false);
  for (size_t i = 0; i < m; ++i) {
    const double mean = std::accumulate(scores[i].begin(), scores[i].end(), 0.0) / n;
    double ss = 0.0;
    for (double x : scores[i]) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / n);
    constant[i] = !(sd > 0.0);
    for (size_t j = 0; j < n; ++j) z[i][j] = constant[i] ? 0.0 : (scores[i][j] - mean) / sd;
  }
  StabilityMatrix out;
  out.size = m;
  out.values.assign(m * m, 0.0);
  out.defined.assign(m * m, false);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = i; j < m; ++j) {
      if (constant[i] || constant[j]) continue;
      double v = 1.0;
      if (i != j) {
        double dot = 0.0;
        for (size_t t = 0; t < n; ++t) dot += z[i][t] * z[j][t];
        v = std::clamp(dot / n, -1.0, 1.0);
      }
      out.values[i * m + j] = out.values[j * m + i] = v;
      out.defined[i * m + j] = out.defined[j * m + i] = true;
    }
  }
  return out;
}

std::vector<ScalingCell> ScalingCurves(
    const std::map<double, std::vector<Annotation>>& pools,
    std::span<const size_t> instruction_counts, const AnnotationMetric& metric,
    int n_subsets, uint64_t seed) {
  if (n_subsets < 1) throw std::invalid_argument("n_subsets must be >= 1");
  std::vector<ScalingCell> cells;
  for (const auto& [size, pool] : pools) {
    for (size_t n : instruction_counts) {
      ScalingCell cell;
      cell.model_size = size;
      cell.n_instructions = n;
      if (n == 0 || pool.size() < n) {
        cell.missing = true;
        cells.push_back(cell);
        continue;
      }
      Rng rng(Mix64(seed ^ Mix64(std::bit_cast<uint64_t>(size) ^ Mix64(n))));
      std::vector<size_t> idx(pool.size());
      std::vector<Annotation> subset(n);
      std::vector<double> values;
      for (int s = 0; s < n_subsets; ++s) {
        std::iota(idx.begin(), idx.end(), 0);
        for (size_t i = 0; i < n; ++i) {
          std::swap(idx[i], idx[i + rng.UniformIndex(pool.size() - i)]);
          subset[i] = pool[idx[i]];
        }
        try {
          values.push_back(metric(subset));
        } catch (const UndefinedMetricError&) {
        }
      }
      if (values.empty()) {
        cell.missing = true;
      } else {
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        cell.value = mean;
        cell.dispersion = std::sqrt(ss / values.size());
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<std::string> EmitReport(const TuningState& state,
                                    const ReportInputs& inputs,
                                    const std::filesystem::path& out_dir) {
  if (state.rungs.empty()) throw std::invalid_argument("no completed rung to report");
  if (inputs.space == nullptr) throw std::invalid_argument("report needs a search space");
  const SearchSpace& space = *inputs.space;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  {
    const std::filesystem::path probe = out_dir / ".write_probe";
    std::ofstream out(probe, std::ios::binary);
    if (!out) throw DataError("output directory is not writable: " + out_dir.string());
    out.close();
    std::filesystem::remove(probe, ec);
  }

  std::unordered_map<std::string, const JudgeConfig*> configs;
  for (const auto& c : state.candidates) configs.emplace(ConfigHash(c), &c);
  auto config_of = [&](const std::string& hash) -> const JudgeConfig& {
    auto it = configs.find(hash);
    if (it == configs.end()) throw DataError("unknown config hash " + hash);
    return *it->second;
  };
  const std::string config_header =
      "model,temperature,average_orders,output_type,provide_answer,"
      "provide_explanation,provide_example,use_json";
  auto config_fields = [&](const JudgeConfig& c) {
    std::string s;
    for (const auto& [name, value] : Hyperparameters(c)) {
      if (!s.empty()) s += ',';
      s += CsvField(value);
    }
    return s;
  };

  std::vector<std::string> written;
  for (size_t r = 0; r < state.rungs.size(); ++r) {
    const RungState& rung = state.rungs[r];
    std::unordered_map<std::string, const ConfigResult*> by_hash;
    for (const auto& e : rung.evaluated) by_hash.emplace(e.config_hash, &e);
    const std::set<std::string> survivors(rung.survivors.begin(), rung.survivors.end());
    std::ostringstream csv;
    csv << "rank,config_hash," << config_header
        << ",agreement,cost_per_annotation,n_used,n_parse_failed,"
           "n_transport_failed,layer,survived\n";
    for (const auto& hash : rung.ranking) {
      const ConfigResult& e = *by_hash.at(hash);
      csv << e.rank << ',' << hash << ',' << config_fields(config_of(hash)) << ','
          << (e.agreement ? Num(*e.agreement) : "") << ','
          << Num(e.cost_per_annotation) << ',' << e.n_used << ','
          << e.n_parse_failed << ',' << e.n_transport_failed << ','
          << (e.layer ? std::to_string(*e.layer) : "") << ','
          << Flag(survivors.count(hash) > 0) << '\n';
    }
    const std::string base = "rung_" + std::to_string(r);
    WriteFile(out_dir / (base + "_objectives.csv"), csv.str());
    written.push_back(base + "_objectives.csv");
    WriteFile(out_dir / (base + "_scatter.svg"), ScatterSvg(rung, r));
    written.push_back(base + "_scatter.svg");
  }

  {
    const RungState& last = state.rungs.back();
    std::unordered_map<std::string, const ConfigResult*> by_hash;
    for (const auto& e : last.evaluated) by_hash.emplace(e.config_hash, &e);
    std::ostringstream csv;
    csv << "rank,config_hash," << config_header << ",agreement,cost_per_annotation\n";
    for (const auto& hash : last.ranking) {
      const ConfigResult& e = *by_hash.at(hash);
      if (!e.layer || *e.layer != 0) continue;
      csv << e.rank << ',' << hash << ',' << config_fields(config_of(hash)) << ','
          << Num(*e.agreement) << ',' << Num(e.cost_per_annotation) << '\n';
    }
    WriteFile(out_dir / "pareto_front.csv", csv.str());
    written.push_back("pareto_front.csv");
  }

  {
    std::vector<JudgeConfig> ranked;
    for (const auto& hash : state.rungs[0].ranking) ranked.push_back(config_of(hash));
    const size_t k = std::min(inputs.survival_k, ranked.size());
    const SurvivalReport rep = SurvivalAnalysis(ranked, k, space, inputs.size_threshold_b);
    std::ostringstream csv;
    csv << "stratum,n_configs,hyperparameter,value,frequency\n";
    for (const SurvivalStratum* s : {&rep.small, &rep.large}) {
      if (!s->frequencies) {
        csv << s->name << ",0,,,undefined\n";
        continue;
      }
      for (const auto& [name, values] : *s->frequencies) {
        for (const auto& [value, f] : values) {
          csv << s->name << ',' << s->n_configs << ',' << name << ','
              << CsvField(value) << ',' << Num(f) << '\n';
        }
      }
    }
    WriteFile(out_dir / "survival.csv", csv.str());
    written.push_back("survival.csv");
  }

  {
    // Mean rung-0 agreement per (model, prompt), over temperatures and order modes.
    std::map<std::string, std::map<size_t, std::pair<double, size_t>>> cells;
    for (const auto& e : state.rungs[0].evaluated) {
      if (!e.agreement) continue;
      const JudgeConfig& c = config_of(e.config_hash);
      auto& [sum, count] = cells[c.model_id][PromptIndex(c.prompt)];
      sum += *e.agreement;
      ++count;
    }
    std::vector<std::string> models;
    std::set<size_t> common;
    for (const auto& m : space.models) {
      auto it = cells.find(m.id);
      if (it == cells.end()) continue;
      std::set<size_t> prompts;
      for (const auto& [p, v] : it->second) prompts.insert(p);
      if (models.empty()) {
        common = prompts;
      } else {
        std::set<size_t> both;
        std::set_intersection(common.begin(), common.end(), prompts.begin(),
                              prompts.end(), std::inserter(both, both.begin()));
        common = std::move(both);
      }
      models.push_back(m.id);
    }
    if (models.size() >= 2 && common.size() >= 2) {
      std::vector<std::vector<double>> x;
      for (const auto& m : models) {
        std::vector<double> row;
        for (size_t p : common) {
          const auto& [sum, count] = cells[m][p];
          row.push_back(sum / count);
        }
        x.push_back(std::move(row));
      }
      const StabilityMatrix mat = PromptStabilityMatrix(x);
      std::ostringstream csv;
      csv << "model";
      for (const auto& m : models) csv << ',' << CsvField(m);
      csv << '\n';
      for (size_t i = 0; i < models.size(); ++i) {
        csv << CsvField(models[i]);
        for (size_t j = 0; j < models.size(); ++j) {
          csv << ',' << (mat.is_defined(i, j) ? Num(mat.at(i, j)) : "undefined");
        }
        csv << '\n';
      }
      WriteFile(out_dir / "stability_matrix.csv", csv.str());
      written.push_back("stability_matrix.csv");
    }
  }
  return written;
}

}  // namespace judgetune
