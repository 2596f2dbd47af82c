/*
 * Copyright 2026 The cidincentives Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end. Exit codes: 0 success, 1 verdict does not hold
// (check only), 2 usage or validation error.

#ifndef CIDINC_CLI_HPP_
#define CIDINC_CLI_HPP_

#include <cstdint>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cidinc/criteria.hpp"
#include "cidinc/graph.hpp"
#include "cidinc/io.hpp"
#include "cidinc/scim.hpp"
#include "cidinc/semantics.hpp"
#include "cidinc/witness.hpp"

namespace cidinc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDoesNotHold = 1;
inline constexpr int kExitUsage = 2;

namespace internal {

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error("cannot write '" + path + "'");
}

inline std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw Error("empty item in list '" + text + "'");
    out.push_back(item);
  }
  return out;
}

// Parses "A=0,B=1".
inline Assignment ParseAssignment(const std::string& text) {
  Assignment out;
  if (text.empty()) return out;
  for (const auto& item : SplitList(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw Error("expected NAME=VALUE, got '" + item + "'");
    }
    out[item.substr(0, eq)] = Value::parse(item.substr(eq + 1));
  }
  return out;
}

inline std::string VerifyWitness(const Scim& model, IncentiveKind kind, const std::string& node,
                                 const EnumerationOptions& opts, bool& ok) {
  SemanticVerdict verdict;
  switch (kind) {
    case IncentiveKind::kVoi:
      verdict = has_voi(model, node, opts);
      break;
    case IncentiveKind::kVoc:
      verdict = has_voc(model, node, opts);
      break;
    case IncentiveKind::kRi:
      verdict = has_ri(model, node, false, opts);
      break;
    case IncentiveKind::kIci:
      verdict = has_ici_any(model, node, opts);
      break;
  }
  ok = verdict.holds;
  return render_verdict(model, verdict);
}

}  // namespace internal

// Runs one command. Output goes to out, diagnostics to err.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incentive analysis for causal influence diagrams", "cidinc"};
  app.require_subcommand(1);
  EnumerationOptions opts;
  app.add_option("--max-enumeration", opts.max_enumeration, "Cap on enumerated settings and policies")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", opts.threads, "Worker threads for exact evaluation")->check(CLI::Range(1u, 256u));

  std::string file;
  std::string dot_path;
  std::string kinds_text = "voi,ri,voc,ici";
  auto* analyze_cmd = app.add_subcommand("analyze", "Print the incentive table for a graph");
  analyze_cmd->add_option("file", file, "Model file")->required();
  analyze_cmd->add_option("--dot", dot_path, "Write annotated DOT to this path");
  analyze_cmd->add_option("--kinds", kinds_text, "Incentive kinds drawn in DOT output");

  std::string xs;
  std::string ys;
  std::string zs;
  auto* dsep_cmd = app.add_subcommand("dsep", "Test d-separation of X and Y given Z");
  dsep_cmd->add_option("file", file, "Model file")->required();
  dsep_cmd->add_option("--x", xs, "Comma-separated nodes")->required();
  dsep_cmd->add_option("--y", ys, "Comma-separated nodes")->required();
  dsep_cmd->add_option("--z", zs, "Comma-separated nodes");

  auto* reduce_cmd = app.add_subcommand("reduce", "Print the minimal reduction");
  reduce_cmd->add_option("file", file, "Model file")->required();

  bool tables = false;
  auto* solve_cmd = app.add_subcommand("solve", "Exact attainable utility and optimal policies");
  solve_cmd->add_option("file", file, "Model file")->required();
  solve_cmd->add_flag("--tables", tables, "Print the optimal decisions for every policy row");

  std::string kind_text;
  std::string node;
  std::string context_text;
  std::string d_text;
  bool support_only = false;
  auto* check_cmd = app.add_subcommand("check", "Decide an incentive on a model");
  check_cmd->add_option("file", file, "Model file")->required();
  check_cmd->add_option("--incentive", kind_text, "voi, voc, ri or ici")->required();
  check_cmd->add_option("--node", node, "Node to test")->required();
  check_cmd->add_option("--context", context_text, "Decision context NAME=VALUE,... (ici)");
  check_cmd->add_option("--d", d_text, "Decision value (ici)");
  check_cmd->add_flag("--support-only", support_only, "Only consider positive-probability settings (ri)");

  std::string output;
  auto* witness_cmd = app.add_subcommand("witness", "Build and verify a witness model");
  witness_cmd->add_option("file", file, "Graph file")->required();
  witness_cmd->add_option("--incentive", kind_text, "voi, voc, ri or ici")->required();
  witness_cmd->add_option("--node", node, "Node admitting the incentive")->required();
  witness_cmd->add_option("-o,--output", output, "Output model path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  auto parse_kind = [](const std::string& text) {
    auto k = parse_incentive_kind(text);
    if (!k) throw Error("unknown incentive '" + text + "'");
    return *k;
  };

  try {
    if (analyze_cmd->parsed()) {
      const Cid g = parse_cid(internal::ReadFile(file));
      const IncentiveReport report = analyze(g);
      out << render_report(report);
      if (!dot_path.empty()) {
        DotStyle style;
        style.kinds.clear();
        for (const auto& k : internal::SplitList(kinds_text)) style.kinds.push_back(parse_kind(k));
        internal::WriteFile(dot_path, export_dot(g, report, style));
      }
      return kExitOk;
    }
    if (dsep_cmd->parsed()) {
      const Cid g = parse_cid(internal::ReadFile(file));
      const auto z = zs.empty() ? std::vector<std::string>{} : internal::SplitList(zs);
      const bool sep = d_separated(g, internal::SplitList(xs), internal::SplitList(ys), z);
      out << (sep ? "d-separated" : "d-connected") << "\n";
      return kExitOk;
    }
    if (reduce_cmd->parsed()) {
      const Cid g = parse_cid(internal::ReadFile(file));
      out << render_edges(minimal_reduction(g));
      const auto removed = nonrequisite_observations(g);
      out << "removed links:";
      if (removed.empty()) out << " (none)";
      for (std::size_t i = 0; i < removed.size(); ++i) {
        out << (i ? ", " : " ") << g.name(removed[i]) << " -> " << g.name(g.decision());
      }
      out << "\nstable: " << (reduction_is_stable(g) ? "yes" : "no") << "\n";
      return kExitOk;
    }
    if (solve_cmd->parsed()) {
      const Scim m = parse_scim(internal::ReadFile(file));
      const Solution s = solve(m, {}, opts);
      out << "attainable utility: " << to_string(s.attainable) << "\n";
      const std::uint64_t n = s.count(opts.max_enumeration);
      out << "optimal policies: ";
      if (n > opts.max_enumeration) {
        out << "more than " << opts.max_enumeration << "\n";
      } else {
        out << n << "\n";
      }
      if (tables) {
        const int d = m.decision();
        out << "optimal decisions per row:\n";
        const auto& g = m.graph();
        const auto& layout = m.layout(d);
        for (std::size_t r = 0; r < s.optimal_choices.size(); ++r) {
          auto [pv, e] = layout.decode(r);
          std::string row;
          for (std::size_t k = 0; k < pv.size(); ++k) {
            const int p = g.parents(d)[k];
            row += (row.empty() ? "" : " ") + g.name(p) + "=" + m.domain(p)[pv[k]].to_string();
          }
          if (layout.exo_size() > 1) row += (row.empty() ? "" : " ") + std::string("eps=") + m.exogenous(d).domain[e].to_string();
          if (row.empty()) row = "(no inputs)";
          std::string choices;
          for (int c : s.optimal_choices[r]) choices += (choices.empty() ? "" : ",") + m.domain(d)[c].to_string();
          out << "  " << row << " -> {" << choices << "}" << (s.row_mass[r] == 0 ? " (probability 0)" : "") << "\n";
        }
      }
      return kExitOk;
    }
    if (check_cmd->parsed()) {
      const Scim m = parse_scim(internal::ReadFile(file));
      const IncentiveKind kind = parse_kind(kind_text);
      SemanticVerdict verdict;
      if (kind != IncentiveKind::kIci && (!context_text.empty() || !d_text.empty())) {
        throw Error("--context and --d apply only to ici");
      }
      if (kind != IncentiveKind::kRi && support_only) throw Error("--support-only applies only to ri");
      switch (kind) {
        case IncentiveKind::kVoi:
          verdict = has_voi(m, node, opts);
          break;
        case IncentiveKind::kVoc:
          verdict = has_voc(m, node, opts);
          break;
        case IncentiveKind::kRi:
          verdict = has_ri(m, node, support_only, opts);
          break;
        case IncentiveKind::kIci:
          if (!context_text.empty() && d_text.empty()) throw Error("--context requires --d");
          if (d_text.empty()) {
            verdict = has_ici_any(m, node, opts);
          } else {
            verdict = has_ici(m, node, internal::ParseAssignment(context_text), Value::parse(d_text), opts);
          }
          break;
      }
      out << render_verdict(m, verdict);
      return verdict.holds ? kExitOk : kExitDoesNotHold;
    }
    if (witness_cmd->parsed()) {
      const Cid g = parse_cid(internal::ReadFile(file));
      const IncentiveKind kind = parse_kind(kind_text);
      if (!applicable(g, kind, g.index(node))) throw Error("the incentive is undefined for '" + node + "'");
      if (!admits(g, kind, g.index(node))) {
        throw Error("'" + node + "' does not satisfy the " + std::string(label(kind)) + " criterion");
      }
      std::optional<Scim> model;
      switch (kind) {
        case IncentiveKind::kVoi:
          model = voi_witness(g, node);
          break;
        case IncentiveKind::kVoc:
          model = voc_witness(g, node).model;
          break;
        case IncentiveKind::kRi:
          model = ri_witness(g, node);
          break;
        case IncentiveKind::kIci:
          model = ici_witness(g, node).model;
          break;
      }
      bool ok = false;
      const std::string report = internal::VerifyWitness(*model, kind, node, opts, ok);
      if (!ok) {
        err << "error: witness failed verification\n" << report;
        return kExitUsage;
      }
      internal::WriteFile(output, serialize(*model));
      out << "wrote " << output << "\n" << report;
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cidinc

#endif  // CIDINC_CLI_HPP_
