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

// JSON model documents, DOT export and plain-text rendering of reports,
// policies and verdicts.

#ifndef CIDINC_IO_HPP_
#define CIDINC_IO_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cidinc/criteria.hpp"
#include "cidinc/graph.hpp"
#include "cidinc/scim.hpp"
#include "cidinc/semantics.hpp"
#include "cidinc/value.hpp"

namespace cidinc {

inline constexpr int kFormatVersion = 1;

// Raised for malformed documents. The message names the position or field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A parsed model file: always a graph, plus a full model for "scim" files.
struct ModelDocument {
  Cid graph;
  std::optional<Scim> model;
};

namespace internal {

using Json = nlohmann::json;

inline std::string Where(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

inline Value ParseValue(const Json& j, const std::string& field) {
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    if (text.empty()) throw ParseError(field + ": empty value");
    return Value::parse(text);
  }
  if (j.is_number_integer()) return Value(Rational(mpz_class(j.dump())));
  if (j.is_number()) throw ParseError(field + ": write non-integer numbers as fraction strings \"p/q\"");
  throw ParseError(field + ": expected a string or integer value");
}

inline const Json& Field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline std::string Text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a string");
  return j.get<std::string>();
}

inline FiniteDomain ParseDomain(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of values");
  FiniteDomain d;
  for (std::size_t i = 0; i < j.size(); ++i) d.values.push_back(ParseValue(j[i], where + "[" + std::to_string(i) + "]"));
  return d;
}

inline Json ValueJson(const Value& v) { return v.to_string(); }

}  // namespace internal

// Parses a model document. Validation runs automatically; failures raise
// ParseError (syntax or field errors) or ValidationError.
inline ModelDocument parse_model(std::string_view text) {
  using internal::Json;
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("syntax error at " + internal::Where(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                     std::string(e.what()));
  }
  if (!doc.is_object()) throw ParseError("document: expected a JSON object");
  const auto& version = internal::Field(doc, "format_version", "document");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    throw ParseError("format_version: unsupported version " + version.dump());
  }
  const std::string kind = internal::Text(internal::Field(doc, "kind", "document"), "kind");
  if (kind != "cid" && kind != "scim") throw ParseError("kind: expected \"cid\" or \"scim\", got \"" + kind + "\"");
  const bool full = kind == "scim";

  const auto& nodes = internal::Field(doc, "nodes", "document");
  if (!nodes.is_array()) throw ParseError("nodes: expected an array");
  CidSpec spec;
  std::map<std::string, FiniteDomain> domains;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const auto& n = nodes[i];
    NodeDecl decl;
    decl.name = internal::Text(internal::Field(n, "name", where), where + ".name");
    const std::string k = internal::Text(internal::Field(n, "kind", where), where + ".kind");
    auto parsed = parse_node_kind(k);
    if (!parsed) throw ParseError(where + ".kind: unknown node kind '" + k + "'");
    decl.kind = *parsed;
    if (n.contains("parents")) {
      const auto& ps = n.at("parents");
      if (!ps.is_array()) throw ParseError(where + ".parents: expected an array");
      for (std::size_t j = 0; j < ps.size(); ++j) {
        decl.parents.push_back(internal::Text(ps[j], where + ".parents[" + std::to_string(j) + "]"));
      }
    }
    if (n.contains("domain")) {
      domains[decl.name] = internal::ParseDomain(n.at("domain"), where + ".domain");
    } else if (full) {
      throw ParseError(where + ": missing field 'domain'");
    }
    spec.nodes.push_back(std::move(decl));
  }
  ModelDocument out{Cid::make(spec), std::nullopt};
  if (!full) return out;

  const Cid& g = out.graph;
  ScimSpec model;
  model.graph = g;
  model.nodes.resize(g.size());
  for (int v = 0; v < g.size(); ++v) model.nodes[v].domain = domains.at(g.name(v));

  if (doc.contains("exogenous")) {
    const auto& exo = doc.at("exogenous");
    if (!exo.is_object()) throw ParseError("exogenous: expected an object keyed by node name");
    for (const auto& [name, entry] : exo.items()) {
      const std::string where = "exogenous." + name;
      auto v = g.find(name);
      if (!v) throw ParseError(where + ": unknown node");
      ExogenousSpec e;
      e.domain = internal::ParseDomain(internal::Field(entry, "domain", where), where + ".domain");
      const auto& dist = internal::Field(entry, "dist", where);
      if (!dist.is_object()) throw ParseError(where + ".dist: expected an object mapping values to probabilities");
      e.dist.assign(e.domain.size(), Rational(0));
      std::vector<char> seen(e.domain.size(), 0);
      for (const auto& [key, prob] : dist.items()) {
        const std::string field = where + ".dist." + key;
        auto idx = e.domain.index_of(Value::parse(key));
        if (!idx) throw ParseError(field + ": value is not in the exogenous domain");
        auto q = prob.is_string() ? parse_rational(prob.get<std::string>())
                                  : (prob.is_number_integer() ? parse_rational(prob.dump()) : std::nullopt);
        if (!q) throw ParseError(field + ": expected a fraction string \"p/q\"");
        e.dist[*idx] = *q;
        seen[*idx] = 1;
      }
      for (int i = 0; i < e.domain.size(); ++i) {
        if (!seen[i]) throw ParseError(where + ".dist: no probability for value '" + e.domain[i].to_string() + "'");
      }
      model.nodes[*v].exogenous = std::move(e);
    }
  }

  const Json no_functions = Json::object();
  const auto& functions = doc.contains("functions") ? doc.at("functions") : no_functions;
  if (!functions.is_object()) throw ParseError("functions: expected an object keyed by node name");
  for (const auto& [name, rows] : functions.items()) {
    if (!g.find(name)) throw ParseError("functions." + name + ": unknown node");
  }
  for (int v = 0; v < g.size(); ++v) {
    const std::string& name = g.name(v);
    if (!functions.contains(name)) continue;
    const std::string where = "functions." + name;
    const auto& rows = functions.at(name);
    if (!rows.is_array()) throw ParseError(where + ": expected an array of rows");
    std::vector<int> sizes;
    for (int p : g.parents(v)) sizes.push_back(model.nodes[p].domain.size());
    const auto& exo = model.nodes[v].exogenous;
    const RowLayout layout(g.parents(v), sizes, exo.domain.size());
    if (layout.rows() > internal::kMaxTableRows) throw ParseError(where + ": table is too large");
    FunctionTable table{std::vector<int>(layout.rows(), -1)};
    std::vector<int> values(g.size(), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string rw = where + "[" + std::to_string(r) + "]";
      const auto& row = rows[r];
      if (!row.is_object()) throw ParseError(rw + ": expected an object");
      const Json no_parents = Json::object();
      const auto& pa = row.contains("parents") ? row.at("parents") : no_parents;
      if (!pa.is_object()) throw ParseError(rw + ".parents: expected an object");
      if (pa.size() != g.parents(v).size()) throw ParseError(rw + ".parents: must assign exactly the node's parents");
      for (int p : g.parents(v)) {
        const std::string& pn = g.name(p);
        if (!pa.contains(pn)) throw ParseError(rw + ".parents: missing parent '" + pn + "'");
        auto idx = model.nodes[p].domain.index_of(internal::ParseValue(pa.at(pn), rw + ".parents." + pn));
        if (!idx) throw ParseError(rw + ".parents." + pn + ": value outside the parent's domain");
        values[p] = *idx;
      }
      int e = 0;
      if (row.contains("eps")) {
        auto idx = exo.domain.index_of(internal::ParseValue(row.at("eps"), rw + ".eps"));
        if (!idx) throw ParseError(rw + ".eps: value outside the exogenous domain");
        e = *idx;
      } else if (exo.domain.size() != 1) {
        throw ParseError(rw + ": missing field 'eps'");
      }
      auto out_idx = model.nodes[v].domain.index_of(internal::ParseValue(internal::Field(row, "value", rw), rw + ".value"));
      if (!out_idx) throw ParseError(rw + ".value: value outside the node's domain");
      const std::size_t at = layout.row(values.data(), e);
      if (table.outputs[at] != -1) throw ParseError(rw + ": duplicate row");
      table.outputs[at] = *out_idx;
    }
    model.nodes[v].function = std::move(table);
  }
  out.model = Scim::make(std::move(model));
  return out;
}

inline Cid parse_cid(std::string_view text) { return parse_model(text).graph; }

inline Scim parse_scim(std::string_view text) {
  auto doc = parse_model(text);
  if (!doc.model) throw ParseError("kind: expected a \"scim\" document");
  return *doc.model;
}

namespace internal {

inline Json NodesJson(const Cid& g, const Scim* m) {
  Json nodes = Json::array();
  for (int v = 0; v < g.size(); ++v) {
    Json n;
    n["name"] = g.name(v);
    n["kind"] = std::string(to_string(g.kind(v)));
    n["parents"] = Json::array();
    for (int p : g.parents(v)) n["parents"].push_back(g.name(p));
    if (m) {
      n["domain"] = Json::array();
      for (const auto& value : m->domain(v).values) n["domain"].push_back(ValueJson(value));
    }
    nodes.push_back(std::move(n));
  }
  return nodes;
}

}  // namespace internal

// Canonical document text for a graph.
inline std::string serialize(const Cid& g) {
  internal::Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "cid";
  doc["nodes"] = internal::NodesJson(g, nullptr);
  return doc.dump(2) + "\n";
}

// Canonical document text for a model.
inline std::string serialize(const Scim& m) {
  using internal::Json;
  const Cid& g = m.graph();
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "scim";
  doc["nodes"] = internal::NodesJson(g, &m);
  Json exo = Json::object();
  Json functions = Json::object();
  for (int v = 0; v < g.size(); ++v) {
    const auto& e = m.exogenous(v);
    Json entry;
    entry["domain"] = Json::array();
    entry["dist"] = Json::object();
    for (int i = 0; i < e.domain.size(); ++i) {
      entry["domain"].push_back(internal::ValueJson(e.domain[i]));
      entry["dist"][e.domain[i].to_string()] = to_string(e.dist[i]);
    }
    exo[g.name(v)] = std::move(entry);
    if (!m.node(v).function) continue;
    Json rows = Json::array();
    const auto& layout = m.layout(v);
    for (std::size_t r = 0; r < layout.rows(); ++r) {
      auto [pv, ei] = layout.decode(r);
      Json row;
      row["parents"] = Json::object();
      for (std::size_t k = 0; k < pv.size(); ++k) {
        const int p = g.parents(v)[k];
        row["parents"][g.name(p)] = internal::ValueJson(m.domain(p)[pv[k]]);
      }
      row["eps"] = internal::ValueJson(e.domain[ei]);
      row["value"] = internal::ValueJson(m.domain(v)[m.node(v).function->outputs[r]]);
      rows.push_back(std::move(row));
    }
    functions[g.name(v)] = std::move(rows);
  }
  doc["exogenous"] = std::move(exo);
  doc["functions"] = std::move(functions);
  return doc.dump(2) + "\n";
}

// Graphviz styling of nodes and incentive markers.
struct DotStyle {
  std::string chance_shape = "box";
  std::string chance_style = "rounded";
  std::string decision_shape = "box";
  std::string utility_shape = "diamond";
  // Indexed by IncentiveKind.
  std::array<std::string, 4> marker_colors = {"#1f77b4", "#2ca02c", "#d62728", "#ff7f0e"};
  // Which incentive kinds to draw.
  std::vector<IncentiveKind> kinds = {IncentiveKind::kVoi, IncentiveKind::kRi, IncentiveKind::kVoc,
                                      IncentiveKind::kIci};
};

namespace internal {

inline std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace internal

// Deterministic DOT text for the graph annotated with the report. Each
// incentive on a node adds one outline in the marker's color. Throws Error
// when the report does not describe this graph.
inline std::string export_dot(const Cid& g, const IncentiveReport& report, const DotStyle& style = {}) {
  if (report.nodes.size() != static_cast<std::size_t>(g.size())) throw Error("report does not match the graph");
  for (int v = 0; v < g.size(); ++v) {
    if (report.nodes[v].name != g.name(v)) throw Error("report does not match the graph");
  }
  std::ostringstream out;
  out << "digraph cid {\n";
  out << "  rankdir=LR;\n";
  out << "  node [fontname=\"Helvetica\"];\n";
  std::set<IncentiveKind> used;
  for (int v = 0; v < g.size(); ++v) {
    std::vector<IncentiveKind> marks;
    for (auto k : style.kinds) {
      if (report.nodes[v].admits(k)) marks.push_back(k);
    }
    out << "  " << internal::Quote(g.name(v)) << " [";
    switch (g.kind(v)) {
      case NodeKind::kChance:
        out << "shape=" << style.chance_shape << ", style=" << style.chance_style;
        break;
      case NodeKind::kDecision:
        out << "shape=" << style.decision_shape;
        break;
      case NodeKind::kUtility:
        out << "shape=" << style.utility_shape;
        break;
    }
    if (!marks.empty()) {
      std::string colors;
      std::string labels;
      for (auto k : marks) {
        used.insert(k);
        colors += (colors.empty() ? "" : ":") + style.marker_colors[static_cast<int>(k)];
        labels += (labels.empty() ? "" : ", ") + std::string(label(k));
      }
      out << ", peripheries=" << marks.size() + 1 << ", color=" << internal::Quote(colors)
          << ", xlabel=" << internal::Quote(labels);
    }
    out << "];\n";
  }
  for (int v = 0; v < g.size(); ++v) {
    for (int p : g.parents(v)) {
      out << "  " << internal::Quote(g.name(p)) << " -> " << internal::Quote(g.name(v));
      if (g.kind(v) == NodeKind::kDecision) out << " [style=dashed]";
      out << ";\n";
    }
  }
  if (!used.empty()) {
    out << "  subgraph cluster_legend {\n";
    out << "    label=\"Legend\";\n";
    for (auto k : style.kinds) {
      if (!used.count(k)) continue;
      out << "    " << internal::Quote("legend_" + std::string(to_string(k))) << " [shape=" << style.chance_shape
          << ", style=" << style.chance_style << ", peripheries=2, color="
          << internal::Quote(style.marker_colors[static_cast<int>(k)]) << ", label=" << internal::Quote(std::string(label(k)))
          << "];\n";
    }
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

// Table of incentive flags followed by requisite observations and removed
// links.
inline std::string render_report(const IncentiveReport& report) {
  std::size_t width = 4;
  for (const auto& n : report.nodes) width = std::max(width, n.name.size());
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  auto emit = [](std::ostringstream& out, std::string line) {
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  };
  std::ostringstream out;
  std::string header = pad("node", width + 2) + pad("kind", 10);
  for (auto k : kAllIncentiveKinds) header += pad(std::string(label(k)), 5);
  emit(out, header);
  for (const auto& n : report.nodes) {
    std::string line = pad(n.name, width + 2) + pad(std::string(to_string(n.kind)), 10);
    for (auto k : kAllIncentiveKinds) line += pad(std::string(to_string(n.flag(k))), 5);
    emit(out, line);
  }
  out << "requisite observations:";
  if (report.requisite.empty()) out << " (none)";
  for (const auto& r : report.requisite) out << " " << r;
  out << "\nremoved links:";
  if (report.removed_links.empty()) out << " (none)";
  for (std::size_t i = 0; i < report.removed_links.size(); ++i) {
    out << (i ? ", " : " ") << report.removed_links[i].first << " -> " << report.removed_links[i].second;
  }
  out << "\n";
  return out.str();
}

// One line per edge "A -> B", grouped by child in canonical order.
inline std::string render_edges(const Cid& g) {
  std::ostringstream out;
  for (int v = 0; v < g.size(); ++v) {
    for (int p : g.parents(v)) out << g.name(p) << " -> " << g.name(v) << "\n";
  }
  return out.str();
}

inline std::string render_assignment(const Assignment& a) {
  std::string out;
  for (const auto& [k, v] : a) out += (out.empty() ? "" : " ") + k + "=" + v.to_string();
  return out.empty() ? "(empty)" : out;
}

// One line per policy row: "parents [eps] -> choice".
inline std::string render_policy(const Scim& m, const Policy& p) {
  const int d = m.decision();
  const auto& g = m.graph();
  const auto& layout = m.layout(d);
  std::ostringstream out;
  for (std::size_t r = 0; r < p.choices.size(); ++r) {
    auto [pv, e] = layout.decode(r);
    std::string row;
    for (std::size_t k = 0; k < pv.size(); ++k) {
      const int parent = g.parents(d)[k];
      row += (row.empty() ? "" : " ") + g.name(parent) + "=" + m.domain(parent)[pv[k]].to_string();
    }
    if (layout.exo_size() > 1) row += (row.empty() ? "" : " ") + std::string("eps=") + m.exogenous(d).domain[e].to_string();
    if (row.empty()) row = "(no inputs)";
    out << "  " << row << " -> " << m.domain(d)[p.choices[r]].to_string() << "\n";
  }
  return out.str();
}

// Rows of a function table for node v, formatted like policies.
inline std::string render_table(const Scim& m, int v, const FunctionTable& t) {
  const auto& g = m.graph();
  const auto& layout = m.layout(v);
  std::ostringstream out;
  for (std::size_t r = 0; r < t.outputs.size(); ++r) {
    auto [pv, e] = layout.decode(r);
    std::string row;
    for (std::size_t k = 0; k < pv.size(); ++k) {
      const int parent = g.parents(v)[k];
      row += (row.empty() ? "" : " ") + g.name(parent) + "=" + m.domain(parent)[pv[k]].to_string();
    }
    if (layout.exo_size() > 1) row += (row.empty() ? "" : " ") + std::string("eps=") + m.exogenous(v).domain[e].to_string();
    if (row.empty()) row = "(no inputs)";
    out << "  " << row << " -> " << m.domain(v)[t.outputs[r]].to_string() << "\n";
  }
  return out.str();
}

inline std::string render_verdict(const Scim& m, const SemanticVerdict& verdict) {
  std::ostringstream out;
  out << "verdict: " << (verdict.holds ? "holds" : "does not hold") << "\n";
  if (!verdict.evidence) return out.str();
  const Evidence& ev = *verdict.evidence;
  if (!ev.note.empty()) out << "note: " << ev.note << "\n";
  for (const auto& [name, q] : ev.quantities) out << name << ": " << to_string(q) << "\n";
  if (ev.context) out << "context: " << render_assignment(*ev.context) << "\n";
  if (ev.eps) out << "eps: " << render_assignment(*ev.eps) << "\n";
  if (!ev.intervention.hard.empty()) out << "intervention: do(" << render_assignment(ev.intervention.hard) << ")\n";
  for (const auto& [name, table] : ev.intervention.soft) {
    out << "control table for " << name << ":\n" << render_table(m, m.graph().index(name), table);
  }
  if (ev.policy && ev.policy->choices.size() == m.decision_rows()) out << "policy:\n" << render_policy(m, *ev.policy);
  return out.str();
}

}  // namespace cidinc

#endif  // CIDINC_IO_HPP_
