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

// Structural causal influence models over finite domains: evaluation under
// policies and interventions, potential responses, exact probabilities,
// expected utility and optimal-policy search.

#ifndef CIDINC_SCIM_HPP_
#define CIDINC_SCIM_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cidinc/graph.hpp"
#include "cidinc/value.hpp"

namespace cidinc {

// Raised when an exhaustive enumeration would exceed the configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

struct EnumerationOptions {
  // Upper bound on policies, exogenous settings or intervention tables
  // enumerated by a single operation.
  std::uint64_t max_enumeration = 10'000'000;
  // Worker threads used when summing over exogenous settings.
  unsigned threads = 1;
};

// Distribution of one exogenous variable. Defaults to a point mass on 0.
struct ExogenousSpec {
  FiniteDomain domain = FiniteDomain{{Value(0)}};
  std::vector<Rational> dist = {Rational(1)};

  friend bool operator==(const ExogenousSpec& a, const ExogenousSpec& b) {
    return a.domain == b.domain && a.dist == b.dist;
  }
};

// A total lookup table mapping (parent values, exogenous value) rows to
// indices into the node's domain. Rows enumerate the parents in declared
// order, most significant first, with the exogenous value least
// significant. -1 marks a missing row.
struct FunctionTable {
  std::vector<int> outputs;

  friend bool operator==(const FunctionTable&, const FunctionTable&) = default;
};

struct NodeModel {
  FiniteDomain domain;
  ExogenousSpec exogenous;
  // Absent exactly for the decision node.
  std::optional<FunctionTable> function;
};

// An unchecked model description. Scim::make validates it.
struct ScimSpec {
  Cid graph;
  // Indexed by canonical node index of graph.
  std::vector<NodeModel> nodes;
};

// Row arithmetic for the table of one node.
class RowLayout {
 public:
  RowLayout() = default;
  RowLayout(const std::vector<int>& parents, const std::vector<int>& parent_sizes, int exo_size)
      : parents_(parents), sizes_(parent_sizes), exo_size_(exo_size) {
    strides_.assign(parents.size(), 0);
    std::uint64_t stride = static_cast<std::uint64_t>(exo_size);
    for (std::size_t k = parents.size(); k-- > 0;) {
      strides_[k] = stride;
      stride = Saturate(stride, static_cast<std::uint64_t>(parent_sizes[k]));
    }
    rows_ = stride;
  }

  std::uint64_t rows() const { return rows_; }
  int exo_size() const { return exo_size_; }
  const std::vector<int>& parents() const { return parents_; }

  // Row for the given endogenous value indices and exogenous index.
  std::size_t row(const int* values, int eps) const {
    std::size_t r = static_cast<std::size_t>(eps);
    for (std::size_t k = 0; k < parents_.size(); ++k) r += strides_[k] * values[parents_[k]];
    return r;
  }

  // Parent value indices and exogenous index of a row.
  std::pair<std::vector<int>, int> decode(std::size_t row) const {
    std::vector<int> out(parents_.size());
    const int eps = static_cast<int>(row % exo_size_);
    for (std::size_t k = 0; k < parents_.size(); ++k) {
      out[k] = static_cast<int>((row / strides_[k]) % sizes_[k]);
    }
    return {out, eps};
  }

 private:
  static std::uint64_t Saturate(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t limit = std::uint64_t{1} << 62;
    if (b != 0 && a > limit / b) return limit;
    return a * b;
  }

  std::vector<int> parents_;
  std::vector<int> sizes_;
  std::vector<std::uint64_t> strides_;
  int exo_size_ = 1;
  std::uint64_t rows_ = 1;
};

namespace internal {

constexpr std::uint64_t kMaxTableRows = 50'000'000;

inline RowLayout LayoutFor(const ScimSpec& spec, int v) {
  std::vector<int> sizes;
  for (int p : spec.graph.parents(v)) sizes.push_back(spec.nodes[p].domain.size());
  return RowLayout(spec.graph.parents(v), sizes, std::max(1, spec.nodes[v].exogenous.domain.size()));
}

inline bool HasDuplicates(const FiniteDomain& d) {
  for (int i = 0; i < d.size(); ++i) {
    for (int j = i + 1; j < d.size(); ++j) {
      if (d[i] == d[j]) return true;
    }
  }
  return false;
}

}  // namespace internal

// Checks every model invariant and returns the violations found.
inline std::vector<std::string> validate_scim(const ScimSpec& spec) {
  std::vector<std::string> out;
  const Cid& g = spec.graph;
  if (static_cast<int>(spec.nodes.size()) != g.size()) {
    out.push_back("model describes " + std::to_string(spec.nodes.size()) + " nodes but the graph has " +
                  std::to_string(g.size()));
    return out;
  }
  bool shapes_ok = true;
  for (int v = 0; v < g.size(); ++v) {
    const auto& node = spec.nodes[v];
    const std::string& name = g.name(v);
    if (node.domain.size() == 0) {
      out.push_back("empty domain for '" + name + "'");
      shapes_ok = false;
    }
    if (internal::HasDuplicates(node.domain)) out.push_back("duplicate domain value for '" + name + "'");
    if (g.kind(v) == NodeKind::kUtility) {
      for (const auto& value : node.domain.values) {
        if (!value.is_rational()) {
          out.push_back("non-numeric utility value '" + value.to_string() + "' for '" + name + "'");
        }
      }
    }
    const auto& exo = node.exogenous;
    if (exo.domain.size() == 0) {
      out.push_back("empty exogenous domain for '" + name + "'");
      shapes_ok = false;
    }
    if (internal::HasDuplicates(exo.domain)) out.push_back("duplicate exogenous value for '" + name + "'");
    if (static_cast<int>(exo.dist.size()) != exo.domain.size()) {
      out.push_back("exogenous distribution of '" + name + "' does not cover its domain");
    } else {
      Rational total = 0;
      for (const auto& p : exo.dist) {
        if (p < 0) out.push_back("negative probability for '" + name + "'");
        total += p;
      }
      if (total != 1) out.push_back("distribution not normalized for '" + name + "' (sums to " + to_string(total) + ")");
    }
  }
  if (!shapes_ok) return out;
  for (int v = 0; v < g.size(); ++v) {
    const auto& node = spec.nodes[v];
    const std::string& name = g.name(v);
    if (g.kind(v) == NodeKind::kDecision) {
      if (node.function) out.push_back("decision node '" + name + "' has a function table");
      continue;
    }
    if (!node.function) {
      out.push_back("missing function for '" + name + "'");
      continue;
    }
    const RowLayout layout = internal::LayoutFor(spec, v);
    if (layout.rows() > internal::kMaxTableRows) {
      out.push_back("function table of '" + name + "' is too large");
      continue;
    }
    const auto& outputs = node.function->outputs;
    if (outputs.size() != layout.rows() ||
        std::find(outputs.begin(), outputs.end(), -1) != outputs.end()) {
      out.push_back("non-total function for '" + name + "'");
      continue;
    }
    for (int o : outputs) {
      if (o < 0 || o >= node.domain.size()) {
        out.push_back("function output outside domain for '" + name + "'");
        break;
      }
    }
  }
  return out;
}

using Assignment = std::map<std::string, Value>;

// A decision rule: for each decision row (parent values and exogenous value
// of the decision) an index into the decision's domain.
struct Policy {
  std::vector<int> choices;

  friend bool operator==(const Policy&, const Policy&) = default;
  friend bool operator<(const Policy& a, const Policy& b) { return a.choices < b.choices; }
};

// Hard interventions fix a node's value; soft interventions replace its
// function table.
struct InterventionSet {
  std::map<std::string, Value> hard;
  std::map<std::string, FunctionTable> soft;
};

// A validated model.
class Scim {
 public:
  Scim() = default;

  // Validates and builds the model. Throws ValidationError.
  static Scim make(ScimSpec spec) {
    auto violations = validate_scim(spec);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    Scim m;
    m.spec_ = std::move(spec);
    const Cid& g = m.spec_.graph;
    for (int v = 0; v < g.size(); ++v) {
      m.layouts_.push_back(internal::LayoutFor(m.spec_, v));
      std::vector<Rational> utilities;
      if (g.kind(v) == NodeKind::kUtility) {
        for (const auto& value : m.spec_.nodes[v].domain.values) utilities.push_back(value.rational());
        m.utilities_.push_back(v);
      }
      m.utility_values_.push_back(std::move(utilities));
      if (g.kind(v) == NodeKind::kDecision) m.decisions_.push_back(v);
    }
    return m;
  }

  const Cid& graph() const { return spec_.graph; }
  const ScimSpec& spec() const { return spec_; }
  int size() const { return graph().size(); }
  const NodeModel& node(int v) const { return spec_.nodes[v]; }
  const FiniteDomain& domain(int v) const { return spec_.nodes[v].domain; }
  const ExogenousSpec& exogenous(int v) const { return spec_.nodes[v].exogenous; }
  const RowLayout& layout(int v) const { return layouts_[v]; }
  const std::vector<int>& utilities() const { return utilities_; }
  const Rational& utility_value(int v, int index) const { return utility_values_[v][index]; }

  // The unique decision node. Throws Error otherwise.
  int decision() const {
    if (decisions_.size() != 1) {
      throw Error("expected exactly one decision node, found " + std::to_string(decisions_.size()));
    }
    return decisions_.front();
  }

  // Number of rows of a policy table.
  std::size_t decision_rows() const { return static_cast<std::size_t>(layouts_[decision()].rows()); }

  // Sum of utility node values for an index assignment.
  Rational utility_sum(const std::vector<int>& values) const {
    Rational total = 0;
    for (int u : utilities_) total += utility_values_[u][values[u]];
    return total;
  }

  // The same model over a graph that differs only in the decision's
  // parents. Nodes are matched by name.
  Scim with_graph(const Cid& g) const {
    ScimSpec s;
    s.graph = g;
    for (int v = 0; v < g.size(); ++v) {
      auto old = graph().find(g.name(v));
      if (!old) throw Error("node '" + g.name(v) + "' is not part of the model");
      s.nodes.push_back(spec_.nodes[*old]);
    }
    return make(std::move(s));
  }

  // The same model with one node's function table replaced.
  Scim with_function(int v, FunctionTable table) const {
    ScimSpec s = spec_;
    s.nodes[v].function = std::move(table);
    return make(std::move(s));
  }

 private:
  ScimSpec spec_;
  std::vector<RowLayout> layouts_;
  std::vector<std::vector<Rational>> utility_values_;
  std::vector<int> utilities_;
  std::vector<int> decisions_;
};

// An intervention set resolved against a model.
struct CompiledIntervention {
  // Per node: fixed value index or -1.
  std::vector<int> hard;
  // Per node: replacement table, if any.
  std::vector<std::optional<FunctionTable>> soft;

  static CompiledIntervention none(const Scim& m) {
    return {std::vector<int>(m.size(), -1), std::vector<std::optional<FunctionTable>>(m.size())};
  }
};

// Resolves names and values. Throws Error on an invalid intervention.
inline CompiledIntervention compile(const Scim& m, const InterventionSet& iv) {
  auto out = CompiledIntervention::none(m);
  for (const auto& [name, value] : iv.hard) {
    auto v = m.graph().find(name);
    if (!v) throw Error("intervention on unknown node '" + name + "'");
    auto idx = m.domain(*v).index_of(value);
    if (!idx) throw Error("intervention value '" + value.to_string() + "' outside the domain of '" + name + "'");
    out.hard[*v] = *idx;
  }
  for (const auto& [name, table] : iv.soft) {
    auto v = m.graph().find(name);
    if (!v) throw Error("intervention on unknown node '" + name + "'");
    if (out.hard[*v] >= 0) throw Error("node '" + name + "' has both a hard and a soft intervention");
    if (m.graph().kind(*v) == NodeKind::kDecision) {
      throw Error("the decision may only be intervened on with a fixed value");
    }
    if (table.outputs.size() != m.layout(*v).rows()) throw Error("soft intervention on '" + name + "' is not total");
    for (int o : table.outputs) {
      if (o < 0 || o >= m.domain(*v).size()) throw Error("soft intervention on '" + name + "' leaves the domain");
    }
    out.soft[*v] = table;
  }
  return out;
}

// Computes every endogenous value index in canonical order, starting at
// node `from` (earlier entries of out must already hold values).
inline void evaluate_into(const Scim& m, const Policy& policy, const int* eps, const CompiledIntervention& iv,
                          std::vector<int>& out, int from = 0) {
  const Cid& g = m.graph();
  out.resize(m.size());
  for (int v = from; v < g.size(); ++v) {
    if (iv.hard[v] >= 0) {
      out[v] = iv.hard[v];
      continue;
    }
    const std::size_t row = m.layout(v).row(out.data(), eps[v]);
    if (iv.soft[v]) {
      out[v] = iv.soft[v]->outputs[row];
    } else if (g.kind(v) == NodeKind::kDecision) {
      out[v] = policy.choices.at(row);
    } else {
      out[v] = m.node(v).function->outputs[row];
    }
  }
}

// Exogenous value indices for a named assignment covering every node.
inline std::vector<int> exo_indices(const Scim& m, const Assignment& eps) {
  std::vector<int> out(m.size());
  for (int v = 0; v < m.size(); ++v) {
    auto it = eps.find(m.graph().name(v));
    if (it == eps.end()) throw Error("exogenous setting misses '" + m.graph().name(v) + "'");
    auto idx = m.exogenous(v).domain.index_of(it->second);
    if (!idx) throw Error("exogenous value outside the domain of '" + m.graph().name(v) + "'");
    out[v] = *idx;
  }
  for (const auto& [name, value] : eps) m.graph().index(name);
  return out;
}

inline Assignment named_values(const Scim& m, const std::vector<int>& values) {
  Assignment out;
  for (int v = 0; v < m.size(); ++v) out.emplace(m.graph().name(v), m.domain(v)[values[v]]);
  return out;
}

inline void check_policy(const Scim& m, const Policy& policy) {
  const int d = m.decision();
  if (policy.choices.size() != m.decision_rows()) throw Error("policy is not total");
  for (int c : policy.choices) {
    if (c < 0 || c >= m.domain(d).size()) throw Error("policy output outside the decision domain");
  }
}

inline Assignment evaluate(const Scim& m, const Policy& policy, const Assignment& eps,
                           const InterventionSet& iv = {}) {
  const auto e = exo_indices(m, eps);
  const auto civ = compile(m, iv);
  if (civ.hard[m.decision()] < 0) check_policy(m, policy);
  std::vector<int> out;
  evaluate_into(m, policy, e.data(), civ, out);
  return named_values(m, out);
}

// Values of the targets at eps in the submodel given by iv.
inline Assignment potential_response(const Scim& m, const Policy& policy, const Assignment& eps,
                                     const std::vector<std::string>& targets, const InterventionSet& iv = {}) {
  const auto all = evaluate(m, policy, eps, iv);
  Assignment out;
  for (const auto& t : targets) {
    m.graph().index(t);
    out.emplace(t, all.at(t));
  }
  return out;
}

// Utility sum at eps under do(x = x*), where x* is the value x takes at eps
// under do(D = d). d is a value index into the decision domain.
inline Rational nested_potential_response(const Scim& m, const Policy& policy, const int* eps, int x, int d) {
  const int dec = m.decision();
  auto iv = CompiledIntervention::none(m);
  iv.hard[dec] = d;
  std::vector<int> values;
  evaluate_into(m, policy, eps, iv, values);
  auto second = CompiledIntervention::none(m);
  second.hard[x] = values[x];
  evaluate_into(m, policy, eps, second, values);
  return m.utility_sum(values);
}

inline Rational nested_potential_response(const Scim& m, const Policy& policy, const Assignment& eps,
                                          const std::string& x, const Value& d) {
  const int dec = m.decision();
  auto di = m.domain(dec).index_of(d);
  if (!di) throw Error("value '" + d.to_string() + "' outside the decision domain");
  check_policy(m, policy);
  const auto e = exo_indices(m, eps);
  return nested_potential_response(m, policy, e.data(), m.graph().index(x), *di);
}

inline Rational exo_probability(const Scim& m, const int* eps) {
  Rational p = 1;
  for (int v = 0; v < m.size(); ++v) p *= m.exogenous(v).dist[eps[v]];
  return p;
}

inline Rational exo_probability(const Scim& m, const Assignment& eps) {
  const auto e = exo_indices(m, eps);
  return exo_probability(m, e.data());
}

// The exogenous settings of a model with their probabilities.
struct ExoSupport {
  int width = 0;
  std::vector<int> settings;
  std::vector<Rational> probs;

  std::size_t size() const { return probs.size(); }
  const int* setting(std::size_t i) const { return settings.data() + i * width; }
};

// Enumerates every exogenous setting in canonical order (first node most
// significant), optionally keeping only positive-probability settings.
inline ExoSupport exo_support(const Scim& m, bool positive_only, const EnumerationOptions& opts = {}) {
  ExoSupport out;
  out.width = m.size();
  std::uint64_t total = 1;
  for (int v = 0; v < m.size(); ++v) {
    const std::uint64_t k = static_cast<std::uint64_t>(m.exogenous(v).domain.size());
    if (total > opts.max_enumeration / k) throw CapExceeded("exogenous space exceeds the enumeration cap");
    total *= k;
  }
  std::vector<int> e(m.size(), 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    Rational p = exo_probability(m, e.data());
    if (!positive_only || p > 0) {
      out.settings.insert(out.settings.end(), e.begin(), e.end());
      out.probs.push_back(std::move(p));
    }
    for (int v = m.size() - 1; v >= 0; --v) {
      if (++e[v] < m.exogenous(v).domain.size()) break;
      e[v] = 0;
    }
  }
  return out;
}

// Every exogenous setting as a named assignment, in canonical order.
inline std::vector<Assignment> exo_settings(const Scim& m, const EnumerationOptions& opts = {}) {
  const auto support = exo_support(m, false, opts);
  std::vector<Assignment> out;
  for (std::size_t i = 0; i < support.size(); ++i) {
    Assignment a;
    for (int v = 0; v < m.size(); ++v) a.emplace(m.graph().name(v), m.exogenous(v).domain[support.setting(i)[v]]);
    out.push_back(std::move(a));
  }
  return out;
}

namespace internal {

struct ResolvedEvent {
  std::vector<std::pair<int, int>> terms;

  bool matches(const std::vector<int>& values) const {
    for (const auto& [v, idx] : terms) {
      if (values[v] != idx) return false;
    }
    return true;
  }
};

inline ResolvedEvent Resolve(const Scim& m, const Assignment& event) {
  ResolvedEvent out;
  for (const auto& [name, value] : event) {
    const int v = m.graph().index(name);
    auto idx = m.domain(v).index_of(value);
    if (!idx) throw Error("value '" + value.to_string() + "' outside the domain of '" + name + "'");
    out.terms.emplace_back(v, *idx);
  }
  return out;
}

// Runs body(begin, end, worker) over [0, n) split across workers, then
// returns so that results can be merged in worker order.
inline void ParallelChunks(std::size_t n, unsigned threads,
                           const std::function<void(std::size_t, std::size_t, unsigned)>& body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    body(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&body, begin, end, w] { body(begin, end, w); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace internal

// Probability of the event (a partial assignment) under policy and iv.
inline Rational prob(const Scim& m, const Policy& policy, const Assignment& event, const InterventionSet& iv = {},
                     const EnumerationOptions& opts = {}) {
  const auto civ = compile(m, iv);
  if (civ.hard[m.decision()] < 0) check_policy(m, policy);
  const auto ev = internal::Resolve(m, event);
  const auto support = exo_support(m, true, opts);
  Rational total = 0;
  std::vector<int> values;
  for (std::size_t i = 0; i < support.size(); ++i) {
    evaluate_into(m, policy, support.setting(i), civ, values);
    if (ev.matches(values)) total += support.probs[i];
  }
  return total;
}

// Expected utility sum under policy and iv, optionally conditioned on an
// event. Throws Error when conditioning on a zero-probability event.
inline Rational expected_utility(const Scim& m, const Policy& policy, const InterventionSet& iv = {},
                                 const std::optional<Assignment>& given = std::nullopt,
                                 const EnumerationOptions& opts = {}) {
  const auto civ = compile(m, iv);
  if (civ.hard[m.decision()] < 0) check_policy(m, policy);
  const auto ev = internal::Resolve(m, given.value_or(Assignment{}));
  const auto support = exo_support(m, true, opts);
  Rational num = 0;
  Rational den = 0;
  std::vector<int> values;
  for (std::size_t i = 0; i < support.size(); ++i) {
    evaluate_into(m, policy, support.setting(i), civ, values);
    if (!ev.matches(values)) continue;
    num += support.probs[i] * m.utility_sum(values);
    den += support.probs[i];
  }
  if (den == 0) {
    if (given) throw Error("conditioning on a zero-probability event");
    return 0;
  }
  return num / den;
}

// Number of policies, or nullopt when it exceeds the cap.
inline std::optional<std::uint64_t> policy_count(const Scim& m, const EnumerationOptions& opts = {}) {
  const std::uint64_t k = static_cast<std::uint64_t>(m.domain(m.decision()).size());
  std::uint64_t total = 1;
  for (std::size_t r = 0; r < m.decision_rows(); ++r) {
    if (total > opts.max_enumeration / k) return std::nullopt;
    total *= k;
  }
  return total;
}

// Calls visit on every policy in lexicographic order of its choice vector.
// Stops when visit returns false. Throws CapExceeded.
inline void for_each_policy(const Scim& m, const std::function<bool(const Policy&)>& visit,
                            const EnumerationOptions& opts = {}) {
  if (!policy_count(m, opts)) throw CapExceeded("policy space exceeds the enumeration cap");
  const int k = m.domain(m.decision()).size();
  Policy p{std::vector<int>(m.decision_rows(), 0)};
  while (true) {
    if (!visit(p)) return;
    std::size_t r = p.choices.size();
    while (r > 0) {
      --r;
      if (++p.choices[r] < k) break;
      p.choices[r] = 0;
      if (r == 0) return;
    }
    if (p.choices.empty()) return;
  }
}

inline std::vector<Policy> enumerate_policies(const Scim& m, const EnumerationOptions& opts = {}) {
  std::vector<Policy> out;
  for_each_policy(m, [&](const Policy& p) {
    out.push_back(p);
    return true;
  }, opts);
  return out;
}

// Per decision row: the probability of the row and, for each decision
// value d, the mass-weighted utility sum obtained by playing d there.
struct DecisionValues {
  std::vector<Rational> mass;
  std::vector<std::vector<Rational>> value;
};

// Computes DecisionValues under the extra intervention iv (which must leave
// the decision alone). Decision parents never depend on the decision, so
// each row's quantities are policy independent.
inline DecisionValues decision_values(const Scim& m, const ExoSupport& support, const CompiledIntervention& iv,
                                      const EnumerationOptions& opts = {}) {
  const int dec = m.decision();
  if (iv.hard[dec] >= 0) throw Error("the decision is already intervened on");
  const int k = m.domain(dec).size();
  const std::size_t rows = m.decision_rows();
  const unsigned workers = std::max(1u, opts.threads);
  std::vector<DecisionValues> partial(workers);
  internal::ParallelChunks(support.size(), workers, [&](std::size_t begin, std::size_t end, unsigned w) {
    auto& dv = partial[w];
    dv.mass.assign(rows, 0);
    dv.value.assign(rows, std::vector<Rational>(k, 0));
    std::vector<int> values(m.size());
    const Policy none;
    auto forced = iv;
    for (std::size_t i = begin; i < end; ++i) {
      const int* eps = support.setting(i);
      const Rational& p = support.probs[i];
      forced.hard[dec] = 0;
      evaluate_into(m, none, eps, forced, values);
      const std::size_t row = m.layout(dec).row(values.data(), eps[dec]);
      dv.mass[row] += p;
      for (int d = 0; d < k; ++d) {
        if (d > 0) {
          forced.hard[dec] = d;
          evaluate_into(m, none, eps, forced, values, dec);
        }
        if (p != 0) dv.value[row][d] += p * m.utility_sum(values);
      }
    }
  });
  DecisionValues out;
  out.mass.assign(rows, 0);
  out.value.assign(rows, std::vector<Rational>(k, 0));
  for (const auto& dv : partial) {
    if (dv.mass.empty()) continue;
    for (std::size_t r = 0; r < rows; ++r) {
      out.mass[r] += dv.mass[r];
      for (int d = 0; d < k; ++d) out.value[r][d] += dv.value[r][d];
    }
  }
  return out;
}

// The exact argmax set of policies in factored form: a policy is optimal
// iff each row's choice lies in that row's optimal set.
struct Solution {
  Rational attainable;
  std::vector<Rational> row_mass;
  std::vector<std::vector<int>> optimal_choices;

  // Number of optimal policies, saturating at cap + 1.
  std::uint64_t count(std::uint64_t cap) const {
    std::uint64_t total = 1;
    for (const auto& c : optimal_choices) {
      if (total > (cap + 1) / c.size()) return cap + 1;
      total *= c.size();
    }
    return std::min<std::uint64_t>(total, cap + 1);
  }

  bool is_optimal(const Policy& p) const {
    for (std::size_t r = 0; r < optimal_choices.size(); ++r) {
      const auto& c = optimal_choices[r];
      if (!std::binary_search(c.begin(), c.end(), p.choices[r])) return false;
    }
    return true;
  }

  // The lexicographically least optimal policy.
  Policy first() const {
    Policy p;
    for (const auto& c : optimal_choices) p.choices.push_back(c.front());
    return p;
  }
};

inline Solution solve_values(const DecisionValues& dv) {
  Solution s;
  s.attainable = 0;
  s.row_mass = dv.mass;
  for (const auto& row : dv.value) {
    const Rational best = *std::max_element(row.begin(), row.end());
    std::vector<int> arg;
    for (int d = 0; d < static_cast<int>(row.size()); ++d) {
      if (row[d] == best) arg.push_back(d);
    }
    s.attainable += best;
    s.optimal_choices.push_back(std::move(arg));
  }
  return s;
}

// Attainable utility and the factored optimal set, optionally in the
// submodel given by iv.
inline Solution solve(const Scim& m, const InterventionSet& iv = {}, const EnumerationOptions& opts = {}) {
  const auto support = exo_support(m, true, opts);
  return solve_values(decision_values(m, support, compile(m, iv), opts));
}

// Maximum expected utility over all policies.
inline Rational attainable_utility(const Scim& m, const EnumerationOptions& opts = {}) {
  return solve(m, {}, opts).attainable;
}

struct OptimalPolicies {
  Rational attainable;
  std::vector<Policy> policies;
};

// Calls visit on every optimal policy in lexicographic order.
inline void for_each_optimal_policy(const Solution& s, const std::function<bool(const Policy&)>& visit,
                                    const EnumerationOptions& opts = {}) {
  if (s.count(opts.max_enumeration) > opts.max_enumeration) {
    throw CapExceeded("optimal policy set exceeds the enumeration cap");
  }
  const std::size_t rows = s.optimal_choices.size();
  std::vector<std::size_t> pos(rows, 0);
  Policy p = s.first();
  while (true) {
    if (!visit(p)) return;
    std::size_t r = rows;
    while (r > 0) {
      --r;
      if (++pos[r] < s.optimal_choices[r].size()) {
        p.choices[r] = s.optimal_choices[r][pos[r]];
        break;
      }
      pos[r] = 0;
      p.choices[r] = s.optimal_choices[r][0];
      if (r == 0) return;
    }
    if (rows == 0) return;
  }
}

// The exact argmax set (ties preserved) and the attainable utility.
inline OptimalPolicies optimal_policies(const Scim& m, const EnumerationOptions& opts = {}) {
  if (!policy_count(m, opts)) throw CapExceeded("policy space exceeds the enumeration cap");
  const Solution s = solve(m, {}, opts);
  OptimalPolicies out{s.attainable, {}};
  for_each_optimal_policy(s, [&](const Policy& p) {
    out.policies.push_back(p);
    return true;
  }, opts);
  return out;
}

// An optimal policy whose choice is constant across every nonrequisite
// parent for each fixed value of the requisite parents and the decision's
// exogenous variable, or nullopt when none exists.
inline std::optional<Policy> gamma_respecting_optimal_policy(const Scim& m, const EnumerationOptions& opts = {}) {
  const Solution s = solve(m, {}, opts);
  const int dec = m.decision();
  const NodeSet requisite = requisite_observations(m.graph());
  const auto& parents = m.graph().parents(dec);
  std::map<std::vector<int>, std::vector<int>> common;
  std::vector<std::vector<int>> keys(s.optimal_choices.size());
  for (std::size_t r = 0; r < s.optimal_choices.size(); ++r) {
    auto [pv, eps] = m.layout(dec).decode(r);
    std::vector<int> key;
    for (std::size_t k = 0; k < parents.size(); ++k) key.push_back(requisite.contains(parents[k]) ? pv[k] : -1);
    key.push_back(eps);
    keys[r] = key;
    auto it = common.find(key);
    if (it == common.end()) {
      common.emplace(key, s.optimal_choices[r]);
    } else {
      std::vector<int> both;
      std::set_intersection(it->second.begin(), it->second.end(), s.optimal_choices[r].begin(),
                            s.optimal_choices[r].end(), std::back_inserter(both));
      it->second = std::move(both);
    }
  }
  Policy p;
  for (std::size_t r = 0; r < keys.size(); ++r) {
    const auto& c = common.at(keys[r]);
    if (c.empty()) return std::nullopt;
    p.choices.push_back(c.front());
  }
  return p;
}

}  // namespace cidinc

#endif  // CIDINC_SCIM_HPP_
