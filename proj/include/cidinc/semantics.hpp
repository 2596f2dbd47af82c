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

// Incentive checks evaluated directly on a model by exact enumeration:
// materiality, value of information and control, response incentives,
// instrumental control incentives and counterfactual fairness.

#ifndef CIDINC_SEMANTICS_HPP_
#define CIDINC_SEMANTICS_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cidinc/graph.hpp"
#include "cidinc/scim.hpp"
#include "cidinc/value.hpp"

namespace cidinc {

// Supporting data for a verdict. Quantities are exact.
struct Evidence {
  std::optional<Policy> policy;
  std::optional<Assignment> eps;
  std::optional<Assignment> context;
  InterventionSet intervention;
  std::vector<std::pair<std::string, Rational>> quantities;
  std::string note;
};

struct SemanticVerdict {
  bool holds = false;
  std::optional<Evidence> evidence;
};

namespace internal {

inline int NonDecision(const Scim& m, const std::string& x, const char* what) {
  const int v = m.graph().index(x);
  if (v == m.decision()) throw Error(std::string(what) + " is undefined for the decision itself");
  return v;
}

inline Assignment NamedExo(const Scim& m, const int* eps) {
  Assignment out;
  for (int v = 0; v < m.size(); ++v) out.emplace(m.graph().name(v), m.exogenous(v).domain[eps[v]]);
  return out;
}

// Named parent assignment of a decision context index.
inline Assignment NamedContext(const Scim& m, std::size_t context) {
  const int dec = m.decision();
  auto [pv, eps] = m.layout(dec).decode(context * m.layout(dec).exo_size());
  Assignment out;
  const auto& parents = m.graph().parents(dec);
  for (std::size_t k = 0; k < parents.size(); ++k) {
    out.emplace(m.graph().name(parents[k]), m.domain(parents[k])[pv[k]]);
  }
  return out;
}

// Context index (decision row with the exogenous part dropped) of a named
// assignment over exactly the decision's parents.
inline std::size_t ContextIndex(const Scim& m, const Assignment& context) {
  const int dec = m.decision();
  const auto& parents = m.graph().parents(dec);
  if (context.size() != parents.size()) throw Error("context must assign exactly the decision's parents");
  std::vector<int> values(m.size(), 0);
  for (int p : parents) {
    auto it = context.find(m.graph().name(p));
    if (it == context.end()) throw Error("context misses '" + m.graph().name(p) + "'");
    auto idx = m.domain(p).index_of(it->second);
    if (!idx) throw Error("context value outside the domain of '" + m.graph().name(p) + "'");
    values[p] = *idx;
  }
  return m.layout(dec).row(values.data(), 0) / m.layout(dec).exo_size();
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace internal

// Whether severing the link x -> D strictly lowers attainable utility.
inline SemanticVerdict is_material(const Scim& m, const std::string& x, const EnumerationOptions& opts = {}) {
  const int dec = m.decision();
  const int xv = m.graph().index(x);
  if (!m.graph().has_edge(xv, dec)) throw Error("'" + x + "' is not a parent of the decision");
  const Scim without = m.with_graph(m.graph().with_edge_removed(xv, dec));
  const Rational with_link = attainable_utility(m, opts);
  const Rational without_link = attainable_utility(without, opts);
  Evidence ev;
  ev.quantities = {{"attainable_with_link", with_link},
                   {"attainable_without_link", without_link},
                   {"gap", with_link - without_link}};
  return {without_link < with_link, ev};
}

// Materiality of x in the model with the link x -> D added.
inline SemanticVerdict has_voi(const Scim& m, const std::string& x, const EnumerationOptions& opts = {}) {
  const int dec = m.decision();
  const int xv = m.graph().index(x);
  if (!applicable(m.graph(), IncentiveKind::kVoi, xv)) {
    throw Error("value of information is undefined for utility nodes and descendants of the decision");
  }
  return is_material(m.with_graph(m.graph().with_edge_added(xv, dec)), x, opts);
}

// Whether choosing x's function freely can raise attainable utility. Only
// table rows reachable with positive probability under some decision value
// are enumerated; the rest cannot affect any expectation.
inline SemanticVerdict has_voc(const Scim& m, const std::string& x, const EnumerationOptions& opts = {}) {
  const int xv = internal::NonDecision(m, x, "value of control");
  const int dec = m.decision();
  const auto support = exo_support(m, true, opts);
  const auto none = CompiledIntervention::none(m);
  const Rational base = solve_values(decision_values(m, support, none, opts)).attainable;

  std::vector<char> reachable(m.layout(xv).rows(), 0);
  auto forced = none;
  std::vector<int> values;
  for (std::size_t i = 0; i < support.size(); ++i) {
    for (int d = 0; d < m.domain(dec).size(); ++d) {
      forced.hard[dec] = d;
      evaluate_into(m, Policy{}, support.setting(i), forced, values);
      reachable[m.layout(xv).row(values.data(), support.setting(i)[xv])] = 1;
    }
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < reachable.size(); ++r) {
    if (reachable[r]) rows.push_back(r);
  }
  const int k = m.domain(xv).size();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (total > opts.max_enumeration / k) throw CapExceeded("control tables exceed the enumeration cap");
    total *= k;
  }

  auto iv = none;
  FunctionTable g{std::vector<int>(m.layout(xv).rows(), 0)};
  std::vector<int> digits(rows.size(), 0);
  Evidence ev;
  ev.quantities = {{"attainable", base}};
  for (std::uint64_t n = 0; n < total; ++n) {
    for (std::size_t i = 0; i < rows.size(); ++i) g.outputs[rows[i]] = digits[i];
    iv.soft[xv] = g;
    const Rational value = solve_values(decision_values(m, support, iv, opts)).attainable;
    if (value > base) {
      ev.intervention.soft.emplace(x, g);
      ev.quantities.emplace_back("attainable_with_control", value);
      ev.quantities.emplace_back("gain", value - base);
      return {true, ev};
    }
    for (std::size_t i = rows.size(); i-- > 0;) {
      if (++digits[i] < k) break;
      digits[i] = 0;
    }
  }
  ev.note = "no control table improves on the attainable utility";
  return {false, ev};
}

// Whether some hard intervention on x changes the decision at some
// exogenous setting. All settings are considered unless support_only.
inline SemanticVerdict responds(const Scim& m, const Policy& policy, const std::string& x, bool support_only = false,
                                const EnumerationOptions& opts = {}) {
  const int xv = internal::NonDecision(m, x, "response");
  const int dec = m.decision();
  check_policy(m, policy);
  const auto support = exo_support(m, support_only, opts);
  const auto none = CompiledIntervention::none(m);
  std::vector<int> base;
  std::vector<int> moved;
  for (std::size_t i = 0; i < support.size(); ++i) {
    evaluate_into(m, policy, support.setting(i), none, base);
    for (int xi = 0; xi < m.domain(xv).size(); ++xi) {
      auto iv = none;
      iv.hard[xv] = xi;
      evaluate_into(m, policy, support.setting(i), iv, moved);
      if (moved[dec] != base[dec]) {
        Evidence ev;
        ev.policy = policy;
        ev.eps = internal::NamedExo(m, support.setting(i));
        ev.intervention.hard.emplace(x, m.domain(xv)[xi]);
        return {true, ev};
      }
    }
  }
  return {false, std::nullopt};
}

// Whether every optimal policy responds to x. Decision rows linked by an
// intervention on x must share a choice in any non-responding policy, so
// a non-responding optimal policy exists iff every linked group of rows
// has a common optimal choice.
inline SemanticVerdict has_ri(const Scim& m, const std::string& x, bool support_only = false,
                              const EnumerationOptions& opts = {}) {
  const int xv = internal::NonDecision(m, x, "response incentive");
  const int dec = m.decision();
  const Solution s = solve(m, {}, opts);
  const auto support = exo_support(m, support_only, opts);
  internal::UnionFind groups(s.optimal_choices.size());
  auto forced = CompiledIntervention::none(m);
  forced.hard[dec] = 0;
  std::vector<int> values;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const int* eps = support.setting(i);
    evaluate_into(m, Policy{}, eps, forced, values);
    const std::size_t row = m.layout(dec).row(values.data(), eps[dec]);
    for (int xi = 0; xi < m.domain(xv).size(); ++xi) {
      auto iv = forced;
      iv.hard[xv] = xi;
      evaluate_into(m, Policy{}, eps, iv, values);
      groups.unite(row, m.layout(dec).row(values.data(), eps[dec]));
    }
  }
  std::map<std::size_t, std::vector<int>> common;
  for (std::size_t r = 0; r < s.optimal_choices.size(); ++r) {
    const std::size_t root = groups.find(r);
    auto it = common.find(root);
    if (it == common.end()) {
      common.emplace(root, s.optimal_choices[r]);
      continue;
    }
    std::vector<int> both;
    std::set_intersection(it->second.begin(), it->second.end(), s.optimal_choices[r].begin(),
                          s.optimal_choices[r].end(), std::back_inserter(both));
    it->second = std::move(both);
  }
  Evidence ev;
  ev.quantities = {{"attainable", s.attainable}};
  Policy calm;
  for (std::size_t r = 0; r < s.optimal_choices.size(); ++r) {
    const auto& c = common.at(groups.find(r));
    if (c.empty()) {
      ev.context = internal::NamedContext(m, r / m.layout(dec).exo_size());
      ev.note = "decision rows linked by interventions on '" + x + "' share no optimal choice";
      return {true, ev};
    }
    calm.choices.push_back(c.front());
  }
  ev.policy = calm;
  ev.note = "optimal policy that does not respond to '" + x + "'";
  return {false, ev};
}

namespace internal {

// Expected utility and nested counterfactual utility given a decision
// context, for one policy.
inline std::pair<Rational, Rational> ContextExpectations(const Scim& m, const Policy& policy,
                                                         const ExoSupport& support, std::size_t context, int xv,
                                                         int d) {
  const int dec = m.decision();
  const auto none = CompiledIntervention::none(m);
  Rational mass = 0;
  Rational factual = 0;
  Rational nested = 0;
  std::vector<int> values;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const int* eps = support.setting(i);
    evaluate_into(m, policy, eps, none, values);
    if (m.layout(dec).row(values.data(), 0) / m.layout(dec).exo_size() != context) continue;
    const Rational& p = support.probs[i];
    mass += p;
    factual += p * m.utility_sum(values);
    nested += p * nested_potential_response(m, policy, eps, xv, d);
  }
  return {factual / mass, nested / mass};
}

inline SemanticVerdict IciAt(const Scim& m, const Solution& s, const ExoSupport& support, int xv,
                             std::size_t context, int d, const EnumerationOptions& opts) {
  const int dec = m.decision();
  const std::size_t width = static_cast<std::size_t>(m.layout(dec).exo_size());
  const std::size_t first_row = context * width;
  std::uint64_t combos = 1;
  for (std::size_t e = 0; e < width; ++e) {
    combos *= s.optimal_choices[first_row + e].size();
    if (combos > opts.max_enumeration) throw CapExceeded("optimal choices exceed the enumeration cap");
  }
  Policy policy = s.first();
  std::vector<std::size_t> pos(width, 0);
  Evidence ev;
  ev.context = NamedContext(m, context);
  ev.intervention.hard.emplace(m.graph().name(dec), m.domain(dec)[d]);
  for (std::uint64_t n = 0; n < combos; ++n) {
    for (std::size_t e = 0; e < width; ++e) policy.choices[first_row + e] = s.optimal_choices[first_row + e][pos[e]];
    auto [factual, nested] = ContextExpectations(m, policy, support, context, xv, d);
    if (n == 0 || factual == nested) {
      ev.policy = policy;
      ev.quantities = {{"expected_utility", factual}, {"nested_expected_utility", nested}};
    }
    if (factual == nested) return {false, ev};
    for (std::size_t e = width; e-- > 0;) {
      if (++pos[e] < s.optimal_choices[first_row + e].size()) break;
      pos[e] = 0;
    }
  }
  return {true, ev};
}

}  // namespace internal

// Whether every optimal policy has a different expected utility given the
// context once the effect of do(D = d) reaches the utilities only through x.
// Only the policy's rows for this context matter, so just those are varied.
inline SemanticVerdict has_ici(const Scim& m, const std::string& x, const Assignment& context, const Value& d,
                               const EnumerationOptions& opts = {}) {
  const int xv = m.graph().index(x);
  const int dec = m.decision();
  auto di = m.domain(dec).index_of(d);
  if (!di) throw Error("value '" + d.to_string() + "' outside the decision domain");
  const std::size_t ctx = internal::ContextIndex(m, context);
  const Solution s = solve(m, {}, opts);
  const std::size_t width = static_cast<std::size_t>(m.layout(dec).exo_size());
  Rational mass = 0;
  for (std::size_t e = 0; e < width; ++e) mass += s.row_mass[ctx * width + e];
  if (mass == 0) throw Error("zero-probability decision context");
  const auto support = exo_support(m, true, opts);
  return internal::IciAt(m, s, support, xv, ctx, *di, opts);
}

// Whether has_ici holds for some positive-probability context and some d.
inline SemanticVerdict has_ici_any(const Scim& m, const std::string& x, const EnumerationOptions& opts = {}) {
  const int xv = m.graph().index(x);
  const int dec = m.decision();
  const Solution s = solve(m, {}, opts);
  const auto support = exo_support(m, true, opts);
  const std::size_t width = static_cast<std::size_t>(m.layout(dec).exo_size());
  const std::size_t contexts = s.optimal_choices.size() / width;
  for (std::size_t ctx = 0; ctx < contexts; ++ctx) {
    Rational mass = 0;
    for (std::size_t e = 0; e < width; ++e) mass += s.row_mass[ctx * width + e];
    if (mass == 0) continue;
    for (int d = 0; d < m.domain(dec).size(); ++d) {
      auto verdict = internal::IciAt(m, s, support, xv, ctx, d, opts);
      if (verdict.holds) return verdict;
    }
  }
  return {false, std::nullopt};
}

// Whether the decision's conditional distribution given each
// positive-probability (context, a) is unchanged by every intervention on a.
inline SemanticVerdict is_counterfactually_fair(const Scim& m, const Policy& policy, const std::string& a,
                                                const EnumerationOptions& opts = {}) {
  const int av = internal::NonDecision(m, a, "counterfactual fairness");
  const int dec = m.decision();
  check_policy(m, policy);
  const int k = m.domain(av).size();
  const auto support = exo_support(m, true, opts);
  const auto none = CompiledIntervention::none(m);
  // (context, a, d) -> mass, and (context, a, a', d) -> mass.
  std::map<std::tuple<std::size_t, int, int>, Rational> factual;
  std::map<std::tuple<std::size_t, int, int, int>, Rational> moved;
  std::map<std::pair<std::size_t, int>, Rational> slices;
  std::vector<int> values;
  std::vector<int> other;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const int* eps = support.setting(i);
    const Rational& p = support.probs[i];
    evaluate_into(m, policy, eps, none, values);
    const std::size_t ctx = m.layout(dec).row(values.data(), 0) / m.layout(dec).exo_size();
    slices[{ctx, values[av]}] += p;
    factual[{ctx, values[av], values[dec]}] += p;
    for (int alt = 0; alt < k; ++alt) {
      auto iv = none;
      iv.hard[av] = alt;
      evaluate_into(m, policy, eps, iv, other);
      moved[{ctx, values[av], alt, other[dec]}] += p;
    }
  }
  auto lookup = [](const auto& table, const auto& key) {
    auto it = table.find(key);
    return it == table.end() ? Rational(0) : it->second;
  };
  for (const auto& [slice, mass] : slices) {
    const auto [ctx, ai] = slice;
    for (int alt = 0; alt < k; ++alt) {
      for (int d = 0; d < m.domain(dec).size(); ++d) {
        const Rational lhs = lookup(moved, std::make_tuple(ctx, ai, alt, d)) / mass;
        const Rational rhs = lookup(factual, std::make_tuple(ctx, ai, d)) / mass;
        if (lhs == rhs) continue;
        Evidence ev;
        ev.policy = policy;
        ev.context = internal::NamedContext(m, ctx);
        ev.context->insert_or_assign(a, m.domain(av)[ai]);
        ev.intervention.hard.emplace(a, m.domain(av)[alt]);
        ev.quantities = {{"counterfactual_probability", lhs}, {"factual_probability", rhs}};
        ev.note = "decision value " + m.domain(dec)[d].to_string();
        return {false, ev};
      }
    }
  }
  return {true, std::nullopt};
}

// Whether no optimal policy is counterfactually fair with respect to a.
inline SemanticVerdict all_optimal_unfair(const Scim& m, const std::string& a, const EnumerationOptions& opts = {}) {
  internal::NonDecision(m, a, "counterfactual fairness");
  const Solution s = solve(m, {}, opts);
  std::optional<Policy> fair;
  for_each_optimal_policy(s, [&](const Policy& p) {
    if (is_counterfactually_fair(m, p, a, opts).holds) {
      fair = p;
      return false;
    }
    return true;
  }, opts);
  if (!fair) return {true, std::nullopt};
  Evidence ev;
  ev.policy = *fair;
  ev.note = "optimal policy that is counterfactually fair";
  return {false, ev};
}

}  // namespace cidinc

#endif  // CIDINC_SEMANTICS_HPP_
