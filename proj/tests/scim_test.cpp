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

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "support.hpp"

namespace cidinc {
namespace {

TEST(Rational, ParsesExactFractions) {
  EXPECT_EQ(*parse_rational("1/3") * 3, Rational(1));
  EXPECT_EQ(to_string(*parse_rational("-2/4")), "-1/2");
  EXPECT_EQ(to_string(*parse_rational("6/3")), "2");
  EXPECT_FALSE(parse_rational("1/0"));
  EXPECT_FALSE(parse_rational("1.5"));
  EXPECT_FALSE(parse_rational("abc"));
  EXPECT_FALSE(parse_rational(""));
}

TEST(Value, SymbolsAndRationals) {
  EXPECT_TRUE(Value::parse("3").is_rational());
  EXPECT_FALSE(Value::parse("high").is_rational());
  EXPECT_THROW(Value::symbol("3"), Error);
  EXPECT_LT(Value(5), Value::symbol("a"));
  EXPECT_EQ(Value::parse("2/4"), Value(Rational(1, 2)));
}

ScimSpec Coin() {
  ScimSpec s;
  s.graph = Cid::make({{{"X", NodeKind::kChance, {}}, {"D", NodeKind::kDecision, {"X"}},
                        {"U", NodeKind::kUtility, {"X", "D"}}}});
  s.nodes.resize(3);
  const int x = s.graph.index("X");
  const int d = s.graph.index("D");
  const int u = s.graph.index("U");
  s.nodes[x].domain = FiniteDomain::integers(0, 1);
  s.nodes[x].exogenous = {FiniteDomain::integers(0, 1), {Rational(1, 3), Rational(2, 3)}};
  s.nodes[x].function = FunctionTable{{0, 1}};
  s.nodes[d].domain = FiniteDomain::integers(0, 1);
  s.nodes[u].domain = FiniteDomain::integers(0, 1);
  s.nodes[u].function = FunctionTable{{1, 0, 0, 1}};
  return s;
}

TEST(Scim, ValidationMessages) {
  auto s = Coin();
  s.nodes[s.graph.index("X")].exogenous.dist = {Rational(1, 3), Rational(1, 3)};
  try {
    Scim::make(s);
    FAIL();
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_NE(e.violations()[0].find("not normalized"), std::string::npos);
  }
  s = Coin();
  s.nodes[s.graph.index("U")].function = FunctionTable{{1, 0, -1, 1}};
  EXPECT_THROW(Scim::make(s), ValidationError);
  s = Coin();
  s.nodes[s.graph.index("D")].function = FunctionTable{{0, 0}};
  EXPECT_THROW(Scim::make(s), ValidationError);
  s = Coin();
  s.nodes[s.graph.index("U")].domain.values = {Value::symbol("lo"), Value::symbol("hi")};
  EXPECT_THROW(Scim::make(s), ValidationError);
}

TEST(Scim, MatchingCoinIsSolvedExactly) {
  const Scim m = Scim::make(Coin());
  const Solution s = solve(m);
  EXPECT_EQ(s.attainable, Rational(1));
  EXPECT_EQ(s.count(100), 1u);
  EXPECT_EQ(s.first().choices, (std::vector<int>{0, 1}));
  const Policy constant{{1, 1}};
  EXPECT_EQ(expected_utility(m, constant), Rational(2, 3));
  EXPECT_EQ(prob(m, constant, {{"X", Value(1)}}), Rational(2, 3));
  EXPECT_EQ(expected_utility(m, constant, {}, Assignment{{"X", Value(0)}}), Rational(0));
  EXPECT_EQ(expected_utility(m, constant, {{{"X", Value(0)}}, {}}), Rational(0));
}

TEST(Scim, ZeroProbabilityConditioningIsAnError) {
  auto spec = Coin();
  spec.nodes[spec.graph.index("X")].exogenous.dist = {Rational(0), Rational(1)};
  const Scim m = Scim::make(spec);
  EXPECT_THROW(expected_utility(m, Policy{{0, 0}}, {}, Assignment{{"X", Value(0)}}), Error);
  // Zero-probability rows leave every choice optimal.
  const Solution s = solve(m);
  EXPECT_EQ(s.optimal_choices[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(s.count(100), 2u);
}

TEST(Scim, EnumerationCapIsEnforced) {
  const Scim m = Scim::make(Coin());
  EnumerationOptions tiny;
  tiny.max_enumeration = 3;
  EXPECT_THROW(enumerate_policies(m, tiny), CapExceeded);
  EXPECT_EQ(enumerate_policies(m).size(), 4u);
  tiny.max_enumeration = 1;
  EXPECT_THROW(solve(m, {}, tiny), CapExceeded);
}

TEST(Scim, PoliciesEnumerateLexicographically) {
  const auto ps = enumerate_policies(Scim::make(Coin()));
  std::vector<std::vector<int>> got;
  for (const auto& p : ps) got.push_back(p.choices);
  EXPECT_EQ(got, (std::vector<std::vector<int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
}

// Evaluation, interventions and probabilities agree with the recursive
// reference on random models over every small graph.
TEST(Scim, EvaluationMatchesReference) {
  std::mt19937_64 rng(11);
  for (const Cid& g : test::SmallCids()) {
    const Scim m = test::RandomScim(g, rng, {2, 2, 2, false});
    const test::Reference ref(m);
    const auto policies = ref.AllPolicies();
    const auto& p = policies[rng() % policies.size()];
    const Policy policy{p};
    for (int x = 0; x < g.size(); ++x) {
      InterventionSet iv;
      iv.hard.emplace(g.name(x), Value(1));
      EXPECT_EQ(expected_utility(m, policy, iv), ref.ExpectedUtility(p, {{x, 1}}));
    }
    EXPECT_EQ(expected_utility(m, policy), ref.ExpectedUtility(p));
    ref.ForEachEps([&](const std::vector<int>& eps, const Rational& prob_eps) {
      Assignment named;
      for (int v = 0; v < g.size(); ++v) named.emplace(g.name(v), Value(eps[v]));
      EXPECT_EQ(exo_probability(m, named), prob_eps);
      const auto values = ref.Eval(p, eps);
      const auto got = evaluate(m, policy, named);
      for (int v = 0; v < g.size(); ++v) EXPECT_EQ(got.at(g.name(v)), Value(values[v]));
      for (int x = 0; x < g.size(); ++x) {
        if (x == g.decision()) continue;
        for (int d = 0; d < 2; ++d) {
          const int xd = ref.Eval(p, eps, {{g.decision(), d}})[x];
          EXPECT_EQ(nested_potential_response(m, policy, named, g.name(x), Value(d)),
                    ref.Utility(ref.Eval(p, eps, {{x, xd}})));
        }
      }
    });
  }
}

// The factored optimal set equals the brute-force argmax over all policies.
TEST(Scim, SolveMatchesBruteForce) {
  std::mt19937_64 rng(12);
  for (const Cid& g : test::SmallCids()) {
    for (int rep = 0; rep < 3; ++rep) {
      const Scim m = test::RandomScim(g, rng, {2, 2, rep == 2 ? 2 : 1, false});
      const test::Reference ref(m);
      const auto best = ref.Optimal();
      const OptimalPolicies got = optimal_policies(m);
      EXPECT_EQ(got.attainable, ref.Attainable());
      std::vector<std::vector<int>> choices;
      for (const auto& p : got.policies) choices.push_back(p.choices);
      ASSERT_EQ(choices, best);
      for (const auto& p : best) EXPECT_EQ(expected_utility(m, Policy{p}), got.attainable);
    }
  }
}

TEST(Scim, SoftInterventionsMatchReference) {
  std::mt19937_64 rng(13);
  for (const Cid& g : test::SmallCids()) {
    const Scim m = test::RandomScim(g, rng);
    const test::Reference ref(m);
    for (int x = 0; x < g.size(); ++x) {
      if (x == g.decision()) continue;
      FunctionTable t;
      for (std::size_t r = 0; r < m.layout(x).rows(); ++r) t.outputs.push_back(static_cast<int>(rng() % 2));
      InterventionSet iv;
      iv.soft.emplace(g.name(x), t);
      EXPECT_EQ(solve(m, iv).attainable, ref.Attainable({}, {{x, t.outputs}}));
    }
  }
}

TEST(Scim, ThreadedSolveIsIdentical) {
  std::mt19937_64 rng(14);
  const auto cids = test::SmallCids();
  for (int i = 0; i < 40; ++i) {
    const Scim m = test::RandomScim(cids[rng() % cids.size()], rng, {3, 3, 2, false});
    EnumerationOptions many;
    many.threads = 4;
    const Solution a = solve(m);
    const Solution b = solve(m, {}, many);
    EXPECT_EQ(a.attainable, b.attainable);
    EXPECT_EQ(a.optimal_choices, b.optimal_choices);
    EXPECT_EQ(a.row_mass, b.row_mass);
  }
}

// The returned policy is optimal and constant across nonrequisite parents;
// both properties are rechecked against the reference.
TEST(Scim, GammaRespectingOptimalPolicyExists) {
  std::mt19937_64 rng(15);
  for (const Cid& g : test::SmallCids()) {
    for (int rep = 0; rep < 3; ++rep) {
      const Scim m = test::RandomScim(g, rng, {2, 2, rep == 0 ? 2 : 1, false});
      const test::Reference ref(m);
      const auto p = gamma_respecting_optimal_policy(m);
      ASSERT_TRUE(p.has_value());
      EXPECT_EQ(ref.ExpectedUtility(p->choices), ref.Attainable());
      const int d = g.decision();
      const NodeSet req = requisite_observations(g);
      const auto& parents = g.parents(d);
      for (std::size_t r = 0; r < p->choices.size(); ++r) {
        auto [pv, e] = ref.Decode(r);
        for (std::size_t k = 0; k < parents.size(); ++k) {
          if (req.contains(parents[k])) continue;
          auto other = pv;
          other[k] = 1 - other[k];
          EXPECT_EQ(p->choices[ref.Encode(other, e)], p->choices[r]);
        }
      }
    }
  }
}

}  // namespace
}  // namespace cidinc
