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

// Shared test helpers: fixtures, small-graph enumeration, random models and
// brute-force reference implementations that share no code with the
// library's evaluators.

#ifndef CIDINC_TESTS_SUPPORT_HPP_
#define CIDINC_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cidinc/cidinc.hpp"

#ifndef CIDINC_FIXTURE_DIR
#define CIDINC_FIXTURE_DIR "fixtures"
#endif

namespace cidinc::test {

inline std::string FixturePath(const std::string& name) { return std::string(CIDINC_FIXTURE_DIR) + "/" + name; }

inline std::string ReadFixture(const std::string& name) {
  std::ifstream in(FixturePath(name), std::ios::binary);
  if (!in) throw Error("missing fixture " + name);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Cid LoadCid(const std::string& name) { return parse_cid(ReadFixture(name)); }
inline Scim LoadScim(const std::string& name) { return parse_scim(ReadFixture(name)); }

inline std::set<std::string> AsSet(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

// Every CID with one decision D, one utility U and zero to two chance nodes
// A and B, keeping one labeling per class under the swap of A and B.
inline std::vector<Cid> SmallCids() {
  std::vector<Cid> out;
  for (int chance = 0; chance <= 2; ++chance) {
    std::vector<std::string> names;
    std::vector<NodeKind> kinds;
    for (int i = 0; i < chance; ++i) {
      names.push_back(std::string(1, static_cast<char>('A' + i)));
      kinds.push_back(NodeKind::kChance);
    }
    names.push_back("D");
    kinds.push_back(NodeKind::kDecision);
    names.push_back("U");
    kinds.push_back(NodeKind::kUtility);
    const int n = static_cast<int>(names.size());
    std::vector<std::pair<int, int>> slots;
    for (int from = 0; from < n; ++from) {
      if (kinds[from] == NodeKind::kUtility) continue;
      for (int to = 0; to < n; ++to) {
        if (to != from) slots.emplace_back(from, to);
      }
    }
    auto swap_ab = [&](int v) { return chance == 2 && v < 2 ? 1 - v : v; };
    for (std::uint32_t mask = 0; mask < (1u << slots.size()); ++mask) {
      std::set<std::pair<int, int>> edges;
      std::set<std::pair<int, int>> swapped;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (!(mask >> s & 1u)) continue;
        edges.insert(slots[s]);
        swapped.insert({swap_ab(slots[s].first), swap_ab(slots[s].second)});
      }
      if (swapped < edges) continue;
      CidSpec spec;
      for (int v = 0; v < n; ++v) spec.nodes.push_back({names[v], kinds[v], {}});
      for (const auto& [from, to] : edges) spec.nodes[to].parents.push_back(names[from]);
      if (!validate(spec).empty()) continue;
      out.push_back(Cid::make(spec));
    }
  }
  return out;
}

struct RandomScimOptions {
  int domain = 2;
  int exo_size = 2;
  int decision_exo = 1;
  bool full_support = false;
};

// Random finite model on g: every node takes values {0..domain-1}, every
// non-decision node has an exogenous variable of exo_size values with
// random rational weights and a uniformly random function table.
inline Scim RandomScim(const Cid& g, std::mt19937_64& rng, const RandomScimOptions& o = {}) {
  ScimSpec spec;
  spec.graph = g;
  spec.nodes.resize(g.size());
  std::uniform_int_distribution<int> weight(o.full_support ? 1 : 0, 3);
  std::uniform_int_distribution<int> output(0, o.domain - 1);
  for (int v = 0; v < g.size(); ++v) {
    auto& node = spec.nodes[v];
    node.domain = FiniteDomain::integers(0, o.domain - 1);
    const bool decision = g.kind(v) == NodeKind::kDecision;
    const int e = decision ? o.decision_exo : o.exo_size;
    node.exogenous.domain = FiniteDomain::integers(0, e - 1);
    std::vector<int> w(e);
    int total = 0;
    for (auto& x : w) total += (x = decision ? 1 : weight(rng));
    if (total == 0) {
      std::fill(w.begin(), w.end(), 1);
      total = e;
    }
    node.exogenous.dist.clear();
    for (int x : w) node.exogenous.dist.push_back(Rational(x, total));
    for (auto& q : node.exogenous.dist) q.canonicalize();
    if (decision) continue;
    std::size_t rows = static_cast<std::size_t>(e);
    for (std::size_t k = 0; k < g.parents(v).size(); ++k) rows *= static_cast<std::size_t>(o.domain);
    FunctionTable t;
    for (std::size_t r = 0; r < rows; ++r) t.outputs.push_back(output(rng));
    node.function = std::move(t);
  }
  return Scim::make(std::move(spec));
}

// Direct transcription of the structural semantics: recursive evaluation,
// explicit sums over every exogenous setting and every policy.
class Reference {
 public:
  using Hard = std::map<int, int>;
  using Soft = std::map<int, std::vector<int>>;

  explicit Reference(const Scim& m) : g_(m.graph()), spec_(m.spec()), d_(-1) {
    for (int v = 0; v < g_.size(); ++v) {
      if (g_.kind(v) == NodeKind::kDecision) d_ = v;
      if (g_.kind(v) == NodeKind::kUtility) utilities_.push_back(v);
    }
  }

  int decision() const { return d_; }
  const Cid& graph() const { return g_; }

  // Parents in declared order, most significant first, then the exogenous
  // value.
  std::size_t Row(int v, const std::vector<int>& values, int eps) const {
    std::size_t r = 0;
    for (int p : g_.parents(v)) r = r * spec_.nodes[p].domain.size() + values[p];
    return r * spec_.nodes[v].exogenous.domain.size() + eps;
  }

  std::size_t Rows(int v) const {
    std::size_t r = spec_.nodes[v].exogenous.domain.size();
    for (int p : g_.parents(v)) r *= spec_.nodes[p].domain.size();
    return r;
  }

  std::vector<int> Eval(const std::vector<int>& policy, const std::vector<int>& eps, const Hard& hard = {},
                        const Soft& soft = {}) const {
    std::vector<int> values(g_.size(), -1);
    std::function<int(int)> get = [&](int v) {
      if (values[v] >= 0) return values[v];
      if (auto h = hard.find(v); h != hard.end()) return values[v] = h->second;
      for (int p : g_.parents(v)) get(p);
      const std::size_t row = Row(v, values, eps[v]);
      if (auto s = soft.find(v); s != soft.end()) return values[v] = s->second[row];
      if (v == d_) return values[v] = policy[row];
      return values[v] = spec_.nodes[v].function->outputs[row];
    };
    for (int v = 0; v < g_.size(); ++v) get(v);
    return values;
  }

  Rational Utility(const std::vector<int>& values) const {
    Rational sum = 0;
    for (int u : utilities_) sum += spec_.nodes[u].domain[values[u]].rational();
    return sum;
  }

  // Calls fn(eps, probability) for every exogenous setting.
  void ForEachEps(const std::function<void(const std::vector<int>&, const Rational&)>& fn) const {
    std::vector<int> eps(g_.size(), 0);
    while (true) {
      Rational p = 1;
      for (int v = 0; v < g_.size(); ++v) p *= spec_.nodes[v].exogenous.dist[eps[v]];
      fn(eps, p);
      int v = g_.size() - 1;
      while (v >= 0 && ++eps[v] == spec_.nodes[v].exogenous.domain.size()) eps[v--] = 0;
      if (v < 0) return;
    }
  }

  Rational ExpectedUtility(const std::vector<int>& policy, const Hard& hard = {}, const Soft& soft = {}) const {
    Rational total = 0;
    ForEachEps([&](const std::vector<int>& eps, const Rational& p) {
      if (p != 0) total += p * Utility(Eval(policy, eps, hard, soft));
    });
    return total;
  }

  std::vector<std::vector<int>> AllPolicies() const {
    std::vector<std::vector<int>> out;
    const std::size_t rows = Rows(d_);
    const int k = spec_.nodes[d_].domain.size();
    std::vector<int> p(rows, 0);
    while (true) {
      out.push_back(p);
      std::size_t r = rows;
      while (r > 0 && ++p[r - 1] == k) p[--r] = 0;
      if (r == 0) return out;
    }
  }

  Rational Attainable(const Hard& hard = {}, const Soft& soft = {}) const {
    std::optional<Rational> best;
    for (const auto& p : AllPolicies()) {
      const Rational v = ExpectedUtility(p, hard, soft);
      if (!best || v > *best) best = v;
    }
    return *best;
  }

  std::vector<std::vector<int>> Optimal() const {
    const Rational best = Attainable();
    std::vector<std::vector<int>> out;
    for (const auto& p : AllPolicies()) {
      if (ExpectedUtility(p) == best) out.push_back(p);
    }
    return out;
  }

  // Some hard intervention on x changes D at some exogenous setting.
  bool Responds(const std::vector<int>& policy, int x, bool support_only = false) const {
    bool found = false;
    ForEachEps([&](const std::vector<int>& eps, const Rational& p) {
      if (found || (support_only && p == 0)) return;
      const int base = Eval(policy, eps)[d_];
      for (int xi = 0; xi < spec_.nodes[x].domain.size(); ++xi) {
        if (Eval(policy, eps, {{x, xi}})[d_] != base) found = true;
      }
    });
    return found;
  }

  bool HasRi(int x) const {
    for (const auto& p : Optimal()) {
      if (!Responds(p, x)) return false;
    }
    return true;
  }

  // Number of (policy, control table) pairs HasVoc would visit.
  double VocCost(int x) const {
    double tables = 1;
    for (std::size_t r = 0; r < Rows(x); ++r) tables *= spec_.nodes[x].domain.size();
    return tables * static_cast<double>(AllPolicies().size());
  }

  // Jointly searches control tables for x and policies.
  bool HasVoc(int x) const {
    const Rational base = Attainable();
    const std::size_t rows = Rows(x);
    const int k = spec_.nodes[x].domain.size();
    std::vector<int> table(rows, 0);
    while (true) {
      if (Attainable({}, {{x, table}}) > base) return true;
      std::size_t r = rows;
      while (r > 0 && ++table[r - 1] == k) table[--r] = 0;
      if (r == 0) return false;
    }
  }

  // Context of a setting: the decision row with the exogenous part zeroed.
  std::size_t Context(const std::vector<int>& values) const { return Row(d_, values, 0); }

  // E[U | ctx] and E[U_{X_d} | ctx] under the policy, or nullopt when the
  // context has probability zero.
  std::optional<std::pair<Rational, Rational>> IciExpectations(const std::vector<int>& policy, int x,
                                                               std::size_t ctx, int d) const {
    Rational mass = 0;
    Rational factual = 0;
    Rational nested = 0;
    ForEachEps([&](const std::vector<int>& eps, const Rational& p) {
      if (p == 0) return;
      const auto values = Eval(policy, eps);
      if (Context(values) != ctx) return;
      mass += p;
      factual += p * Utility(values);
      const int xd = Eval(policy, eps, {{d_, d}})[x];
      nested += p * Utility(Eval(policy, eps, {{x, xd}}));
    });
    if (mass == 0) return std::nullopt;
    return std::make_pair(factual / mass, nested / mass);
  }

  // Every optimal policy separates the two expectations at (ctx, d).
  bool HasIci(int x, std::size_t ctx, int d) const {
    for (const auto& p : Optimal()) {
      auto e = IciExpectations(p, x, ctx, d);
      if (!e || e->first == e->second) return false;
    }
    return true;
  }

  bool HasIciAny(int x) const {
    std::set<std::size_t> contexts;
    const auto any = AllPolicies().front();
    ForEachEps([&](const std::vector<int>& eps, const Rational& p) {
      if (p != 0) contexts.insert(Context(Eval(any, eps)));
    });
    for (std::size_t ctx : contexts) {
      for (int d = 0; d < spec_.nodes[d_].domain.size(); ++d) {
        if (HasIci(x, ctx, d)) return true;
      }
    }
    return false;
  }

  // Attainable utility over policies that ignore parent x of D.
  Rational AttainableIgnoring(int x) const {
    std::optional<Rational> best;
    const auto& parents = g_.parents(d_);
    const std::size_t at = std::find(parents.begin(), parents.end(), x) - parents.begin();
    for (const auto& p : AllPolicies()) {
      bool constant = true;
      for (std::size_t r = 0; r < p.size() && constant; ++r) {
        auto [pv, e] = Decode(r);
        for (int xi = 0; xi < spec_.nodes[x].domain.size(); ++xi) {
          auto other = pv;
          other[at] = xi;
          if (p[Encode(other, e)] != p[r]) constant = false;
        }
      }
      if (!constant) continue;
      const Rational v = ExpectedUtility(p);
      if (!best || v > *best) best = v;
    }
    return *best;
  }

  // Decision-row codec over the decision's parents.
  std::pair<std::vector<int>, int> Decode(std::size_t r) const {
    const auto& parents = g_.parents(d_);
    const int e = static_cast<int>(r % spec_.nodes[d_].exogenous.domain.size());
    r /= spec_.nodes[d_].exogenous.domain.size();
    std::vector<int> pv(parents.size());
    for (std::size_t k = parents.size(); k-- > 0;) {
      pv[k] = static_cast<int>(r % spec_.nodes[parents[k]].domain.size());
      r /= spec_.nodes[parents[k]].domain.size();
    }
    return {pv, e};
  }

  std::size_t Encode(const std::vector<int>& pv, int e) const {
    std::size_t r = 0;
    const auto& parents = g_.parents(d_);
    for (std::size_t k = 0; k < parents.size(); ++k) r = r * spec_.nodes[parents[k]].domain.size() + pv[k];
    return r * spec_.nodes[d_].exogenous.domain.size() + e;
  }

  // P(D_{a'} = d | ctx, a) = P(D = d | ctx, a) for every positive slice.
  bool Fair(const std::vector<int>& policy, int a) const {
    std::map<std::pair<std::size_t, int>, Rational> slice;
    std::map<std::tuple<std::size_t, int, int>, Rational> factual;
    std::map<std::tuple<std::size_t, int, int, int>, Rational> moved;
    const int k = spec_.nodes[a].domain.size();
    ForEachEps([&](const std::vector<int>& eps, const Rational& p) {
      if (p == 0) return;
      const auto values = Eval(policy, eps);
      const std::size_t ctx = Context(values);
      slice[{ctx, values[a]}] += p;
      factual[{ctx, values[a], values[d_]}] += p;
      for (int alt = 0; alt < k; ++alt) moved[{ctx, values[a], alt, Eval(policy, eps, {{a, alt}})[d_]}] += p;
    });
    for (const auto& [key, mass] : slice) {
      for (int alt = 0; alt < k; ++alt) {
        for (int d = 0; d < spec_.nodes[d_].domain.size(); ++d) {
          auto f = factual.find({key.first, key.second, d});
          auto m = moved.find({key.first, key.second, alt, d});
          const Rational lhs = f == factual.end() ? Rational(0) : f->second;
          const Rational rhs = m == moved.end() ? Rational(0) : m->second;
          if (lhs != rhs) return false;
        }
      }
    }
    return true;
  }

 private:
  Cid g_;
  ScimSpec spec_;
  int d_;
  std::vector<int> utilities_;
};

inline Policy AsPolicy(const std::vector<int>& choices) { return Policy{choices}; }

// Exhaustive d-separation by enumerating every simple path of the skeleton.
class PathOracle {
 public:
  // parents[v] is a bitmask of v's parents.
  explicit PathOracle(std::vector<std::uint32_t> parents) : n_(static_cast<int>(parents.size())), pa_(parents) {
    desc_.assign(n_, 0);
    for (int v = 0; v < n_; ++v) {
      std::uint32_t seen = 1u << v;
      bool grew = true;
      while (grew) {
        grew = false;
        for (int c = 0; c < n_; ++c) {
          if (!(seen >> c & 1u) && (pa_[c] & seen)) {
            seen |= 1u << c;
            grew = true;
          }
        }
      }
      desc_[v] = seen;
    }
    paths_.resize(n_ * n_);
    for (int a = 0; a < n_; ++a) {
      std::vector<int> path{a};
      Walk(path, 1u << a);
    }
  }

  static PathOracle FromCid(const Cid& g) {
    std::vector<std::uint32_t> pa(g.size(), 0);
    for (int v = 0; v < g.size(); ++v) {
      for (int p : g.parents(v)) pa[v] |= 1u << p;
    }
    return PathOracle(pa);
  }

  bool Separated(std::uint32_t xs, std::uint32_t ys, std::uint32_t zs) const {
    for (int a = 0; a < n_; ++a) {
      if (!(xs >> a & 1u)) continue;
      for (int b = 0; b < n_; ++b) {
        if (!(ys >> b & 1u)) continue;
        for (const auto& p : paths_[a * n_ + b]) {
          if (p.chain & zs) continue;
          bool open = true;
          for (std::uint32_t c = p.colliders; c && open; c &= c - 1) {
            if (!(desc_[__builtin_ctz(c)] & zs)) open = false;
          }
          if (open) return false;
        }
      }
    }
    return true;
  }

 private:
  struct Path {
    std::uint32_t chain = 0;
    std::uint32_t colliders = 0;
  };

  bool Edge(int from, int to) const { return pa_[to] >> from & 1u; }

  void Walk(std::vector<int>& path, std::uint32_t used) {
    const int last = path.back();
    if (path.size() > 1) {
      Path p;
      for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const bool collider = Edge(path[i - 1], path[i]) && Edge(path[i + 1], path[i]);
        (collider ? p.colliders : p.chain) |= 1u << path[i];
      }
      paths_[path.front() * n_ + last].push_back(p);
    }
    for (int next = 0; next < n_; ++next) {
      if ((used >> next & 1u) || !(Edge(last, next) || Edge(next, last))) continue;
      path.push_back(next);
      Walk(path, used | 1u << next);
      path.pop_back();
    }
  }

  int n_;
  std::vector<std::uint32_t> pa_;
  std::vector<std::uint32_t> desc_;
  std::vector<std::vector<Path>> paths_;
};

// Every labeled DAG on n nodes, as parent bitmasks.
inline std::vector<std::vector<std::uint32_t>> LabeledDags(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<int> state(pairs.size(), 0);
  while (true) {
    std::vector<std::uint32_t> pa(n, 0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (state[k] == 1) pa[pairs[k].second] |= 1u << pairs[k].first;
      if (state[k] == 2) pa[pairs[k].first] |= 1u << pairs[k].second;
    }
    std::uint32_t done = 0;
    bool progress = true;
    while (progress) {
      progress = false;
      for (int v = 0; v < n; ++v) {
        if (!(done >> v & 1u) && (pa[v] & ~done) == 0) {
          done |= 1u << v;
          progress = true;
        }
      }
    }
    if (done == (1u << n) - 1) out.push_back(pa);
    std::size_t k = 0;
    while (k < state.size() && ++state[k] == 3) state[k++] = 0;
    if (k == state.size()) return out;
  }
}

// Chance-node CID with nodes n0..n{k-1} and the given parent masks.
inline Cid DagCid(const std::vector<std::uint32_t>& pa) {
  CidSpec spec;
  const int n = static_cast<int>(pa.size());
  for (int v = 0; v < n; ++v) {
    NodeDecl decl{"n" + std::to_string(v), NodeKind::kChance, {}};
    for (int p = 0; p < n; ++p) {
      if (pa[v] >> p & 1u) decl.parents.push_back("n" + std::to_string(p));
    }
    spec.nodes.push_back(std::move(decl));
  }
  return Cid::make(spec);
}

}  // namespace cidinc::test

#endif  // CIDINC_TESTS_SUPPORT_HPP_
