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

// Construction of models that exhibit an incentive on a node whenever the
// graphical criterion for it holds.

#ifndef CIDINC_WITNESS_HPP_
#define CIDINC_WITNESS_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cidinc/criteria.hpp"
#include "cidinc/graph.hpp"
#include "cidinc/scim.hpp"
#include "cidinc/value.hpp"

namespace cidinc {

// How a witness node computes its value from its parents and exogenous
// variable.
struct Role {
  enum Kind { kZero, kOne, kEps, kCopy, kProduct, kProductEps };
  Kind kind = kZero;
  int a = -1;
  int b = -1;

  friend bool operator==(const Role&, const Role&) = default;
};

// The paths behind a response-incentive witness. All indices refer to the
// input graph.
struct RiScaffold {
  // X ~> W, ending at the requisite observation W.
  std::vector<int> x_path;
  int w = -1;
  // First node of the S^0 ~> W segment that lies on x_path.
  int z = -1;
  // Path from W to U, active given the decision and its other parents.
  std::vector<int> active_path;
  std::vector<int> sources;
  std::vector<int> colliders;
  // C^i ~> O^i with O^i a parent of D other than W.
  std::vector<std::vector<int>> o_paths;
  // D ~> U.
  std::vector<int> d_path;
  // First node of the S^m ~> U segment on d_path.
  int y = -1;
  int utility = -1;
  // 0 when X, S^0 and Z are distinct; otherwise 1 (all equal),
  // 2 (Z = S^0 != X) or 3 (X = Z != S^0).
  int special_case = 0;
  // Function of every node on the scaffold.
  std::map<int, Role> roles;
};

namespace internal {

constexpr std::uint64_t kScaffoldBudget = 2'000'000;

inline void SortPaths(std::vector<std::vector<int>>& paths) {
  std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
}

class Claims {
 public:
  bool claim(int v, Role role) {
    auto [it, fresh] = roles_.emplace(v, role);
    return fresh || it->second == role;
  }
  const std::map<int, Role>& roles() const { return roles_; }
  std::map<int, Role>& roles() { return roles_; }

 private:
  std::map<int, Role> roles_;
};

inline bool ClaimChain(Claims& claims, const std::vector<int>& path, std::size_t from, std::size_t to) {
  for (std::size_t j = from; j < to; ++j) {
    if (!claims.claim(path[j], {Role::kCopy, path[j - 1]})) return false;
  }
  return true;
}

inline std::size_t Position(const std::vector<int>& path, int v) {
  return static_cast<std::size_t>(std::find(path.begin(), path.end(), v) - path.begin());
}

// Roles implied by the fixed part of a scaffold candidate, or nullopt on a
// conflict.
inline std::optional<Claims> CoreClaims(const Cid& cid, RiScaffold& s) {
  const auto& p = s.active_path;
  Claims claims;
  // Sources and colliders in path order.
  std::vector<std::size_t> src;
  std::vector<std::size_t> col;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const bool out_fwd = cid.has_edge(p[i], p[i + 1]);
    const bool in_fwd = i > 0 && cid.has_edge(p[i - 1], p[i]);
    if (out_fwd && (i == 0 || !in_fwd)) src.push_back(i);
    if (i > 0 && in_fwd && !out_fwd) col.push_back(i);
  }
  s.sources.clear();
  s.colliders.clear();
  for (auto i : src) s.sources.push_back(p[i]);
  for (auto i : col) s.colliders.push_back(p[i]);
  const std::size_t m = col.size();
  if (src.size() != m + 1) return std::nullopt;

  // Segment S^m ~> U truncated at Y, then D ~> U from Y on.
  std::size_t yi = src[m];
  while (Position(s.d_path, p[yi]) == s.d_path.size()) ++yi;
  if (yi == src[m]) return std::nullopt;
  s.y = p[yi];
  const std::size_t y_on_d = Position(s.d_path, s.y);
  for (std::size_t j = 1; j < s.d_path.size(); ++j) {
    if (j == y_on_d) continue;
    if (!claims.claim(s.d_path[j], {Role::kCopy, s.d_path[j - 1]})) return std::nullopt;
  }
  if (!ClaimChain(claims, p, src[m] + 1, yi)) return std::nullopt;
  if (!claims.claim(s.y, {Role::kProduct, p[yi - 1], s.d_path[y_on_d - 1]})) return std::nullopt;

  // Segment S^0 ~> W truncated at Z, then X ~> W from Z on.
  std::vector<int> seg_w;
  for (std::size_t i = src[0] + 1; i-- > 0;) seg_w.push_back(p[i]);
  std::size_t zi = 0;
  while (Position(s.x_path, seg_w[zi]) == s.x_path.size()) ++zi;
  s.z = seg_w[zi];
  const std::size_t z_on_x = Position(s.x_path, s.z);
  const int x = s.x_path.front();
  const int s0 = seg_w.front();
  for (std::size_t j = 1; j < s.x_path.size(); ++j) {
    if (j == z_on_x) continue;
    if (!claims.claim(s.x_path[j], {Role::kCopy, s.x_path[j - 1]})) return std::nullopt;
  }
  if (!ClaimChain(claims, seg_w, 1, zi)) return std::nullopt;
  bool ok = true;
  if (s.z != x && s.z != s0) {
    s.special_case = 0;
    ok = claims.claim(x, {Role::kOne}) && claims.claim(s.z, {Role::kProduct, s.x_path[z_on_x - 1], seg_w[zi - 1]}) &&
         claims.claim(s0, {Role::kEps});
  } else if (s.z == s0 && s.z != x) {
    s.special_case = 2;
    ok = claims.claim(x, {Role::kOne}) && claims.claim(s.z, {Role::kProductEps, s.x_path[z_on_x - 1]});
  } else if (s.z == x && s.z != s0) {
    s.special_case = 3;
    ok = claims.claim(x, {Role::kCopy, seg_w[zi - 1]}) && claims.claim(s0, {Role::kEps});
  } else {
    s.special_case = 1;
    ok = claims.claim(x, {Role::kEps});
  }
  if (!ok) return std::nullopt;

  // Remaining sources and the collider segments.
  for (std::size_t i = 1; i <= m; ++i) {
    if (!claims.claim(p[src[i]], {Role::kEps})) return std::nullopt;
    if (!ClaimChain(claims, p, src[i - 1] + 1, col[i - 1])) return std::nullopt;
    for (std::size_t j = src[i] - 1; j > col[i - 1]; --j) {
      if (!claims.claim(p[j], {Role::kCopy, p[j + 1]})) return std::nullopt;
    }
    if (!claims.claim(p[col[i - 1]], {Role::kProduct, p[col[i - 1] - 1], p[col[i - 1] + 1]})) return std::nullopt;
  }
  return claims;
}

// Chooses non-conflicting collider-to-observation paths, depth first.
inline bool ChooseOPaths(const std::vector<std::vector<std::vector<int>>>& options, std::size_t i, Claims claims,
                         RiScaffold& s, std::uint64_t& budget) {
  if (i == options.size()) {
    s.roles = claims.roles();
    return true;
  }
  for (const auto& path : options[i]) {
    if (budget-- == 0) throw Error("scaffold search budget exhausted");
    Claims next = claims;
    if (!ClaimChain(next, path, 1, path.size())) continue;
    s.o_paths.push_back(path);
    if (ChooseOPaths(options, i + 1, std::move(next), s, budget)) return true;
    s.o_paths.pop_back();
  }
  return false;
}

inline int ValueOf(const Role& role, const std::vector<int>& values, int eps) {
  switch (role.kind) {
    case Role::kZero:
      return 0;
    case Role::kOne:
      return 1;
    case Role::kEps:
      return eps;
    case Role::kCopy:
      return values[role.a];
    case Role::kProduct:
      return values[role.a] * values[role.b];
    case Role::kProductEps:
      return values[role.a] * eps;
  }
  return 0;
}

// Builds a model on cid from node roles. Every endogenous domain is
// {lo..hi}; nodes whose role reads an exogenous value get a uniform
// variable over eps_values, all others a point mass on 0.
inline Scim ModelFromRoles(const Cid& cid, const std::map<int, Role>& roles, int lo, int hi,
                           const std::vector<int>& eps_values) {
  ScimSpec spec;
  spec.graph = cid;
  const int d = cid.decision();
  for (int v = 0; v < cid.size(); ++v) {
    NodeModel node;
    node.domain = FiniteDomain::integers(lo, hi);
    auto it = roles.find(v);
    const Role role = it == roles.end() ? Role{} : it->second;
    if (role.kind == Role::kEps || role.kind == Role::kProductEps) {
      node.exogenous.domain.values.clear();
      node.exogenous.dist.clear();
      for (int e : eps_values) {
        node.exogenous.domain.values.emplace_back(e);
        node.exogenous.dist.emplace_back(1, static_cast<unsigned long>(eps_values.size()));
      }
      for (auto& q : node.exogenous.dist) q.canonicalize();
    }
    spec.nodes.push_back(std::move(node));
  }
  for (int v = 0; v < cid.size(); ++v) {
    if (v == d) continue;
    auto it = roles.find(v);
    const Role role = it == roles.end() ? Role{} : it->second;
    std::vector<int> sizes;
    for (int p : cid.parents(v)) sizes.push_back(spec.nodes[p].domain.size());
    const RowLayout layout(cid.parents(v), sizes, spec.nodes[v].exogenous.domain.size());
    FunctionTable table;
    std::vector<int> values(cid.size(), 0);
    for (std::size_t r = 0; r < layout.rows(); ++r) {
      auto [pv, e] = layout.decode(r);
      for (std::size_t k = 0; k < pv.size(); ++k) values[cid.parents(v)[k]] = pv[k] + lo;
      const int eps = spec.nodes[v].exogenous.domain[e].rational().get_num().get_si();
      table.outputs.push_back(ValueOf(role, values, eps) - lo);
    }
    spec.nodes[v].function = std::move(table);
  }
  return Scim::make(std::move(spec));
}

}  // namespace internal

// Finds a scaffold for a response-incentive witness on x by a deterministic
// search over shortest-first paths, keeping the first candidate in which no
// node is asked to play two different roles. Throws Error when x does not
// satisfy the criterion or no scaffold is found.
inline RiScaffold find_ri_scaffold(const Cid& cid, int x) {
  const int d = cid.decision();
  if (x == d || !admits_ri(cid, x)) throw Error("'" + cid.name(x) + "' does not admit a response incentive");
  const NodeSet requisite = requisite_observations(cid);
  NodeSet everything(cid.size());
  for (int v = 0; v < cid.size(); ++v) everything.insert(v);
  auto x_paths = directed_paths(cid, x, requisite, everything);
  internal::SortPaths(x_paths);
  const NodeSet from_d = descendants(cid, d);
  NodeSet utilities_after_d(cid.size());
  for (int u : cid.utilities().members()) {
    if (from_d.contains(u)) utilities_after_d.insert(u);
  }
  NodeSet observed(cid.size());
  for (int p : cid.parents(d)) observed.insert(p);
  std::uint64_t budget = internal::kScaffoldBudget;
  for (const auto& x_path : x_paths) {
    const int w = x_path.back();
    NodeSet given = observed;
    given.erase(w);
    given.insert(d);
    auto actives = active_paths(cid, w, utilities_after_d, given);
    std::stable_sort(actives.begin(), actives.end(), [&](const auto& a, const auto& b) {
      const int ca = collider_count(cid, a);
      const int cb = collider_count(cid, b);
      if (ca != cb) return ca < cb;
      if (a.size() != b.size()) return a.size() < b.size();
      return a < b;
    });
    NodeSet o_targets = observed;
    o_targets.erase(w);
    NodeSet o_allowed = everything;
    o_allowed.erase(w);
    for (const auto& active : actives) {
      auto d_paths = directed_paths(cid, d, NodeSet(cid.size(), {active.back()}), everything);
      internal::SortPaths(d_paths);
      for (const auto& d_path : d_paths) {
        if (budget-- == 0) throw Error("scaffold search budget exhausted");
        RiScaffold s;
        s.x_path = x_path;
        s.w = w;
        s.active_path = active;
        s.d_path = d_path;
        s.utility = active.back();
        auto claims = internal::CoreClaims(cid, s);
        if (!claims) continue;
        std::vector<std::vector<std::vector<int>>> options;
        for (int c : s.colliders) {
          auto paths = directed_paths(cid, c, o_targets, o_allowed);
          internal::SortPaths(paths);
          options.push_back(std::move(paths));
        }
        if (internal::ChooseOPaths(options, 0, *claims, s, budget)) {
          if (s.roles.count(d)) continue;
          return s;
        }
      }
    }
  }
  throw Error("no response-incentive scaffold found for '" + cid.name(x) + "'");
}

// The model on the scaffold: domains {-1,0,1}, exogenous sources uniform
// on {-1,1}, every other node a point mass. Its attainable utility is 1,
// intervening do(X = 0) drives expected utility to 0 under every policy and
// every optimal policy responds to X.
inline Scim ri_witness_from(const Cid& cid, const RiScaffold& s) {
  return internal::ModelFromRoles(cid, s.roles, -1, 1, {-1, 1});
}

inline Scim ri_witness(const Cid& cid, const std::string& x) {
  return ri_witness_from(cid, find_ri_scaffold(cid, cid.index(x)));
}

// A response-incentive witness on the graph with x -> D added. Throws Error
// when x does not satisfy the value-of-information criterion.
inline Scim voi_witness(const Cid& cid, const std::string& x) {
  if (!admits_voi(cid, x)) throw Error("'" + x + "' does not admit value of information");
  const Cid granted = cid.with_edge_added(cid.index(x), cid.decision());
  return ri_witness(granted, x);
}

struct VocWitness {
  Scim model;
  // Replacement function for x that raises attainable utility by 1.
  FunctionTable control;
  // 1 when some path from x to a utility avoids D, else 2.
  int construction = 1;
};

inline VocWitness voc_witness(const Cid& cid, const std::string& x_name) {
  if (!admits_voc(cid, x_name)) throw Error("'" + x_name + "' does not admit value of control");
  const int x = cid.index(x_name);
  const int d = cid.decision();
  NodeSet allowed(cid.size());
  for (int v = 0; v < cid.size(); ++v) {
    if (v != d) allowed.insert(v);
  }
  auto direct = directed_paths(cid, x, cid.utilities(), allowed);
  internal::SortPaths(direct);
  if (!direct.empty()) {
    std::map<int, Role> roles;
    const auto& path = direct.front();
    for (std::size_t j = 1; j < path.size(); ++j) roles[path[j]] = {Role::kCopy, path[j - 1]};
    Scim model = internal::ModelFromRoles(cid, roles, 0, 1, {0});
    FunctionTable one{std::vector<int>(model.layout(x).rows(), 1)};
    return {std::move(model), std::move(one), 1};
  }
  RiScaffold s = find_ri_scaffold(cid, x);
  const Scim original = ri_witness_from(cid, s);
  FunctionTable control = *original.node(x).function;
  s.roles[x] = Role{Role::kZero};
  Scim model = internal::ModelFromRoles(cid, s.roles, -1, 1, {-1, 1});
  // Keep x's exogenous variable so that the control table can read it.
  ScimSpec spec = model.spec();
  spec.nodes[x].exogenous = original.exogenous(x);
  std::vector<int> sizes;
  for (int p : cid.parents(x)) sizes.push_back(spec.nodes[p].domain.size());
  const RowLayout layout(cid.parents(x), sizes, spec.nodes[x].exogenous.domain.size());
  // Index 1 of {-1,0,1} is the value 0.
  spec.nodes[x].function = FunctionTable{std::vector<int>(layout.rows(), 1)};
  return {Scim::make(std::move(spec)), std::move(control), 2};
}

struct IciWitness {
  Scim model;
  Assignment context;
  Value d;
};

// A binary model copying the decision along a path D ~> x ~> U, with every
// other node constant 0.
inline IciWitness ici_witness(const Cid& cid, const std::string& x_name) {
  if (!admits_ici(cid, x_name)) throw Error("'" + x_name + "' does not admit an instrumental control incentive");
  const int x = cid.index(x_name);
  const int d = cid.decision();
  NodeSet everything(cid.size());
  for (int v = 0; v < cid.size(); ++v) everything.insert(v);
  auto first = directed_paths(cid, d, NodeSet(cid.size(), {x}), everything);
  auto second = directed_paths(cid, x, cid.utilities(), everything);
  internal::SortPaths(first);
  internal::SortPaths(second);
  std::vector<int> chain = first.front();
  chain.insert(chain.end(), second.front().begin() + 1, second.front().end());
  std::map<int, Role> roles;
  for (std::size_t j = 1; j < chain.size(); ++j) roles[chain[j]] = {Role::kCopy, chain[j - 1]};
  IciWitness out{internal::ModelFromRoles(cid, roles, 0, 1, {0}), {}, Value(0)};
  for (int p : cid.parents(d)) out.context.emplace(cid.name(p), Value(0));
  return out;
}

}  // namespace cidinc

#endif  // CIDINC_WITNESS_HPP_
