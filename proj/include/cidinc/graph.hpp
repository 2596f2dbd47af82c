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

// Causal influence diagrams and the purely graphical algorithms over them:
// reachability, d-separation, requisite observations and minimal reduction.

#ifndef CIDINC_GRAPH_HPP_
#define CIDINC_GRAPH_HPP_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cidinc {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a model fails validation. Carries every violation found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(Join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string Join(const std::vector<std::string>& items) {
    std::string out = "validation failed";
    for (const auto& item : items) out += "; " + item;
    return out;
  }

  std::vector<std::string> violations_;
};

enum class NodeKind { kChance, kDecision, kUtility };

inline std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kChance:
      return "chance";
    case NodeKind::kDecision:
      return "decision";
    case NodeKind::kUtility:
      return "utility";
  }
  return "chance";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view text) {
  if (text == "chance") return NodeKind::kChance;
  if (text == "decision") return NodeKind::kDecision;
  if (text == "utility") return NodeKind::kUtility;
  return std::nullopt;
}

// A set of nodes of one graph, addressed by canonical index.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(int universe) : bits_(universe, false) {}
  NodeSet(int universe, std::initializer_list<int> members) : NodeSet(universe) {
    for (int v : members) insert(v);
  }

  int universe() const { return static_cast<int>(bits_.size()); }
  bool contains(int v) const { return bits_[v]; }
  void insert(int v) { bits_[v] = true; }
  void erase(int v) { bits_[v] = false; }

  int count() const {
    return static_cast<int>(std::count(bits_.begin(), bits_.end(), true));
  }
  bool empty() const { return count() == 0; }

  // Members in ascending canonical order.
  std::vector<int> members() const {
    std::vector<int> out;
    for (int v = 0; v < universe(); ++v) {
      if (bits_[v]) out.push_back(v);
    }
    return out;
  }

  bool intersects(const NodeSet& other) const {
    for (int v = 0; v < universe(); ++v) {
      if (bits_[v] && other.bits_[v]) return true;
    }
    return false;
  }

  NodeSet& operator|=(const NodeSet& other) {
    for (int v = 0; v < universe(); ++v) {
      if (other.bits_[v]) bits_[v] = true;
    }
    return *this;
  }

  friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }
  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<bool> bits_;
};

// A node as written by a model author, before validation.
struct NodeDecl {
  std::string name;
  NodeKind kind = NodeKind::kChance;
  std::vector<std::string> parents;

  friend bool operator==(const NodeDecl&, const NodeDecl&) = default;
};

// An unchecked graph description. Cid::make validates it.
struct CidSpec {
  std::vector<NodeDecl> nodes;
};

namespace internal {

// Kahn's algorithm taking the lexicographically least ready node first.
// Returns node positions in canonical order, or the positions left on a
// cycle when the graph is cyclic (second element false).
inline std::pair<std::vector<int>, bool> CanonicalOrder(
    const std::vector<std::string>& names,
    const std::vector<std::vector<int>>& parents) {
  const int n = static_cast<int>(names.size());
  std::vector<int> pending(n, 0);
  std::vector<std::vector<int>> children(n);
  for (int v = 0; v < n; ++v) {
    for (int p : parents[v]) {
      ++pending[v];
      children[p].push_back(v);
    }
  }
  auto later = [&](int a, int b) { return names[a] > names[b]; };
  std::priority_queue<int, std::vector<int>, decltype(later)> ready(later);
  for (int v = 0; v < n; ++v) {
    if (pending[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : children[v]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (static_cast<int>(order.size()) == n) return {order, true};
  std::vector<int> stuck;
  for (int v = 0; v < n; ++v) {
    if (pending[v] > 0) stuck.push_back(v);
  }
  return {stuck, false};
}

}  // namespace internal

// Checks the structural invariants of a graph description and returns every
// violation found. An empty result means the description is valid.
inline std::vector<std::string> validate(const CidSpec& spec) {
  std::vector<std::string> violations;
  std::map<std::string, int> position;
  std::vector<std::string> names;
  for (const auto& node : spec.nodes) {
    if (node.name.empty()) {
      violations.push_back("node with empty name");
    } else if (!position.emplace(node.name, static_cast<int>(names.size())).second) {
      violations.push_back("duplicate node name '" + node.name + "'");
    }
    names.push_back(node.name);
  }
  std::vector<std::vector<int>> parents(spec.nodes.size());
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& node = spec.nodes[i];
    std::set<std::string> seen;
    for (const auto& p : node.parents) {
      auto it = position.find(p);
      if (it == position.end()) {
        violations.push_back("unknown parent '" + p + "' of node '" + node.name + "'");
        continue;
      }
      if (!seen.insert(p).second) {
        violations.push_back("duplicate parent '" + p + "' of node '" + node.name + "'");
        continue;
      }
      if (spec.nodes[it->second].kind == NodeKind::kUtility) {
        violations.push_back("utility node has children: '" + p + "' -> '" + node.name + "'");
      }
      parents[i].push_back(it->second);
    }
  }
  auto [order, acyclic] = internal::CanonicalOrder(names, parents);
  if (!acyclic) {
    std::vector<std::string> stuck;
    for (int v : order) stuck.push_back(names[v]);
    std::sort(stuck.begin(), stuck.end());
    std::string text = "cycle through nodes:";
    for (const auto& s : stuck) text += " " + s;
    violations.push_back(text);
  }
  return violations;
}

// A validated causal influence diagram. Nodes are stored in canonical order
// (topological, ties broken by name) and addressed by that index.
class Cid {
 public:
  Cid() = default;

  // Validates the description and builds the graph. Throws ValidationError.
  static Cid make(const CidSpec& spec) {
    auto violations = validate(spec);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    std::vector<std::string> names;
    std::map<std::string, int> position;
    for (const auto& node : spec.nodes) {
      position.emplace(node.name, static_cast<int>(names.size()));
      names.push_back(node.name);
    }
    std::vector<std::vector<int>> parents;
    for (const auto& node : spec.nodes) {
      std::vector<int> ps;
      for (const auto& p : node.parents) ps.push_back(position.at(p));
      parents.push_back(std::move(ps));
    }
    auto order = internal::CanonicalOrder(names, parents).first;
    Cid cid;
    const int n = static_cast<int>(order.size());
    std::vector<int> rank(n);
    for (int i = 0; i < n; ++i) rank[order[i]] = i;
    cid.names_.resize(n);
    cid.kinds_.resize(n);
    cid.parents_.resize(n);
    cid.children_.resize(n);
    for (int i = 0; i < n; ++i) {
      const auto& node = spec.nodes[order[i]];
      cid.names_[i] = node.name;
      cid.kinds_[i] = node.kind;
      cid.index_.emplace(node.name, i);
      for (int p : parents[order[i]]) cid.parents_[i].push_back(rank[p]);
    }
    for (int v = 0; v < n; ++v) {
      for (int p : cid.parents_[v]) cid.children_[p].push_back(v);
    }
    for (auto& cs : cid.children_) std::sort(cs.begin(), cs.end());
    return cid;
  }

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int v) const { return names_[v]; }
  NodeKind kind(int v) const { return kinds_[v]; }

  // Parents in declared order. Function tables are laid out in this order.
  const std::vector<int>& parents(int v) const { return parents_[v]; }
  // Children in canonical order.
  const std::vector<int>& children(int v) const { return children_[v]; }

  bool has_edge(int from, int to) const {
    const auto& ps = parents_[to];
    return std::find(ps.begin(), ps.end(), from) != ps.end();
  }

  std::optional<int> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Canonical index of a node. Throws Error for unknown names.
  int index(std::string_view name) const {
    auto v = find(name);
    if (!v) throw Error("unknown node '" + std::string(name) + "'");
    return *v;
  }

  NodeSet set_of(const std::vector<std::string>& names) const {
    NodeSet out(size());
    for (const auto& n : names) out.insert(index(n));
    return out;
  }

  // Member names in canonical order.
  std::vector<std::string> names_of(const NodeSet& set) const {
    std::vector<std::string> out;
    for (int v : set.members()) out.push_back(names_[v]);
    return out;
  }

  NodeSet nodes_of_kind(NodeKind kind) const {
    NodeSet out(size());
    for (int v = 0; v < size(); ++v) {
      if (kinds_[v] == kind) out.insert(v);
    }
    return out;
  }

  NodeSet utilities() const { return nodes_of_kind(NodeKind::kUtility); }

  // The unique decision node. Throws Error when there is not exactly one.
  int decision() const {
    auto ds = nodes_of_kind(NodeKind::kDecision).members();
    if (ds.size() != 1) {
      throw Error("expected exactly one decision node, found " + std::to_string(ds.size()));
    }
    return ds.front();
  }

  // The description of this graph with nodes in canonical order.
  CidSpec spec() const {
    CidSpec out;
    for (int v = 0; v < size(); ++v) {
      NodeDecl decl{names_[v], kinds_[v], {}};
      for (int p : parents_[v]) decl.parents.push_back(names_[p]);
      out.nodes.push_back(std::move(decl));
    }
    return out;
  }

  // The graph with from -> to appended to the parent list of to. Returns an
  // unchanged copy when the edge exists. Throws ValidationError on a cycle.
  Cid with_edge_added(int from, int to) const {
    if (has_edge(from, to)) return *this;
    auto s = spec();
    s.nodes[to].parents.push_back(names_[from]);
    return make(s);
  }

  Cid with_edge_removed(int from, int to) const {
    auto s = spec();
    auto& ps = s.nodes[to].parents;
    ps.erase(std::remove(ps.begin(), ps.end(), names_[from]), ps.end());
    return make(s);
  }

  friend bool operator==(const Cid& a, const Cid& b) {
    return a.names_ == b.names_ && a.kinds_ == b.kinds_ && a.parents_ == b.parents_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<NodeKind> kinds_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::map<std::string, int> index_;
};

// Nodes reachable from any member of from by a directed path of length >= 0.
inline NodeSet descendants(const Cid& cid, const NodeSet& from) {
  NodeSet out = from;
  for (int v = 0; v < cid.size(); ++v) {
    if (!out.contains(v)) continue;
    for (int c : cid.children(v)) out.insert(c);
  }
  return out;
}

inline NodeSet descendants(const Cid& cid, int v) {
  return descendants(cid, NodeSet(cid.size(), {v}));
}

inline std::set<std::string> descendants(const Cid& cid, std::string_view v) {
  auto names = cid.names_of(descendants(cid, cid.index(v)));
  return {names.begin(), names.end()};
}

// Nodes with a directed path of length >= 0 into some member of to.
inline NodeSet ancestors(const Cid& cid, const NodeSet& to) {
  NodeSet out = to;
  for (int v = cid.size() - 1; v >= 0; --v) {
    if (!out.contains(v)) continue;
    for (int p : cid.parents(v)) out.insert(p);
  }
  return out;
}

inline bool directed_path_exists(const Cid& cid, const NodeSet& from, const NodeSet& to) {
  return descendants(cid, from).intersects(to);
}

inline bool directed_path_exists(const Cid& cid, const std::vector<std::string>& from,
                                 const std::vector<std::string>& to) {
  return directed_path_exists(cid, cid.set_of(from), cid.set_of(to));
}

// Nodes d-connected to some member of xs given zs, found by a search over
// (node, direction of travel) states. Members of zs are never reported and
// starting nodes inside zs are blocked by the endpoint rule. A start node
// outside zs is connected to itself by the zero-length path.
inline NodeSet d_connected_nodes(const Cid& cid, const NodeSet& xs, const NodeSet& zs) {
  const int n = cid.size();
  const NodeSet z_ancestors = ancestors(cid, zs);
  // visited[2v] marks arrival from a child (moving up), visited[2v+1]
  // arrival from a parent (moving down).
  std::vector<char> visited(2 * n, 0);
  std::vector<std::pair<int, bool>> stack;
  NodeSet reached(n);
  for (int x : xs.members()) {
    if (zs.contains(x)) continue;
    stack.emplace_back(x, false);
  }
  while (!stack.empty()) {
    auto [v, down] = stack.back();
    stack.pop_back();
    char& mark = visited[2 * v + (down ? 1 : 0)];
    if (mark) continue;
    mark = 1;
    if (!zs.contains(v)) reached.insert(v);
    if (!down) {
      if (zs.contains(v)) continue;
      for (int p : cid.parents(v)) stack.emplace_back(p, false);
      for (int c : cid.children(v)) stack.emplace_back(c, true);
    } else {
      if (!zs.contains(v)) {
        for (int c : cid.children(v)) stack.emplace_back(c, true);
      }
      if (z_ancestors.contains(v)) {
        for (int p : cid.parents(v)) stack.emplace_back(p, false);
      }
    }
  }
  return reached;
}

inline bool d_separated(const Cid& cid, const NodeSet& xs, const NodeSet& ys, const NodeSet& zs) {
  return !d_connected_nodes(cid, xs, zs).intersects(ys);
}

inline bool d_separated(const Cid& cid, const std::vector<std::string>& xs,
                        const std::vector<std::string>& ys, const std::vector<std::string>& zs) {
  return d_separated(cid, cid.set_of(xs), cid.set_of(ys), cid.set_of(zs));
}

// Whether the simple path (consecutive nodes adjacent) is active given zs.
inline bool is_active_path(const Cid& cid, const std::vector<int>& path, const NodeSet& zs) {
  if (path.empty() || zs.contains(path.front()) || zs.contains(path.back())) return false;
  const NodeSet z_ancestors = ancestors(cid, zs);
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const int v = path[i];
    const bool collider = cid.has_edge(path[i - 1], v) && cid.has_edge(path[i + 1], v);
    if (collider ? !z_ancestors.contains(v) : zs.contains(v)) return false;
  }
  return true;
}

// Number of colliders on a path.
inline int collider_count(const Cid& cid, const std::vector<int>& path) {
  int count = 0;
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    if (cid.has_edge(path[i - 1], path[i]) && cid.has_edge(path[i + 1], path[i])) ++count;
  }
  return count;
}

// Calls visit on every simple path starting at from and ending at its first
// member of targets, extending only through nodes accepted by allow_step.
// allow_step(path_so_far, next) decides whether next may be appended. Stops
// early when visit returns false. Returns false if stopped early.
inline bool for_each_simple_path(
    const Cid& cid, int from, const NodeSet& targets, bool directed,
    const std::function<bool(const std::vector<int>&, int)>& allow_step,
    const std::function<bool(const std::vector<int>&)>& visit) {
  std::vector<int> path{from};
  std::vector<char> on_path(cid.size(), 0);
  on_path[from] = 1;
  std::function<bool()> extend = [&]() -> bool {
    const int v = path.back();
    if (targets.contains(v)) return visit(path);
    std::vector<int> next = cid.children(v);
    if (!directed) {
      next.insert(next.end(), cid.parents(v).begin(), cid.parents(v).end());
      std::sort(next.begin(), next.end());
    }
    for (int w : next) {
      if (on_path[w] || !allow_step(path, w)) continue;
      path.push_back(w);
      on_path[w] = 1;
      const bool go_on = extend();
      on_path[w] = 0;
      path.pop_back();
      if (!go_on) return false;
    }
    return true;
  };
  return extend();
}

// All simple directed paths from `from` to a member of targets, each ending
// at the first target reached and passing only through nodes in allowed.
inline std::vector<std::vector<int>> directed_paths(const Cid& cid, int from, const NodeSet& targets,
                                                    const NodeSet& allowed) {
  std::vector<std::vector<int>> out;
  for_each_simple_path(
      cid, from, targets, true, [&](const std::vector<int>&, int w) { return allowed.contains(w); },
      [&](const std::vector<int>& p) {
        out.push_back(p);
        return true;
      });
  return out;
}

// All simple paths from `from` to a member of targets that are active given
// zs, each ending at the first target reached.
inline std::vector<std::vector<int>> active_paths(const Cid& cid, int from, const NodeSet& targets,
                                                  const NodeSet& zs) {
  std::vector<std::vector<int>> out;
  if (zs.contains(from)) return out;
  const NodeSet z_ancestors = ancestors(cid, zs);
  auto allow = [&](const std::vector<int>& path, int w) {
    if (path.size() >= 2) {
      const int v = path.back();
      const bool collider = cid.has_edge(path[path.size() - 2], v) && cid.has_edge(w, v);
      if (collider ? !z_ancestors.contains(v) : zs.contains(v)) return false;
    }
    return !zs.contains(w) || !targets.contains(w);
  };
  for_each_simple_path(cid, from, targets, false, allow, [&](const std::vector<int>& p) {
    if (!zs.contains(p.back())) out.push_back(p);
    return true;
  });
  return out;
}

// Parents of the decision that are d-connected to a utility descendant of
// the decision given the decision and its other parents.
inline NodeSet requisite_observations(const Cid& cid) {
  const int d = cid.decision();
  NodeSet utility_descendants(cid.size());
  const NodeSet desc = descendants(cid, d);
  for (int u : cid.utilities().members()) {
    if (desc.contains(u)) utility_descendants.insert(u);
  }
  NodeSet out(cid.size());
  for (int x : cid.parents(d)) {
    NodeSet given(cid.size(), {d});
    for (int p : cid.parents(d)) {
      if (p != x) given.insert(p);
    }
    if (!d_separated(cid, NodeSet(cid.size(), {x}), utility_descendants, given)) out.insert(x);
  }
  return out;
}

// Parents of the decision that are not requisite, in canonical order.
inline std::vector<int> nonrequisite_observations(const Cid& cid) {
  const int d = cid.decision();
  const NodeSet requisite = requisite_observations(cid);
  std::vector<int> out;
  for (int p : cid.parents(d)) {
    if (!requisite.contains(p)) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The graph with every information link from a nonrequisite observation
// removed in a single pass.
inline Cid minimal_reduction(const Cid& cid) {
  const int d = cid.decision();
  auto spec = cid.spec();
  std::set<std::string> drop;
  for (int p : nonrequisite_observations(cid)) drop.insert(cid.name(p));
  auto& ps = spec.nodes[d].parents;
  ps.erase(std::remove_if(ps.begin(), ps.end(), [&](const std::string& p) { return drop.count(p) > 0; }),
           ps.end());
  return Cid::make(spec);
}

// Whether a second reduction pass would remove no further links.
inline bool reduction_is_stable(const Cid& cid) {
  const Cid once = minimal_reduction(cid);
  return nonrequisite_observations(once).empty();
}

}  // namespace cidinc

#endif  // CIDINC_GRAPH_HPP_
