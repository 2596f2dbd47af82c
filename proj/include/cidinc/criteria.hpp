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

// Graphical criteria for value of information, response incentives, value
// of control and instrumental control incentives, plus a whole-graph report.

#ifndef CIDINC_CRITERIA_HPP_
#define CIDINC_CRITERIA_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cidinc/graph.hpp"

namespace cidinc {

enum class IncentiveKind { kVoi, kVoc, kRi, kIci };

inline constexpr std::array<IncentiveKind, 4> kAllIncentiveKinds = {IncentiveKind::kVoi, IncentiveKind::kVoc,
                                                                    IncentiveKind::kRi, IncentiveKind::kIci};

inline std::string_view to_string(IncentiveKind kind) {
  switch (kind) {
    case IncentiveKind::kVoi:
      return "voi";
    case IncentiveKind::kVoc:
      return "voc";
    case IncentiveKind::kRi:
      return "ri";
    case IncentiveKind::kIci:
      return "ici";
  }
  return "voi";
}

// Display label as used in figure legends.
inline std::string_view label(IncentiveKind kind) {
  switch (kind) {
    case IncentiveKind::kVoi:
      return "VoI";
    case IncentiveKind::kVoc:
      return "VoC";
    case IncentiveKind::kRi:
      return "RI";
    case IncentiveKind::kIci:
      return "ICI";
  }
  return "VoI";
}

inline std::optional<IncentiveKind> parse_incentive_kind(std::string_view text) {
  for (auto kind : kAllIncentiveKinds) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

// Whether the criterion is defined for x at all.
inline bool applicable(const Cid& cid, IncentiveKind kind, int x) {
  const int d = cid.decision();
  switch (kind) {
    case IncentiveKind::kVoi:
      return cid.kind(x) != NodeKind::kUtility && !descendants(cid, d).contains(x);
    case IncentiveKind::kVoc:
    case IncentiveKind::kRi:
      return x != d;
    case IncentiveKind::kIci:
      return true;
  }
  return false;
}

namespace internal {

inline int Require(const Cid& cid, IncentiveKind kind, const std::string& x) {
  const int v = cid.index(x);
  if (!applicable(cid, kind, v)) {
    switch (kind) {
      case IncentiveKind::kVoi:
        throw Error("value of information is undefined for utility nodes and descendants of the decision");
      case IncentiveKind::kVoc:
        throw Error("value of control is undefined for the decision itself");
      default:
        throw Error("response incentive is undefined for the decision itself");
    }
  }
  return v;
}

}  // namespace internal

inline bool admits_voi(const Cid& cid, int x) {
  const Cid granted = cid.with_edge_added(x, cid.decision());
  return requisite_observations(granted).contains(granted.index(cid.name(x)));
}

// True iff x is requisite once the link x -> D is added.
inline bool admits_voi(const Cid& cid, const std::string& x) {
  return admits_voi(cid, internal::Require(cid, IncentiveKind::kVoi, x));
}

inline bool admits_ri(const Cid& cid, int x) {
  const Cid reduced = minimal_reduction(cid);
  const NodeSet from(cid.size(), {reduced.index(cid.name(x))});
  return directed_path_exists(reduced, from, NodeSet(cid.size(), {reduced.decision()}));
}

// True iff the minimal reduction has a directed path from x to D.
inline bool admits_ri(const Cid& cid, const std::string& x) {
  return admits_ri(cid, internal::Require(cid, IncentiveKind::kRi, x));
}

inline bool admits_voc(const Cid& cid, int x) {
  const Cid reduced = minimal_reduction(cid);
  return directed_path_exists(reduced, NodeSet(cid.size(), {reduced.index(cid.name(x))}), reduced.utilities());
}

// True iff the minimal reduction has a directed path from x to a utility.
inline bool admits_voc(const Cid& cid, const std::string& x) {
  return admits_voc(cid, internal::Require(cid, IncentiveKind::kVoc, x));
}

inline bool admits_ici(const Cid& cid, int x) {
  return descendants(cid, cid.decision()).contains(x) &&
         directed_path_exists(cid, NodeSet(cid.size(), {x}), cid.utilities());
}

// True iff some directed path D ~> x ~> U exists.
inline bool admits_ici(const Cid& cid, const std::string& x) { return admits_ici(cid, cid.index(x)); }

inline bool admits(const Cid& cid, IncentiveKind kind, int x) {
  switch (kind) {
    case IncentiveKind::kVoi:
      return admits_voi(cid, x);
    case IncentiveKind::kVoc:
      return admits_voc(cid, x);
    case IncentiveKind::kRi:
      return admits_ri(cid, x);
    case IncentiveKind::kIci:
      return admits_ici(cid, x);
  }
  return false;
}

enum class Flag { kNotApplicable, kNo, kYes };

inline std::string_view to_string(Flag flag) {
  switch (flag) {
    case Flag::kNotApplicable:
      return "n/a";
    case Flag::kNo:
      return "no";
    case Flag::kYes:
      return "yes";
  }
  return "n/a";
}

struct NodeReport {
  std::string name;
  NodeKind kind = NodeKind::kChance;
  // Indexed by IncentiveKind.
  std::array<Flag, 4> flags{};

  Flag flag(IncentiveKind k) const { return flags[static_cast<int>(k)]; }
  bool admits(IncentiveKind k) const { return flag(k) == Flag::kYes; }
};

struct IncentiveReport {
  // One entry per node, in canonical order.
  std::vector<NodeReport> nodes;
  std::vector<std::string> requisite;
  // Removed information links as (parent, decision) names.
  std::vector<std::pair<std::string, std::string>> removed_links;

  // Names of nodes admitting the incentive, in canonical order.
  std::vector<std::string> admitting(IncentiveKind k) const {
    std::vector<std::string> out;
    for (const auto& n : nodes) {
      if (n.admits(k)) out.push_back(n.name);
    }
    return out;
  }
};

// Evaluates every criterion on every node.
inline IncentiveReport analyze(const Cid& cid) {
  IncentiveReport report;
  const int d = cid.decision();
  const Cid reduced = minimal_reduction(cid);
  const int reduced_d = reduced.decision();
  const NodeSet from_d = descendants(cid, d);
  for (int v = 0; v < cid.size(); ++v) {
    NodeReport node{cid.name(v), cid.kind(v), {}};
    const NodeSet self(cid.size(), {v});
    const NodeSet reduced_self(cid.size(), {reduced.index(cid.name(v))});
    for (auto kind : kAllIncentiveKinds) {
      Flag flag = Flag::kNotApplicable;
      if (applicable(cid, kind, v)) {
        bool yes = false;
        switch (kind) {
          case IncentiveKind::kVoi:
            yes = admits_voi(cid, v);
            break;
          case IncentiveKind::kVoc:
            yes = directed_path_exists(reduced, reduced_self, reduced.utilities());
            break;
          case IncentiveKind::kRi:
            yes = directed_path_exists(reduced, reduced_self, NodeSet(cid.size(), {reduced_d}));
            break;
          case IncentiveKind::kIci:
            yes = from_d.contains(v) && directed_path_exists(cid, self, cid.utilities());
            break;
        }
        flag = yes ? Flag::kYes : Flag::kNo;
      }
      node.flags[static_cast<int>(kind)] = flag;
    }
    report.nodes.push_back(std::move(node));
  }
  report.requisite = cid.names_of(requisite_observations(cid));
  for (int p : nonrequisite_observations(cid)) report.removed_links.emplace_back(cid.name(p), cid.name(d));
  return report;
}

}  // namespace cidinc

#endif  // CIDINC_CRITERIA_HPP_
