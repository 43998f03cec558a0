#pragma once

// Finite multi-agent S5 Kripke models.
//
// Agent relations are stored as partitions of the state set, so every model
// that exists as a `Model` value is S5 by construction. Raw, possibly invalid
// input lives in `ModelData` and goes through `validate` first.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpalc/error.hpp"
#include "qpalc/state_set.hpp"

namespace qpalc {

using AgentIdx = std::size_t;
using PropIdx = std::size_t;

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || digit(c); });
}

// Unvalidated model description, as read from a file or assembled by hand.
struct ModelData {
  std::vector<std::string> agents;
  std::vector<std::string> states;
  std::map<std::string, std::vector<std::vector<std::string>>> relations;  // agent -> blocks
  std::map<std::string, std::vector<std::string>> valuation;               // prop -> states
  std::optional<std::string> designated;
};

struct Violation {
  std::string kind;  // e.g. "overlapping-blocks", "unknown-state"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(std::string_view kind) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
  }
  std::string summary() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.kind + ": " + v.message;
    }
    return out;
  }
};

inline ValidationReport validate(const ModelData& d) {
  ValidationReport r;
  auto add = [&](std::string kind, std::string msg) { r.violations.push_back({std::move(kind), std::move(msg)}); };

  if (d.states.empty()) add("no-states", "a model needs at least one state");
  std::map<std::string, int> state_seen;
  for (const auto& s : d.states) {
    if (s.empty()) add("bad-state-name", "empty state identifier");
    if (state_seen[s]++ == 1) add("duplicate-state", "state '" + s + "' declared twice");
  }
  std::map<std::string, int> agent_seen;
  for (const auto& a : d.agents) {
    if (!is_identifier(a)) add("bad-agent-name", "agent '" + a + "' is not an identifier");
    if (agent_seen[a]++ == 1) add("duplicate-agent", "agent '" + a + "' declared twice");
  }
  for (const auto& [a, blocks] : d.relations) {
    if (!agent_seen.count(a)) {
      add("unknown-agent", "relation given for undeclared agent '" + a + "'");
      continue;
    }
    std::map<std::string, std::size_t> owner;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& block = blocks[bi];
      if (block.empty()) add("empty-block", "agent '" + a + "' block " + std::to_string(bi) + " is empty");
      for (const auto& s : block) {
        if (!state_seen.count(s)) {
          add("unknown-state", "agent '" + a + "' block " + std::to_string(bi) + " names undeclared state '" + s + "'");
          continue;
        }
        auto [it, fresh] = owner.emplace(s, bi);
        if (!fresh)
          add("overlapping-blocks", "agent '" + a + "' blocks " + std::to_string(it->second) + " and " +
                                        std::to_string(bi) + " share state '" + s + "'");
      }
    }
    for (const auto& [s, n] : state_seen)
      if (!owner.count(s)) add("uncovered-state", "agent '" + a + "' partition misses state '" + s + "'");
  }
  for (const auto& [a, n] : agent_seen)
    if (!d.relations.count(a)) add("missing-relation", "no partition given for agent '" + a + "'");
  for (const auto& [p, ss] : d.valuation) {
    if (!is_identifier(p)) add("bad-prop-name", "proposition '" + p + "' is not an identifier");
    for (const auto& s : ss)
      if (!state_seen.count(s)) add("unknown-state", "valuation of '" + p + "' names undeclared state '" + s + "'");
  }
  if (d.designated && !state_seen.count(*d.designated))
    add("unknown-state", "designated state '" + *d.designated + "' is not declared");
  return r;
}

// Equivalence closure of a pair list: blocks of the smallest equivalence
// relation containing the pairs. States not mentioned become singletons.
inline std::vector<std::vector<std::string>> close_pairs(const std::vector<std::string>& states,
                                                         const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < states.size(); ++i) idx.emplace(states[i], i);
  std::vector<std::size_t> parent(states.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : pairs) {
    auto ia = idx.find(a), ib = idx.find(b);
    if (ia == idx.end() || ib == idx.end())
      throw ModelError("pair (" + a + ", " + b + ") names an undeclared state");
    parent[find(ia->second)] = find(ib->second);
  }
  // Blocks come out in order of their first member.
  std::map<std::size_t, std::size_t> slot;
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto [it, fresh] = slot.emplace(find(i), out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(states[i]);
  }
  return out;
}

class Model {
 public:
  // Throws ModelError carrying the validation summary when `d` is invalid.
  static Model from_data(const ModelData& d) {
    auto report = validate(d);
    if (!report.ok()) throw ModelError("invalid model: " + report.summary());

    Model m;
    m.state_names_ = d.states;
    std::sort(m.state_names_.begin(), m.state_names_.end());
    m.agent_names_ = d.agents;
    std::sort(m.agent_names_.begin(), m.agent_names_.end());
    for (const auto& [p, ss] : d.valuation) m.prop_names_.push_back(p);

    const std::size_t n = m.state_names_.size();
    m.block_of_.assign(m.agent_names_.size(), std::vector<std::size_t>(n, 0));
    m.blocks_.resize(m.agent_names_.size());
    for (AgentIdx a = 0; a < m.agent_names_.size(); ++a) {
      std::vector<std::size_t> assign(n, 0);
      std::vector<StateSet> blocks;
      for (const auto& block : d.relations.at(m.agent_names_[a])) {
        StateSet b(n);
        for (const auto& s : block) b.insert(m.state_index(s));
        blocks.push_back(std::move(b));
      }
      m.set_partition(a, std::move(blocks));
    }
    for (const auto& [p, ss] : d.valuation) {
      StateSet v(n);
      for (const auto& s : ss) v.insert(m.state_index(s));
      m.valuation_.push_back(std::move(v));
    }
    if (d.designated) m.designated_ = m.state_index(*d.designated);
    return m;
  }

  std::size_t num_states() const { return state_names_.size(); }
  std::size_t num_agents() const { return agent_names_.size(); }
  std::size_t num_props() const { return prop_names_.size(); }

  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& agent_names() const { return agent_names_; }
  const std::vector<std::string>& prop_names() const { return prop_names_; }
  const std::string& state_name(StateIdx s) const { return state_names_.at(s); }

  std::optional<StateIdx> find_state(std::string_view name) const { return find_in(state_names_, name); }
  std::optional<AgentIdx> find_agent(std::string_view name) const { return find_in(agent_names_, name); }
  std::optional<PropIdx> find_prop(std::string_view name) const {
    // Propositions are sorted too (std::map key order), so binary search applies.
    return find_in(prop_names_, name);
  }
  StateIdx state_index(std::string_view name) const {
    if (auto s = find_state(name)) return *s;
    throw ModelError("unknown state '" + std::string(name) + "'");
  }
  AgentIdx agent_index(std::string_view name) const {
    if (auto a = find_agent(name)) return *a;
    throw ModelError("unknown agent '" + std::string(name) + "'");
  }
  PropIdx prop_index(std::string_view name) const {
    if (auto p = find_prop(name)) return *p;
    throw ModelError("unknown proposition '" + std::string(name) + "'");
  }

  StateSet all_states() const { return StateSet(num_states(), true); }
  const StateSet& valuation(PropIdx p) const { return valuation_.at(p); }
  const StateSet& valuation(std::string_view prop) const { return valuation_.at(prop_index(prop)); }

  // Blocks of agent a, ordered by least member.
  const std::vector<StateSet>& blocks(AgentIdx a) const { return blocks_.at(a); }
  std::size_t block_index(AgentIdx a, StateIdx s) const { return block_of_[a][s]; }
  const StateSet& agent_class(AgentIdx a, StateIdx s) const { return blocks_[a][block_of_[a][s]]; }

  std::optional<StateIdx> designated() const { return designated_; }
  Model with_designated(std::optional<StateIdx> s) const {
    Model m = *this;
    m.designated_ = s;
    return m;
  }

  ModelData to_data() const {
    ModelData d;
    d.agents = agent_names_;
    d.states = state_names_;
    for (AgentIdx a = 0; a < num_agents(); ++a) {
      auto& out = d.relations[agent_names_[a]];
      for (const auto& b : blocks_[a]) {
        std::vector<std::string> names;
        b.for_each([&](StateIdx s) { names.push_back(state_names_[s]); });
        out.push_back(std::move(names));
      }
    }
    for (PropIdx p = 0; p < num_props(); ++p) {
      auto& out = d.valuation[prop_names_[p]];
      valuation_[p].for_each([&](StateIdx s) { out.push_back(state_names_[s]); });
    }
    if (designated_) d.designated = state_names_[*designated_];
    return d;
  }

  // Submodel on `keep` (non-empty). Relative state order is preserved, so the
  // new index of a kept state is its rank inside `keep`.
  Model restricted(const StateSet& keep) const {
    if (keep.empty()) throw ModelError("cannot restrict a model to the empty set of states");
    auto kept = keep.members();
    const std::size_t n = kept.size();
    std::vector<std::size_t> to_new(num_states(), n);
    for (std::size_t i = 0; i < n; ++i) to_new[kept[i]] = i;
    auto project = [&](const StateSet& s) {
      StateSet out(n);
      s.for_each([&](StateIdx t) {
        if (to_new[t] < n) out.insert(to_new[t]);
      });
      return out;
    };

    Model m;
    m.agent_names_ = agent_names_;
    m.prop_names_ = prop_names_;
    for (auto s : kept) m.state_names_.push_back(state_names_[s]);
    m.block_of_.assign(num_agents(), std::vector<std::size_t>(n, 0));
    m.blocks_.resize(num_agents());
    for (AgentIdx a = 0; a < num_agents(); ++a) {
      std::vector<StateSet> blocks;
      for (const auto& b : blocks_[a]) {
        auto nb = project(b);
        if (!nb.empty()) blocks.push_back(std::move(nb));
      }
      m.set_partition(a, std::move(blocks));
    }
    for (const auto& v : valuation_) m.valuation_.push_back(project(v));
    if (designated_ && keep.contains(*designated_)) m.designated_ = to_new[*designated_];
    return m;
  }

 private:
  Model() = default;

  static std::optional<std::size_t> find_in(const std::vector<std::string>& sorted, std::string_view name) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), name, [](const std::string& a, std::string_view b) { return a < b; });
    if (it == sorted.end() || *it != name) return std::nullopt;
    return static_cast<std::size_t>(it - sorted.begin());
  }

  void set_partition(AgentIdx a, std::vector<StateSet> blocks) {
    std::sort(blocks.begin(), blocks.end(),
              [](const StateSet& x, const StateSet& y) { return x.members().front() < y.members().front(); });
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) blocks[bi].for_each([&](StateIdx s) { block_of_[a][s] = bi; });
    blocks_[a] = std::move(blocks);
  }

  std::vector<std::string> state_names_;
  std::vector<std::string> agent_names_;
  std::vector<std::string> prop_names_;
  std::vector<std::vector<std::size_t>> block_of_;  // [agent][state] -> block index
  std::vector<std::vector<StateSet>> blocks_;       // [agent][block]
  std::vector<StateSet> valuation_;                 // [prop]
  std::optional<StateIdx> designated_;
};

// A constructed Model always satisfies the invariants; this re-derives the
// report from its data for symmetry with the ModelData overload.
inline ValidationReport validate(const Model& m) { return validate(m.to_data()); }

inline StateSet agent_class(const Model& m, std::string_view agent, std::string_view state) {
  return m.agent_class(m.agent_index(agent), m.state_index(state));
}

// Reflexive transitive closure of the union of the group's relations, from s.
inline StateSet group_closure(const Model& m, const std::vector<AgentIdx>& group, StateIdx s) {
  StateSet seen = StateSet::singleton(m.num_states(), s);
  std::vector<StateIdx> frontier{s};
  while (!frontier.empty()) {
    StateIdx t = frontier.back();
    frontier.pop_back();
    for (AgentIdx a : group) {
      m.agent_class(a, t).for_each([&](StateIdx u) {
        if (!seen.contains(u)) {
          seen.insert(u);
          frontier.push_back(u);
        }
      });
    }
  }
  return seen;
}

inline StateSet group_closure(const Model& m, const std::vector<std::string>& group, std::string_view state) {
  std::vector<AgentIdx> idx;
  for (const auto& a : group) idx.push_back(m.agent_index(a));
  return group_closure(m, idx, m.state_index(state));
}

inline Model restrict(const Model& m, const StateSet& keep) { return m.restricted(keep); }

inline std::vector<std::string> state_names(const Model& m, const StateSet& s) {
  std::vector<std::string> out;
  s.for_each([&](StateIdx t) { out.push_back(m.state_name(t)); });
  return out;
}

inline StateSet state_set(const Model& m, const std::vector<std::string>& names) {
  StateSet out(m.num_states());
  for (const auto& n : names) out.insert(m.state_index(n));
  return out;
}

}  // namespace qpalc
