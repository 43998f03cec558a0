#pragma once

// Coarsest bisimulation, enumeration of announcement-definable subsets, and
// characteristic formulas.
//
// On a finite model the extension of any quantifier-free formula is a union of
// bisimulation blocks, and every union of blocks is the extension of some
// epistemic formula. Announcement quantifiers therefore range over block
// unions; group announcements of the form "each i in G announces K_i psi_i"
// additionally require the i-th part to be closed under agent i's relation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "qpalc/error.hpp"
#include "qpalc/formula.hpp"
#include "qpalc/kripke.hpp"
#include "qpalc/state_set.hpp"

namespace qpalc {

inline constexpr std::size_t kDefaultBudget = std::size_t{1} << 20;

struct BisimPartition {
  std::vector<StateSet> blocks;       // ordered by least member
  std::vector<std::size_t> block_of;  // state -> block index
  std::size_t rounds = 0;             // refinement rounds after the valuation split

  std::size_t size() const { return blocks.size(); }
  bool is_union_of_blocks(const StateSet& u) const {
    bool ok = true;
    u.for_each([&](StateIdx s) {
      if (!blocks[block_of[s]].subset_of(u)) ok = false;
    });
    return ok;
  }
};

namespace detail {

// Renumbers `key` classes in order of first occurrence over states 0..n-1, so
// block indices follow least members.
template <typename Key>
std::vector<std::size_t> number_by_first_occurrence(const std::vector<Key>& key) {
  std::map<Key, std::size_t> ids;
  std::vector<std::size_t> out(key.size());
  for (std::size_t s = 0; s < key.size(); ++s) out[s] = ids.emplace(key[s], ids.size()).first->second;
  return out;
}

inline std::vector<StateSet> blocks_from_assignment(const std::vector<std::size_t>& block_of, std::size_t count) {
  std::vector<StateSet> blocks(count, StateSet(block_of.size()));
  for (std::size_t s = 0; s < block_of.size(); ++s) blocks[block_of[s]].insert(s);
  return blocks;
}

}  // namespace detail

// Signature refinement: start from the valuation split and split blocks by the
// set of blocks each agent's class meets, until nothing changes.
inline BisimPartition compute_partition(const Model& m) {
  const std::size_t n = m.num_states();
  std::vector<std::vector<bool>> val_key(n, std::vector<bool>(m.num_props()));
  for (PropIdx p = 0; p < m.num_props(); ++p) m.valuation(p).for_each([&](StateIdx s) { val_key[s][p] = true; });
  std::vector<std::size_t> block_of = detail::number_by_first_occurrence(val_key);
  std::size_t count = block_of.empty() ? 0 : *std::max_element(block_of.begin(), block_of.end()) + 1;

  std::size_t rounds = 0;
  for (;;) {
    // For each agent block, the sorted set of current blocks it meets.
    std::vector<std::vector<std::vector<std::size_t>>> meets(m.num_agents());
    for (AgentIdx a = 0; a < m.num_agents(); ++a) {
      for (const auto& cls : m.blocks(a)) {
        std::vector<std::size_t> hit;
        cls.for_each([&](StateIdx s) { hit.push_back(block_of[s]); });
        std::sort(hit.begin(), hit.end());
        hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
        meets[a].push_back(std::move(hit));
      }
    }
    std::vector<std::vector<std::size_t>> sig(n);
    for (StateIdx s = 0; s < n; ++s) {
      sig[s].push_back(block_of[s]);
      for (AgentIdx a = 0; a < m.num_agents(); ++a) {
        const auto& hit = meets[a][m.block_index(a, s)];
        sig[s].push_back(hit.size());
        sig[s].insert(sig[s].end(), hit.begin(), hit.end());
      }
    }
    auto refined = detail::number_by_first_occurrence(sig);
    std::size_t new_count = refined.empty() ? 0 : *std::max_element(refined.begin(), refined.end()) + 1;
    if (new_count == count) break;
    block_of = std::move(refined);
    count = new_count;
    ++rounds;
  }
  BisimPartition p;
  p.blocks = detail::blocks_from_assignment(block_of, count);
  p.block_of = std::move(block_of);
  p.rounds = rounds;
  return p;
}

// The bisimulation partition coarsened so that each block is also closed
// under every agent in `constraint`: unions of these blocks are exactly the
// sets that are both block-closed and ~a-closed for each constrained a.
inline BisimPartition closure_partition(const Model& m, const BisimPartition& part,
                                        const std::vector<AgentIdx>& constraint) {
  std::vector<std::size_t> parent(part.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (AgentIdx a : constraint) {
    for (const auto& cls : m.blocks(a)) {
      std::optional<std::size_t> first;
      cls.for_each([&](StateIdx s) {
        auto b = find(part.block_of[s]);
        if (!first)
          first = b;
        else
          parent[b] = find(*first);
      });
    }
  }
  std::vector<std::size_t> root(m.num_states());
  for (StateIdx s = 0; s < m.num_states(); ++s) root[s] = find(part.block_of[s]);
  BisimPartition out;
  out.block_of = detail::number_by_first_occurrence(root);
  std::size_t count = out.block_of.empty() ? 0 : *std::max_element(out.block_of.begin(), out.block_of.end()) + 1;
  out.blocks = detail::blocks_from_assignment(out.block_of, count);
  out.rounds = part.rounds;
  return out;
}

inline std::vector<AgentIdx> agent_indices(const Model& m, const std::vector<std::string>& names) {
  std::vector<AgentIdx> out;
  for (const auto& a : names) out.push_back(m.agent_index(a));
  return out;
}

// Stream of every union U of closure blocks with anchor in U, each exactly
// once. Order: binary counting over the non-anchor blocks (by least member),
// so the anchor's own block comes first and the full state set comes last.
class DefinableEnumerator {
 public:
  DefinableEnumerator(const Model& m, const BisimPartition& part, const std::vector<AgentIdx>& constraint,
                      StateIdx anchor, std::size_t budget = kDefaultBudget)
      : coarse_(closure_partition(m, part, constraint)), base_(m.num_states()) {
    if (anchor >= m.num_states()) throw ModelError("anchor state out of range");
    const std::size_t anchor_block = coarse_.block_of[anchor];
    base_ = coarse_.blocks[anchor_block];
    for (std::size_t b = 0; b < coarse_.size(); ++b)
      if (b != anchor_block) free_.push_back(b);
    if (free_.size() >= 63 || (std::uint64_t{1} << free_.size()) > budget) throw BudgetExceeded(budget);
    total_ = std::uint64_t{1} << free_.size();
  }

  std::uint64_t count() const { return total_; }

  std::optional<StateSet> next() {
    if (counter_ >= total_) return std::nullopt;
    StateSet u = base_;
    for (std::size_t i = 0; i < free_.size(); ++i)
      if ((counter_ >> i) & 1u) u |= coarse_.blocks[free_[i]];
    ++counter_;
    return u;
  }

 private:
  BisimPartition coarse_;
  StateSet base_;
  std::vector<std::size_t> free_;
  std::uint64_t total_ = 0;
  std::uint64_t counter_ = 0;
};

inline std::vector<StateSet> enumerate_definable(const Model& m, const BisimPartition& part,
                                                 const std::vector<AgentIdx>& constraint, StateIdx anchor,
                                                 std::size_t budget = kDefaultBudget) {
  DefinableEnumerator e(m, part, constraint, anchor, budget);
  std::vector<StateSet> out;
  while (auto u = e.next()) out.push_back(std::move(*u));
  return out;
}

// Extension of an epistemic formula (Atom/Top/Not/And/Know only) by set algebra.
inline StateSet el_extension(const Model& m, const Formula& f) {
  switch (f.op()) {
    case Op::Atom: return m.valuation(f.name());
    case Op::Top: return m.all_states();
    case Op::Not: return el_extension(m, f.child()).complement();
    case Op::And: return el_extension(m, f.left()) & el_extension(m, f.right());
    case Op::Know: {
      auto body = el_extension(m, f.body());
      AgentIdx a = m.agent_index(f.name());
      StateSet out(m.num_states());
      for (const auto& cls : m.blocks(a))
        if (cls.subset_of(body)) out |= cls;
      return out;
    }
    default: throw Error("el_extension: formula outside the epistemic fragment: " + print(f));
  }
}

namespace detail {

// Per-block characteristic formulas of increasing depth. Level k describes a
// block up to k rounds of refinement; extensions are tracked alongside so no
// separate evaluation is needed.
class CharacteristicLevels {
 public:
  CharacteristicLevels(const Model& m, const BisimPartition& part) : m_(m), part_(part) {
    for (PropIdx p = 0; p < m.num_props(); ++p) {
      const auto& v = m.valuation(p);
      if (!v.empty() && !v.full()) varying_.push_back(p);
    }
    for (AgentIdx a = 0; a < m.num_agents(); ++a) {
      bool trivial = true;
      for (StateIdx s = 0; s < m.num_states() && trivial; ++s)
        if (!m.agent_class(a, s).subset_of(part.blocks[part.block_of[s]])) trivial = false;
      if (!trivial) agents_.push_back(a);
    }
    Level l0;
    for (const auto& b : part.blocks) {
      StateIdx rep = b.members().front();
      std::vector<Formula> lits;
      StateSet ext = m.all_states();
      std::size_t size = 0;
      for (PropIdx p : varying_) {
        bool on = m.valuation(p).contains(rep);
        lits.push_back(on ? atom(m.prop_names()[p]) : neg(atom(m.prop_names()[p])));
        ext &= on ? m.valuation(p) : m.valuation(p).complement();
        size += on ? 1 : 2;
      }
      l0.formulas.push_back(big_and(lits));
      l0.extensions.push_back(std::move(ext));
      l0.sizes.push_back(std::max<std::size_t>(size + lits.size(), 1));
    }
    levels_.push_back(std::move(l0));
  }

  // Level k, building intermediate levels on demand.
  void ensure(std::size_t k) {
    while (levels_.size() <= k) levels_.push_back(next_level(levels_.back()));
  }
  const std::vector<Formula>& formulas(std::size_t k) { return ensure(k), levels_[k].formulas; }
  const std::vector<StateSet>& extensions(std::size_t k) { return ensure(k), levels_[k].extensions; }
  const std::vector<std::size_t>& sizes(std::size_t k) { return ensure(k), levels_[k].sizes; }

 private:
  struct Level {
    std::vector<Formula> formulas;
    std::vector<StateSet> extensions;
    std::vector<std::size_t> sizes;  // printed tree size estimate
  };

  Level next_level(const Level& prev) {
    const Level& base = levels_.front();
    Level out;
    for (std::size_t b = 0; b < part_.size(); ++b) {
      StateIdx rep = part_.blocks[b].members().front();
      std::vector<Formula> parts{base.formulas[b]};
      StateSet ext = base.extensions[b];
      std::size_t size = base.sizes[b];
      for (AgentIdx a : agents_) {
        const std::string& name = m_.agent_names()[a];
        std::vector<std::size_t> hit;
        m_.agent_class(a, rep).for_each([&](StateIdx s) { hit.push_back(part_.block_of[s]); });
        std::sort(hit.begin(), hit.end());
        hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
        std::vector<Formula> alts;
        StateSet alt_ext(m_.num_states());
        for (auto h : hit) {
          parts.push_back(possible(name, prev.formulas[h]));
          ext &= diamond_ext(a, prev.extensions[h]);
          alts.push_back(prev.formulas[h]);
          alt_ext |= prev.extensions[h];
          size += 2 * prev.sizes[h] + 4;
        }
        parts.push_back(know(name, big_or(alts)));
        ext &= box_ext(a, alt_ext);
      }
      out.formulas.push_back(big_and(parts));
      out.extensions.push_back(std::move(ext));
      out.sizes.push_back(size);
    }
    return out;
  }

  StateSet diamond_ext(AgentIdx a, const StateSet& x) const {
    StateSet out(m_.num_states());
    for (const auto& cls : m_.blocks(a))
      if (cls.intersects(x)) out |= cls;
    return out;
  }
  StateSet box_ext(AgentIdx a, const StateSet& x) const {
    StateSet out(m_.num_states());
    for (const auto& cls : m_.blocks(a))
      if (cls.subset_of(x)) out |= cls;
    return out;
  }

  const Model& m_;
  const BisimPartition& part_;
  std::vector<PropIdx> varying_;
  std::vector<AgentIdx> agents_;
  std::vector<Level> levels_;
};

}  // namespace detail

// An epistemic formula whose extension in `m` is exactly `u`. With a non-empty
// constraint the result is a conjunction of K_i(...) formulas, one per
// constrained agent, and `u` must be closed under each of those agents.
inline Formula characteristic_formula(const Model& m, const BisimPartition& part, const StateSet& u,
                                      const std::vector<AgentIdx>& constraint = {}) {
  if (u.universe() != m.num_states()) throw Error("characteristic_formula: subset belongs to a different model");
  if (!part.is_union_of_blocks(u)) throw Error("characteristic_formula: subset is not a union of bisimulation blocks");
  for (AgentIdx a : constraint) {
    bool closed = true;
    u.for_each([&](StateIdx s) {
      if (!m.agent_class(a, s).subset_of(u)) closed = false;
    });
    if (!closed)
      throw Error("characteristic_formula: subset is not closed under agent '" + m.agent_names()[a] + "'");
  }

  auto wrap = [&](const Formula& f) {
    if (constraint.empty()) return f;
    std::vector<Formula> parts;
    for (AgentIdx a : constraint) parts.push_back(know(m.agent_names()[a], f));
    return big_and(parts);
  };

  if (u.full()) return wrap(top());
  if (u.empty()) return wrap(bottom());

  detail::CharacteristicLevels levels(m, part);
  for (std::size_t k = 0; k <= m.num_states(); ++k) {
    const auto& ext = levels.extensions(k);
    const auto& fs = levels.formulas(k);
    const auto& sizes = levels.sizes(k);
    StateSet inside(m.num_states()), outside(m.num_states());
    std::vector<Formula> in_fs, out_fs;
    std::size_t in_size = 0, out_size = 0;
    for (std::size_t b = 0; b < part.size(); ++b) {
      if (part.blocks[b].subset_of(u)) {
        inside |= ext[b];
        in_fs.push_back(fs[b]);
        in_size += sizes[b];
      } else {
        outside |= ext[b];
        out_fs.push_back(fs[b]);
        out_size += sizes[b];
      }
    }
    bool in_ok = inside == u;
    bool out_ok = outside == u.complement();
    if (in_ok && (!out_ok || in_size <= out_size)) return wrap(big_or(in_fs));
    if (out_ok) return wrap(neg(big_or(out_fs)));
  }
  throw Error("characteristic_formula: refinement did not converge");
}

// Quotient by the coarsest bisimulation. Each block becomes one state named
// after its least member; index i of the quotient is block i.
inline Model quotient(const Model& m, const BisimPartition& part) {
  ModelData d;
  d.agents = m.agent_names();
  auto name = [&](std::size_t b) { return m.state_name(part.blocks[b].members().front()); };
  for (std::size_t b = 0; b < part.size(); ++b) d.states.push_back(name(b));
  for (AgentIdx a = 0; a < m.num_agents(); ++a) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& cls : m.blocks(a)) {
      auto members = cls.members();
      for (std::size_t i = 1; i < members.size(); ++i)
        pairs.emplace_back(name(part.block_of[members[0]]), name(part.block_of[members[i]]));
    }
    d.relations[m.agent_names()[a]] = close_pairs(d.states, pairs);
  }
  for (PropIdx p = 0; p < m.num_props(); ++p) {
    auto& v = d.valuation[m.prop_names()[p]];
    for (std::size_t b = 0; b < part.size(); ++b)
      if (m.valuation(p).contains(part.blocks[b].members().front())) v.push_back(name(b));
  }
  if (m.designated()) d.designated = name(part.block_of[*m.designated()]);
  return Model::from_data(d);
}

}  // namespace qpalc
