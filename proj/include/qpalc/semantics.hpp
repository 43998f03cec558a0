#pragma once

// Model checker for APALC, GALC and CALC on finite S5 models.
//
// Quantifiers range over announcement extensions, i.e. unions of bisimulation
// blocks (see bisim.hpp). Rather than materializing every union, a quantifier
// is decided by a branching search over block membership: a partial choice of
// blocks leaves some states present, some absent and some undecided, and a
// three-valued evaluation of the quantified body often settles the verdict
// for every completion at once. Undecided leaves fall back to exact evaluation
// on the restricted model. The search covers exactly the same domain as
// DefinableEnumerator.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qpalc/bisim.hpp"
#include "qpalc/error.hpp"
#include "qpalc/formula.hpp"
#include "qpalc/kripke.hpp"
#include "qpalc/state_set.hpp"

namespace qpalc {

// A quantifier instance surfaced by explain(): the announcement extension that
// decided it, and an announcement formula realizing that extension in `model`.
struct Witness {
  Op op = Op::ApalBox;
  std::vector<std::string> group;
  std::shared_ptr<const Model> model;
  StateSet subset;
  Formula formula = top();
  bool verdict = false;
  std::string state;  // evaluation point, named in `model`

  std::vector<std::string> subset_names() const { return state_names(*model, subset); }
};

namespace detail {

enum class Tri : std::int8_t { F = 0, T = 1, U = 2 };

inline Tri tri_not(Tri a) { return a == Tri::U ? Tri::U : (a == Tri::T ? Tri::F : Tri::T); }

enum class Presence : std::int8_t { Out = 0, In = 1, Undecided = 2 };

// Kleene evaluation of a formula over a partially chosen submodel. A state's
// value is computed as if that state were present; absent states are skipped.
class PartialEvaluator {
 public:
  PartialEvaluator(const Model& m, const std::vector<Presence>& presence) : m_(m), presence_(presence) {}

  Tri eval(const Formula& f, StateIdx t) {
    auto& slot = memo_[f.id()];
    if (slot.empty()) slot.assign(m_.num_states(), -1);
    if (slot[t] >= 0) return static_cast<Tri>(slot[t]);
    Tri r = compute(f, t);
    slot[t] = static_cast<std::int8_t>(r);
    return r;
  }

  // First undecided state whose membership kept a result open.
  std::optional<StateIdx> hint() const { return hint_; }

 private:
  void note(StateIdx s) {
    if (!hint_) hint_ = s;
  }

  Tri compute(const Formula& f, StateIdx t) {
    switch (f.op()) {
      case Op::Atom: return m_.valuation(f.name()).contains(t) ? Tri::T : Tri::F;
      case Op::Top: return Tri::T;
      case Op::Not: return tri_not(eval(f.child(), t));
      case Op::And: {
        Tri a = eval(f.left(), t);
        if (a == Tri::F) return Tri::F;
        Tri b = eval(f.right(), t);
        if (b == Tri::F) return Tri::F;
        return (a == Tri::T && b == Tri::T) ? Tri::T : Tri::U;
      }
      case Op::Know: {
        AgentIdx a = m_.agent_index(f.name());
        Tri res = Tri::T;
        std::optional<StateIdx> open;
        const Formula body = f.body();
        bool failed = false;
        m_.agent_class(a, t).for_each([&](StateIdx u) {
          if (failed) return;
          Presence p = u == t ? Presence::In : presence_[u];
          if (p == Presence::Out) return;
          Tri v = eval(body, u);
          if (v == Tri::T) return;
          if (p == Presence::In && v == Tri::F) {
            failed = true;
            return;
          }
          res = Tri::U;
          if (p == Presence::Undecided && !open) open = u;
        });
        if (failed) return Tri::F;
        if (res == Tri::U && open) note(*open);
        return res;
      }
      case Op::Common: {
        std::vector<AgentIdx> g;
        for (const auto& a : f.agents()) g.push_back(m_.agent_index(a));
        // Upper reach goes through present or undecided states, lower reach
        // only through present ones.
        auto reach = [&](bool only_present) {
          StateSet seen = StateSet::singleton(m_.num_states(), t);
          std::vector<StateIdx> stack{t};
          while (!stack.empty()) {
            StateIdx x = stack.back();
            stack.pop_back();
            for (AgentIdx a : g) {
              m_.agent_class(a, x).for_each([&](StateIdx y) {
                if (seen.contains(y)) return;
                Presence p = presence_[y];
                if (p == Presence::Out || (only_present && p != Presence::In)) return;
                seen.insert(y);
                stack.push_back(y);
              });
            }
          }
          return seen;
        };
        const Formula body = f.body();
        bool failed = false;
        reach(true).for_each([&](StateIdx u) {
          if (!failed && eval(body, u) == Tri::F) failed = true;
        });
        if (failed) return Tri::F;
        bool all_true = true;
        std::optional<StateIdx> open;
        reach(false).for_each([&](StateIdx u) {
          if (eval(body, u) != Tri::T) all_true = false;
          if (!open && u != t && presence_[u] == Presence::Undecided) open = u;
        });
        if (all_true) return Tri::T;
        if (open) note(*open);
        return Tri::U;
      }
      case Op::Announce:
        if (eval(f.announcement(), t) == Tri::F) return Tri::T;
        return Tri::U;
      default: return Tri::U;
    }
  }

  const Model& m_;
  const std::vector<Presence>& presence_;
  std::unordered_map<const FormulaNode*, std::vector<std::int8_t>> memo_;
  std::optional<StateIdx> hint_;
};

}  // namespace detail

class Checker {
 public:
  explicit Checker(Model m, std::size_t budget = kDefaultBudget)
      : model_(std::make_shared<const Model>(std::move(m))), budget_(budget) {}
  explicit Checker(std::shared_ptr<const Model> m, std::size_t budget = kDefaultBudget)
      : model_(std::move(m)), budget_(budget) {}

  Checker(Checker&&) = default;
  Checker& operator=(Checker&&) = default;

  const Model& model() const { return *model_; }
  std::shared_ptr<const Model> shared_model() const { return model_; }
  std::size_t budget() const { return budget_; }

  const BisimPartition& partition() {
    if (!partition_) partition_ = compute_partition(*model_);
    return *partition_;
  }

  // Throws ModelError if f mentions an atom or agent the model lacks.
  void require_declared(const Formula& f) const {
    std::set<std::string> atoms, agents;
    symbols(f, atoms, agents);
    for (const auto& p : atoms) model_->prop_index(p);
    for (const auto& a : agents) model_->agent_index(a);
  }

  bool check(StateIdx s, const Formula& f) {
    if (s >= model_->num_states()) throw ModelError("state index out of range");
    require_declared(f);
    return eval(f, s);
  }
  bool check(std::string_view state, const Formula& f) { return check(model_->state_index(state), f); }

  StateSet extension(const Formula& f) {
    require_declared(f);
    return extension_unchecked(f);
  }

  // Context over the submodel where f holds.
  Checker update(const Formula& f) {
    auto ext = extension(f);
    if (ext.empty()) throw Error("announcement " + print(f) + " is false everywhere");
    return Checker(model_->restricted(ext), budget_);
  }

  std::vector<Witness> explain(StateIdx s, const Formula& f) {
    require_declared(f);
    std::vector<Witness> out;
    explain_rec(f, s, eval(f, s), out);
    return out;
  }
  std::vector<Witness> explain(std::string_view state, const Formula& f) {
    return explain(model_->state_index(state), f);
  }

  // Search nodes visited by quantifier searches in this context (not children).
  std::uint64_t search_nodes() const { return search_nodes_; }

 private:
  struct MemoEntry {
    Formula keep;  // holds the node alive so its address stays unique
    std::vector<std::int8_t> value;
  };

  StateSet extension_unchecked(const Formula& f) {
    StateSet out(model_->num_states());
    for (StateIdx s = 0; s < model_->num_states(); ++s)
      if (eval(f, s)) out.insert(s);
    return out;
  }

  bool eval(const Formula& f, StateIdx s) {
    auto it = memo_.find(f.id());
    if (it == memo_.end())
      it = memo_.emplace(f.id(), MemoEntry{f, std::vector<std::int8_t>(model_->num_states(), -1)}).first;
    if (it->second.value[s] >= 0) return it->second.value[s] != 0;
    bool r = compute(f, s);
    memo_.find(f.id())->second.value[s] = r ? 1 : 0;
    return r;
  }

  bool compute(const Formula& f, StateIdx s) {
    const Model& m = *model_;
    switch (f.op()) {
      case Op::Atom: return m.valuation(f.name()).contains(s);
      case Op::Top: return true;
      case Op::Not: return !eval(f.child(), s);
      case Op::And: return eval(f.left(), s) && eval(f.right(), s);
      case Op::Know: {
        bool ok = true;
        const Formula body = f.body();
        m.agent_class(m.agent_index(f.name()), s).for_each([&](StateIdx t) {
          if (ok && !eval(body, t)) ok = false;
        });
        return ok;
      }
      case Op::Common: {
        bool ok = true;
        const Formula body = f.body();
        group_closure(m, agent_indices(m, f.agents()), s).for_each([&](StateIdx t) {
          if (ok && !eval(body, t)) ok = false;
        });
        return ok;
      }
      case Op::Announce: {
        if (!eval(f.announcement(), s)) return true;
        auto [child, idx] = announced(f.announcement(), s);
        return child->eval(f.body(), idx);
      }
      case Op::ApalBox:
      case Op::GalBox:
      case Op::CalBox: return !find_counterexample(f, s).has_value();
    }
    return false;
  }

  // Child context after announcing psi, and the image of s in it.
  std::pair<Checker*, StateIdx> announced(const Formula& psi, StateIdx s) {
    auto ext = extension_unchecked(psi);
    auto it = children_.find(ext);
    if (it == children_.end())
      it = children_.emplace(ext, std::make_unique<Checker>(model_->restricted(ext), budget_)).first;
    StateIdx idx = 0;
    for (StateIdx t = 0; t < s; ++t)
      if (ext.contains(t)) ++idx;
    return {it->second.get(), idx};
  }

  // ---- quantifier search ---------------------------------------------------

  // One family member: a choice of closure blocks for one agent (or, for the
  // arbitrary announcement quantifier, of plain bisimulation blocks).
  struct Group {
    std::optional<AgentIdx> agent;
    BisimPartition blocks;
    std::size_t first_var = 0;
    bool universal = true;
  };

  struct Counterexample {
    std::vector<StateSet> family;  // one set per universal group
    StateSet subset;               // intersection of the family
  };

  class Search {
   public:
    Search(Checker& owner, const Formula& quant, StateIdx anchor) : c_(owner), body_(quant.body()), anchor_(anchor) {
      const Model& m = *c_.model_;
      switch (quant.op()) {
        case Op::ApalBox: groups_.push_back({std::nullopt, c_.partition(), 0, true}); break;
        case Op::GalBox:
          for (const auto& name : quant.agents()) add_agent_group(m.agent_index(name), true);
          break;
        case Op::CalBox: {
          std::set<AgentIdx> coalition;
          for (const auto& name : quant.agents()) coalition.insert(m.agent_index(name));
          for (AgentIdx a : coalition) add_agent_group(a, true);
          for (AgentIdx a = 0; a < m.num_agents(); ++a)
            if (!coalition.count(a)) add_agent_group(a, false);
          break;
        }
        default: throw Error("not a quantifier: " + print(quant));
      }
      std::size_t nvars = 0;
      for (auto& g : groups_) {
        g.first_var = nvars;
        nvars += g.blocks.size();
      }
      assign_.assign(nvars, -1);
      for (const auto& g : groups_) assign_[var(g, anchor_)] = 1;
    }

    std::optional<Counterexample> run() {
      if (!forall()) return make_counterexample();
      return std::nullopt;
    }

   private:
    void add_agent_group(AgentIdx a, bool universal) {
      groups_.push_back({a, closure_partition(*c_.model_, c_.partition(), {a}), 0, universal});
    }
    static std::size_t var(const Group& g, StateIdx s) { return g.first_var + g.blocks.block_of[s]; }

    std::vector<detail::Presence> presence() const {
      const std::size_t n = c_.model_->num_states();
      std::vector<detail::Presence> out(n, detail::Presence::In);
      for (StateIdx s = 0; s < n; ++s) {
        for (const auto& g : groups_) {
          auto v = assign_[var(g, s)];
          if (v == 0) {
            out[s] = detail::Presence::Out;
            break;
          }
          if (v < 0) out[s] = detail::Presence::Undecided;
        }
      }
      return out;
    }

    void tick() {
      if (++c_.search_nodes_, ++visited_ > c_.budget_) throw BudgetExceeded(c_.budget_);
    }

    // Unassigned variable to branch on, preferring the hinted state.
    std::optional<std::size_t> pick(bool universal_phase, std::optional<StateIdx> hint) const {
      auto eligible = [&](const Group& g) { return !universal_phase || g.universal; };
      if (hint) {
        for (const auto& g : groups_)
          if (eligible(g) && assign_[var(g, *hint)] < 0) return var(g, *hint);
      }
      for (const auto& g : groups_) {
        if (!eligible(g)) continue;
        for (std::size_t v = g.first_var; v < g.first_var + g.blocks.size(); ++v)
          if (assign_[v] < 0) return v;
      }
      return std::nullopt;
    }

    bool has_existential() const {
      for (const auto& g : groups_)
        if (!g.universal) return true;
      return false;
    }

    bool exact_leaf() {
      auto p = presence();
      StateSet keep(c_.model_->num_states());
      for (StateIdx s = 0; s < p.size(); ++s)
        if (p[s] == detail::Presence::In) keep.insert(s);
      Checker leaf(c_.model_->restricted(keep), c_.budget_);
      StateIdx idx = 0;
      for (StateIdx t = 0; t < anchor_; ++t)
        if (keep.contains(t)) ++idx;
      return leaf.eval(body_, idx);
    }

    // True iff every universal completion of the current assignment admits an
    // existential completion satisfying the body.
    bool forall() {
      tick();
      auto p = presence();
      detail::PartialEvaluator pe(*c_.model_, p);
      auto r = pe.eval(body_, anchor_);
      if (r == detail::Tri::T) return true;
      if (r == detail::Tri::F) return false;
      auto v = pick(true, pe.hint());
      if (!v) return has_existential() ? exists() : exact_leaf();
      for (std::int8_t choice : {std::int8_t{1}, std::int8_t{0}}) {
        assign_[*v] = choice;
        if (!forall()) return false;  // keep the failing assignment for the report
      }
      assign_[*v] = -1;
      return true;
    }

    bool exists() {
      tick();
      auto p = presence();
      detail::PartialEvaluator pe(*c_.model_, p);
      auto r = pe.eval(body_, anchor_);
      if (r == detail::Tri::T) return true;
      if (r == detail::Tri::F) return false;
      auto v = pick(false, pe.hint());
      if (!v) return exact_leaf();
      for (std::int8_t choice : {std::int8_t{1}, std::int8_t{0}}) {
        assign_[*v] = choice;
        bool ok = exists();
        assign_[*v] = -1;
        if (ok) return true;
      }
      return false;
    }

    // Universal choices as left by a failed forall(); undecided blocks are
    // taken as present (any completion fails equally).
    Counterexample make_counterexample() const {
      const Model& m = *c_.model_;
      Counterexample ce{{}, m.all_states()};
      for (const auto& g : groups_) {
        if (!g.universal) continue;
        StateSet u(m.num_states());
        for (std::size_t b = 0; b < g.blocks.size(); ++b)
          if (assign_[g.first_var + b] != 0) u |= g.blocks.blocks[b];
        ce.subset &= u;
        ce.family.push_back(std::move(u));
      }
      return ce;
    }

    Checker& c_;
    Formula body_;
    StateIdx anchor_;
    std::vector<Group> groups_;
    std::vector<std::int8_t> assign_;
    std::uint64_t visited_ = 0;
  };

  std::optional<Counterexample> find_counterexample(const Formula& quant, StateIdx s) {
    return Search(*this, quant, s).run();
  }

  void explain_rec(const Formula& f, StateIdx s, bool value, std::vector<Witness>& out) {
    const Model& m = *model_;
    switch (f.op()) {
      case Op::Atom:
      case Op::Top: return;
      case Op::Not: explain_rec(f.child(), s, !value, out); return;
      case Op::And:
        if (value) {
          explain_rec(f.left(), s, true, out);
          explain_rec(f.right(), s, true, out);
        } else if (!eval(f.left(), s)) {
          explain_rec(f.left(), s, false, out);
        } else {
          explain_rec(f.right(), s, false, out);
        }
        return;
      case Op::Know:
      case Op::Common: {
        if (value) return;
        StateSet scope = f.op() == Op::Know ? m.agent_class(m.agent_index(f.name()), s)
                                            : group_closure(m, agent_indices(m, f.agents()), s);
        for (StateIdx t : scope.members())
          if (!eval(f.body(), t)) {
            explain_rec(f.body(), t, false, out);
            return;
          }
        return;
      }
      case Op::Announce: {
        if (!eval(f.announcement(), s)) return;
        auto [child, idx] = announced(f.announcement(), s);
        child->explain_rec(f.body(), idx, value, out);
        return;
      }
      case Op::ApalBox:
      case Op::GalBox:
      case Op::CalBox: {
        if (value) return;
        auto ce = find_counterexample(f, s);
        if (!ce) return;
        Witness w;
        w.op = f.op();
        w.group = f.agents();
        w.model = model_;
        w.subset = ce->subset;
        w.verdict = false;
        w.state = m.state_name(s);
        if (f.op() == Op::ApalBox) {
          w.formula = characteristic_formula(m, partition(), ce->subset);
        } else {
          std::vector<Formula> parts;
          for (std::size_t i = 0; i < f.agents().size(); ++i) {
            AgentIdx a = m.agent_index(f.agents()[i]);
            parts.push_back(characteristic_formula(m, partition(), ce->family[i], {a}));
          }
          w.formula = big_and(parts);
        }
        out.push_back(w);
        if (f.op() != Op::CalBox) {
          Checker child(m.restricted(ce->subset), budget_);
          StateIdx idx = 0;
          for (StateIdx t = 0; t < s; ++t)
            if (ce->subset.contains(t)) ++idx;
          child.explain_rec(f.body(), idx, false, out);
        }
        return;
      }
    }
  }

  std::shared_ptr<const Model> model_;
  std::size_t budget_;
  std::optional<BisimPartition> partition_;
  std::unordered_map<const FormulaNode*, MemoEntry> memo_;
  std::unordered_map<StateSet, std::unique_ptr<Checker>, StateSetHash> children_;
  std::uint64_t search_nodes_ = 0;
};

// Witness re-verification: the synthesized announcement's extension in the
// witness model equals the recorded subset.
inline bool reverify(const Witness& w) {
  Checker c(w.model);
  return c.extension(w.formula) == w.subset;
}

}  // namespace qpalc
