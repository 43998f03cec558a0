#pragma once

// Abstract syntax for APALC, GALC and CALC.
//
// The AST holds only the primitive basis: atoms, Top, negation, conjunction,
// individual knowledge, common knowledge, public announcement and the three
// announcement quantifiers. Bottom, disjunction, implication and every dual
// operator are built from these by the helper constructors below.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qpalc {

enum class Op {
  Atom,
  Top,
  Not,
  And,
  Know,      // K a phi
  Common,    // C {G} phi
  Announce,  // [ann psi] phi
  ApalBox,   // [!] phi
  GalBox,    // [grp {G}] phi
  CalBox,    // [coa {G}] phi
};

class Formula;

struct FormulaNode {
  Op op;
  std::string name;                 // atom or agent (Know)
  std::vector<std::string> agents;  // sorted, duplicate-free (Common/GalBox/CalBox)
  std::shared_ptr<const FormulaNode> lhs;  // sole child for unary operators; announcement for Announce
  std::shared_ptr<const FormulaNode> rhs;  // second conjunct; body for Announce
};

// Immutable, cheaply copyable handle to a shared AST node.
class Formula {
 public:
  using Ptr = std::shared_ptr<const FormulaNode>;

  explicit Formula(Ptr p) : node_(std::move(p)) {}

  Op op() const { return node_->op; }
  const std::string& name() const { return node_->name; }
  const std::vector<std::string>& agents() const { return node_->agents; }
  // Unary body, announcement (Announce) or left conjunct.
  Formula child() const { return Formula(node_->lhs); }
  Formula left() const { return Formula(node_->lhs); }
  Formula right() const { return Formula(node_->rhs); }
  // Announce(psi, phi): announcement() = psi, body() = phi. For every other
  // unary operator body() is the single operand.
  Formula announcement() const { return Formula(node_->lhs); }
  Formula body() const { return Formula(node_->op == Op::Announce ? node_->rhs : node_->lhs); }

  const FormulaNode* id() const { return node_.get(); }
  const Ptr& ptr() const { return node_; }

  friend bool operator==(const Formula& a, const Formula& b) { return equal(a.node_.get(), b.node_.get()); }

 private:
  static bool equal(const FormulaNode* a, const FormulaNode* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->op == b->op && a->name == b->name && a->agents == b->agents && equal(a->lhs.get(), b->lhs.get()) &&
           equal(a->rhs.get(), b->rhs.get());
  }

  Ptr node_;
};

namespace detail {
inline Formula make(Op op, std::string name, std::vector<std::string> agents, Formula::Ptr lhs, Formula::Ptr rhs) {
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{op, std::move(name), std::move(agents), std::move(lhs), std::move(rhs)}));
}
inline std::vector<std::string> normalize(std::vector<std::string> g) {
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}
}  // namespace detail

inline Formula atom(std::string name) { return detail::make(Op::Atom, std::move(name), {}, nullptr, nullptr); }
inline Formula top() { return detail::make(Op::Top, {}, {}, nullptr, nullptr); }
inline Formula neg(const Formula& f) { return detail::make(Op::Not, {}, {}, f.ptr(), nullptr); }
inline Formula conj(const Formula& a, const Formula& b) { return detail::make(Op::And, {}, {}, a.ptr(), b.ptr()); }
inline Formula know(std::string agent, const Formula& f) {
  return detail::make(Op::Know, std::move(agent), {}, f.ptr(), nullptr);
}
inline Formula common(std::vector<std::string> group, const Formula& f) {
  return detail::make(Op::Common, {}, detail::normalize(std::move(group)), f.ptr(), nullptr);
}
inline Formula announce(const Formula& psi, const Formula& phi) {
  return detail::make(Op::Announce, {}, {}, psi.ptr(), phi.ptr());
}
inline Formula apal_box(const Formula& f) { return detail::make(Op::ApalBox, {}, {}, f.ptr(), nullptr); }
inline Formula gal_box(std::vector<std::string> group, const Formula& f) {
  return detail::make(Op::GalBox, {}, detail::normalize(std::move(group)), f.ptr(), nullptr);
}
inline Formula cal_box(std::vector<std::string> group, const Formula& f) {
  return detail::make(Op::CalBox, {}, detail::normalize(std::move(group)), f.ptr(), nullptr);
}

// Derived forms.
inline Formula bottom() { return neg(top()); }
inline Formula disj(const Formula& a, const Formula& b) { return neg(conj(neg(a), neg(b))); }
inline Formula implies(const Formula& a, const Formula& b) { return neg(conj(a, neg(b))); }
inline Formula possible(std::string agent, const Formula& f) { return neg(know(std::move(agent), neg(f))); }
inline Formula common_possible(std::vector<std::string> g, const Formula& f) { return neg(common(std::move(g), neg(f))); }
inline Formula announce_dual(const Formula& psi, const Formula& phi) { return neg(announce(psi, neg(phi))); }
inline Formula apal_diamond(const Formula& f) { return neg(apal_box(neg(f))); }
inline Formula gal_diamond(std::vector<std::string> g, const Formula& f) { return neg(gal_box(std::move(g), neg(f))); }
inline Formula cal_diamond(std::vector<std::string> g, const Formula& f) { return neg(cal_box(std::move(g), neg(f))); }

// Left-folded conjunction; the empty conjunction is Top.
inline Formula big_and(const std::vector<Formula>& fs) {
  if (fs.empty()) return top();
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
  return acc;
}
// Left-folded disjunction; the empty disjunction is Bottom.
inline Formula big_or(const std::vector<Formula>& fs) {
  if (fs.empty()) return bottom();
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = disj(acc, fs[i]);
  return acc;
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {
inline std::string group_text(const std::vector<std::string>& g) {
  std::string out = "{";
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ",";
    out += g[i];
  }
  return out + "}";
}

inline void print_to(const Formula& f, std::string& out) {
  switch (f.op()) {
    case Op::Atom: out += f.name(); return;
    case Op::Top: out += "true"; return;
    case Op::Not:
      out += "~";
      print_to(f.child(), out);
      return;
    case Op::And:
      out += "(";
      print_to(f.left(), out);
      out += " & ";
      print_to(f.right(), out);
      out += ")";
      return;
    case Op::Know:
      out += "K " + f.name() + " ";
      print_to(f.body(), out);
      return;
    case Op::Common:
      out += "C " + group_text(f.agents()) + " ";
      print_to(f.body(), out);
      return;
    case Op::Announce:
      out += "[ann ";
      print_to(f.announcement(), out);
      out += "] ";
      print_to(f.body(), out);
      return;
    case Op::ApalBox:
      out += "[!] ";
      print_to(f.body(), out);
      return;
    case Op::GalBox:
      out += "[grp " + group_text(f.agents()) + "] ";
      print_to(f.body(), out);
      return;
    case Op::CalBox:
      out += "[coa " + group_text(f.agents()) + "] ";
      print_to(f.body(), out);
      return;
  }
}
}  // namespace detail

// Concrete syntax accepted by parse(); binaries are always parenthesized.
inline std::string print(const Formula& f) {
  std::string out;
  detail::print_to(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Classification

enum class Fragment { EL, ELC, PAL, PALC, APALC, GALC, CALC, MIXED };

inline std::string_view to_string(Fragment f) {
  switch (f) {
    case Fragment::EL: return "EL";
    case Fragment::ELC: return "ELC";
    case Fragment::PAL: return "PAL";
    case Fragment::PALC: return "PALC";
    case Fragment::APALC: return "APALC";
    case Fragment::GALC: return "GALC";
    case Fragment::CALC: return "CALC";
    case Fragment::MIXED: return "MIXED";
  }
  return "?";
}

namespace detail {
struct Features {
  bool common = false, announce = false, apal = false, gal = false, cal = false;
};
inline void collect(const Formula& f, Features& ft) {
  switch (f.op()) {
    case Op::Atom:
    case Op::Top: return;
    case Op::Common: ft.common = true; break;
    case Op::Announce: ft.announce = true; break;
    case Op::ApalBox: ft.apal = true; break;
    case Op::GalBox: ft.gal = true; break;
    case Op::CalBox: ft.cal = true; break;
    default: break;
  }
  if (f.op() == Op::And || f.op() == Op::Announce) {
    collect(f.left(), ft);
    collect(f.right(), ft);
  } else {
    collect(f.child(), ft);
  }
}
}  // namespace detail

// Least fragment of EL < {ELC, PAL} < PALC < {APALC, GALC, CALC} containing f.
// MIXED when quantifiers of more than one kind occur.
inline Fragment fragment_of(const Formula& f) {
  detail::Features ft;
  detail::collect(f, ft);
  int kinds = int(ft.apal) + int(ft.gal) + int(ft.cal);
  if (kinds > 1) return Fragment::MIXED;
  if (ft.apal) return Fragment::APALC;
  if (ft.gal) return Fragment::GALC;
  if (ft.cal) return Fragment::CALC;
  if (ft.common && ft.announce) return Fragment::PALC;
  if (ft.common) return Fragment::ELC;
  if (ft.announce) return Fragment::PAL;
  return Fragment::EL;
}

inline bool is_quantifier_free(const Formula& f) {
  auto fr = fragment_of(f);
  return fr == Fragment::EL || fr == Fragment::ELC || fr == Fragment::PAL || fr == Fragment::PALC;
}

// Maximum nesting of Know, Common, Announce and quantifier operators.
// An announcement counts one plus the deeper of its two operands.
inline std::size_t modal_depth(const Formula& f) {
  switch (f.op()) {
    case Op::Atom:
    case Op::Top: return 0;
    case Op::Not: return modal_depth(f.child());
    case Op::And: return std::max(modal_depth(f.left()), modal_depth(f.right()));
    case Op::Announce: return 1 + std::max(modal_depth(f.announcement()), modal_depth(f.body()));
    default: return 1 + modal_depth(f.body());
  }
}

inline std::size_t node_count(const Formula& f) {
  switch (f.op()) {
    case Op::Atom:
    case Op::Top: return 1;
    case Op::And:
    case Op::Announce: return 1 + node_count(f.left()) + node_count(f.right());
    default: return 1 + node_count(f.child());
  }
}

// Atoms and agents mentioned anywhere in f.
inline void symbols(const Formula& f, std::set<std::string>& atoms, std::set<std::string>& agents) {
  switch (f.op()) {
    case Op::Atom: atoms.insert(f.name()); return;
    case Op::Top: return;
    case Op::Know: agents.insert(f.name()); break;
    case Op::Common:
    case Op::GalBox:
    case Op::CalBox: agents.insert(f.agents().begin(), f.agents().end()); break;
    default: break;
  }
  if (f.op() == Op::And || f.op() == Op::Announce) {
    symbols(f.left(), atoms, agents);
    symbols(f.right(), atoms, agents);
  } else {
    symbols(f.child(), atoms, agents);
  }
}

// Replaces every [!] node by [grp G] or [coa G].
inline Formula substitute_quantifier(const Formula& f, Op target, const std::vector<std::string>& group) {
  switch (f.op()) {
    case Op::Atom:
    case Op::Top: return f;
    case Op::Not: return neg(substitute_quantifier(f.child(), target, group));
    case Op::And: return conj(substitute_quantifier(f.left(), target, group), substitute_quantifier(f.right(), target, group));
    case Op::Know: return know(f.name(), substitute_quantifier(f.body(), target, group));
    case Op::Common: return common(f.agents(), substitute_quantifier(f.body(), target, group));
    case Op::Announce:
      return announce(substitute_quantifier(f.announcement(), target, group), substitute_quantifier(f.body(), target, group));
    case Op::ApalBox: {
      auto b = substitute_quantifier(f.body(), target, group);
      if (target == Op::GalBox) return gal_box(group, b);
      if (target == Op::CalBox) return cal_box(group, b);
      return apal_box(b);
    }
    case Op::GalBox: return gal_box(f.agents(), substitute_quantifier(f.body(), target, group));
    case Op::CalBox: return cal_box(f.agents(), substitute_quantifier(f.body(), target, group));
  }
  return f;
}

}  // namespace qpalc
