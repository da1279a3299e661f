#pragma once

#include <memory>
#include <string>
#include <vector>

namespace logicscore {

// ---------------------------------------------------------------------------
// first-order AST for the logic interchange format (LIF)
//
// LIF is the textual logic language bridging LLM output, the internal prover
// and the Isabelle emitter. It covers the forall/exists/&/~/-> fragment with
// predicates of arity >= 1; no functions, no equality.
//
//   theory      = {axiom_line} goal_line
//   axiom_line  = "axiom:" formula
//   goal_line   = "goal:" formula
//   formula     = quantified | implication
//   quantified  = ("forall" | "exists") var "." formula
//   implication = conjunct ["->" formula]
//   conjunct    = unary {"&" unary}
//   unary       = ["~"] (atom | "(" formula ")")
//   atom        = pred "(" term {"," term} ")"
//
// Constants start lowercase, variables start uppercase. Formulas must be
// closed: every variable is bound by an enclosing quantifier.
// ---------------------------------------------------------------------------

enum class TermKind { Constant, Variable };

struct Term {
  TermKind kind = TermKind::Constant;
  std::string name;

  bool operator==(const Term&) const = default;
};

enum class FormulaKind { Atom, Not, And, Implies, ForAll, Exists };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  FormulaKind kind = FormulaKind::Atom;

  // Atom
  std::string predicate;
  std::vector<Term> args;

  // Not uses lhs only; quantifiers keep their body in lhs
  FormulaPtr lhs;
  FormulaPtr rhs;

  // quantifier-bound variable
  std::string var;
};

FormulaPtr make_atom(std::string predicate, std::vector<Term> args);
FormulaPtr make_not(FormulaPtr f);
FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr make_forall(std::string var, FormulaPtr body);
FormulaPtr make_exists(std::string var, FormulaPtr body);

Term constant(std::string name);
Term variable(std::string name);

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

// A formal theory for one reasoning step: premise and assumption sentences as
// axioms, the inference as the goal.
struct LogicTheory {
  std::vector<FormulaPtr> axioms;
  std::vector<std::string> axiom_provenance; // source sentence per axiom, may be empty
  FormulaPtr goal;
  int source_step = 0;
};

// Parses LIF text. Throws LifSyntaxError with 1-based line/column on any
// grammar violation, unbound variable, inconsistent predicate arity, or a
// theory without at least one axiom. Total: any input either parses or
// raises; nothing crashes.
LogicTheory parse_lif(const std::string& text);

// Canonical LIF text. parse_lif(render_lif(t)) is structurally identical to t.
std::string render_formula(const FormulaPtr& f);
std::string render_lif(const LogicTheory& theory);

} // namespace logicscore
