#include "logicscore/prover.hpp"

#include "logicscore/errors.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_set>

namespace logicscore {

namespace {

// Terms are interned integers: >= 0 identifies a constant, < 0 a variable.
using TermId = int;
inline bool is_var(TermId t) { return t < 0; }

struct Lit {
  bool positive = true;
  int pred = 0;
  std::vector<TermId> args;

  bool operator==(const Lit&) const = default;
  auto operator<=>(const Lit&) const = default;
};

struct Clause {
  std::vector<Lit> lits;
  int depth = 0;
};

// ---------------------------------------------------------------------------
// clausification
// ---------------------------------------------------------------------------

// Negation-normal-form tree; OR only exists here, never in the public AST.
struct Nnf {
  enum Kind { Literal, AndNode, OrNode, ForAllNode, ExistsNode } kind = Literal;
  Lit lit;                       // Literal
  std::vector<Nnf> children;     // AndNode / OrNode (two), quantifiers (one)
  int var = 0;                   // quantifier variable id (negative)
};

class Clausifier {
public:
  std::vector<Clause> run(const LogicTheory& theory) {
    std::vector<Clause> clauses = run_axioms(theory.axioms);
    Scope scope;
    Nnf neg_goal = to_nnf(theory.goal, /*negate=*/true, scope);
    skolemize(neg_goal, 0);
    collect(neg_goal, clauses);
    return normalize(std::move(clauses));
  }

  std::vector<Clause> run_axioms(const std::vector<FormulaPtr>& axioms) {
    std::vector<Clause> clauses;
    Scope scope;
    for (const FormulaPtr& axiom : axioms) {
      Nnf n = to_nnf(axiom, /*negate=*/false, scope);
      skolemize(n, 0);
      collect(n, clauses);
    }
    return clauses;
  }

  int intern_pred(const std::string& name, size_t arity) {
    std::string key = name + "/" + std::to_string(arity);
    for (size_t i = 0; i < pred_keys_.size(); ++i)
      if (pred_keys_[i] == key) return static_cast<int>(i);
    pred_keys_.push_back(std::move(key));
    pred_names_.push_back(name);
    return static_cast<int>(pred_keys_.size()) - 1;
  }

  const std::string& pred_name(int id) const { return pred_names_[static_cast<size_t>(id)]; }

  std::string term_name(TermId t) const {
    if (is_var(t)) return "X" + std::to_string(-t);
    return const_names_[static_cast<size_t>(t)];
  }

private:
  TermId intern_const(const std::string& name) {
    for (size_t i = 0; i < const_names_.size(); ++i)
      if (const_names_[i] == name) return static_cast<TermId>(i);
    const_names_.push_back(name);
    return static_cast<TermId>(const_names_.size()) - 1;
  }

  TermId fresh_var() { return --var_counter_; }

  TermId fresh_skolem() { return intern_const("sk'" + std::to_string(++skolem_counter_)); }

  using Scope = std::vector<std::pair<std::string, TermId>>;

  // Pushes negation inward while standardizing quantified variables apart.
  // The scope is shared across the recursion with push/pop discipline.
  Nnf to_nnf(const FormulaPtr& f, bool negate, Scope& scope) {
    switch (f->kind) {
      case FormulaKind::Atom: {
        Nnf n;
        n.kind = Nnf::Literal;
        n.lit.positive = !negate;
        n.lit.pred = intern_pred(f->predicate, f->args.size());
        n.lit.args.reserve(f->args.size());
        for (const Term& t : f->args) {
          if (t.kind == TermKind::Variable) {
            TermId id = 0;
            bool found = false;
            for (auto it = scope.rbegin(); it != scope.rend(); ++it)
              if (it->first == t.name) { id = it->second; found = true; break; }
            if (!found)
              throw UnsupportedFormula("unbound variable '" + t.name + "' in prover input");
            n.lit.args.push_back(id);
          } else {
            n.lit.args.push_back(intern_const(t.name));
          }
        }
        return n;
      }
      case FormulaKind::Not:
        return to_nnf(f->lhs, !negate, scope);
      case FormulaKind::And: {
        Nnf n;
        n.kind = negate ? Nnf::OrNode : Nnf::AndNode;
        n.children.reserve(2);
        n.children.push_back(to_nnf(f->lhs, negate, scope));
        n.children.push_back(to_nnf(f->rhs, negate, scope));
        return n;
      }
      case FormulaKind::Implies: {
        // a -> b  ==  ~a | b
        Nnf n;
        n.kind = negate ? Nnf::AndNode : Nnf::OrNode;
        n.children.reserve(2);
        n.children.push_back(to_nnf(f->lhs, !negate, scope));
        n.children.push_back(to_nnf(f->rhs, negate, scope));
        return n;
      }
      case FormulaKind::ForAll:
      case FormulaKind::Exists: {
        bool universal = (f->kind == FormulaKind::ForAll) != negate;
        Nnf n;
        n.kind = universal ? Nnf::ForAllNode : Nnf::ExistsNode;
        n.var = fresh_var();
        scope.emplace_back(f->var, n.var);
        n.children.push_back(to_nnf(f->lhs, negate, scope));
        scope.pop_back();
        return n;
      }
    }
    throw UnsupportedFormula("unknown formula node");
  }

  // Replaces top-level existentials with fresh constants, in place. An
  // existential in the scope of a universal would need a Skolem function,
  // which the term language cannot express.
  void skolemize(Nnf& n, int universal_depth) {
    switch (n.kind) {
      case Nnf::Literal:
        return;
      case Nnf::AndNode:
      case Nnf::OrNode:
        for (Nnf& child : n.children) skolemize(child, universal_depth);
        return;
      case Nnf::ForAllNode: {
        skolemize(n.children[0], universal_depth + 1);
        Nnf body = std::move(n.children[0]); // the binder drops; ids stay unique
        n = std::move(body);
        return;
      }
      case Nnf::ExistsNode: {
        if (universal_depth > 0)
          throw UnsupportedFormula(
              "existential quantifier inside a universal scope requires function symbols, "
              "which the fragment excludes");
        TermId sk = fresh_skolem();
        substitute(n.children[0], n.var, sk);
        Nnf body = std::move(n.children[0]);
        n = std::move(body);
        skolemize(n, universal_depth);
        return;
      }
    }
    throw UnsupportedFormula("unknown NNF node");
  }

  static void substitute(Nnf& n, TermId var, TermId replacement) {
    if (n.kind == Nnf::Literal) {
      for (TermId& t : n.lit.args)
        if (t == var) t = replacement;
      return;
    }
    for (Nnf& child : n.children) substitute(child, var, replacement);
  }

  // Distributes OR over AND and flattens into clauses.
  void collect(const Nnf& n, std::vector<Clause>& out) {
    switch (n.kind) {
      case Nnf::Literal: {
        out.push_back(Clause{{n.lit}, 0});
        return;
      }
      case Nnf::AndNode:
        for (const Nnf& child : n.children) collect(child, out);
        return;
      case Nnf::OrNode: {
        std::vector<std::vector<Lit>> product{{}};
        expand_or(n, product);
        for (auto& lits : product) out.push_back(Clause{std::move(lits), 0});
        return;
      }
      default:
        throw UnsupportedFormula("quantifier survived skolemization");
    }
  }

  static void expand_or(const Nnf& n, std::vector<std::vector<Lit>>& product) {
    switch (n.kind) {
      case Nnf::Literal:
        for (auto& lits : product) lits.push_back(n.lit);
        return;
      case Nnf::OrNode:
        for (const Nnf& child : n.children) expand_or(child, product);
        return;
      case Nnf::AndNode: {
        std::vector<std::vector<Lit>> result;
        for (const Nnf& child : n.children) {
          std::vector<std::vector<Lit>> branch = product;
          expand_or(child, branch);
          result.insert(result.end(), branch.begin(), branch.end());
        }
        product = std::move(result);
        return;
      }
      default:
        throw UnsupportedFormula("quantifier survived skolemization");
    }
  }

  static std::vector<Clause> normalize(std::vector<Clause> clauses) {
    std::vector<Clause> kept;
    for (Clause& c : clauses) {
      std::sort(c.lits.begin(), c.lits.end());
      c.lits.erase(std::unique(c.lits.begin(), c.lits.end()), c.lits.end());
      bool tautology = false;
      for (const Lit& l : c.lits) {
        Lit flipped = l;
        flipped.positive = !l.positive;
        if (std::binary_search(c.lits.begin(), c.lits.end(), flipped)) {
          tautology = true;
          break;
        }
      }
      if (!tautology) kept.push_back(std::move(c));
    }
    return kept;
  }

  // linear scans beat hashing at the handful of symbols a step theory has
  std::vector<std::string> pred_names_;
  std::vector<std::string> pred_keys_;
  std::vector<std::string> const_names_;
  int var_counter_ = 0;
  int skolem_counter_ = 0;
};

// ---------------------------------------------------------------------------
// resolution engine
// ---------------------------------------------------------------------------

using Subst = std::map<TermId, TermId>;

TermId walk(TermId t, const Subst& s) {
  while (is_var(t)) {
    auto it = s.find(t);
    if (it == s.end()) break;
    t = it->second;
  }
  return t;
}

bool unify(TermId a, TermId b, Subst& s) {
  a = walk(a, s);
  b = walk(b, s);
  if (a == b) return true;
  if (is_var(a)) { s[a] = b; return true; }
  if (is_var(b)) { s[b] = a; return true; }
  return false; // distinct constants
}

bool unify_lits(const Lit& a, const Lit& b, Subst& s) {
  if (a.pred != b.pred || a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!unify(a.args[i], b.args[i], s)) return false;
  return true;
}

Lit apply_subst(const Lit& l, const Subst& s) {
  Lit out = l;
  for (TermId& t : out.args) t = walk(t, s);
  return out;
}

// Renames variables so structurally identical clauses share one key; also the
// clause-level dedup key. Literals are kept sorted by every producer.
std::string canonical_key(const Clause& c) {
  std::vector<std::pair<TermId, int>> renumber; // var id -> canonical number
  std::string key;
  key.reserve(c.lits.size() * 8);
  char buf[16];
  auto append_int = [&](int value) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    key.append(buf, ptr);
  };
  for (const Lit& l : c.lits) {
    key += l.positive ? '+' : '-';
    append_int(l.pred);
    key += '(';
    for (TermId t : l.args) {
      if (is_var(t)) {
        int id = -1;
        for (const auto& [var, num] : renumber)
          if (var == t) { id = num; break; }
        if (id < 0) {
          id = static_cast<int>(renumber.size());
          renumber.emplace_back(t, id);
        }
        key += 'v';
        append_int(id);
      } else {
        key += 'c';
        append_int(t);
      }
      key += ',';
    }
    key += ')';
  }
  return key;
}

Clause rename_apart(const Clause& c, int& var_counter) {
  std::map<TermId, TermId> fresh;
  Clause out;
  out.depth = c.depth;
  out.lits.reserve(c.lits.size());
  for (const Lit& l : c.lits) {
    Lit nl = l;
    for (TermId& t : nl.args) {
      if (!is_var(t)) continue;
      auto [it, inserted] = fresh.emplace(t, 0);
      if (inserted) it->second = --var_counter;
      t = it->second;
    }
    out.lits.push_back(std::move(nl));
  }
  return out;
}

// Does `general` subsume `specific` (some substitution maps it into a subset)?
bool subsumes(const Clause& general_in, const Clause& specific) {
  if (general_in.lits.size() > specific.lits.size()) return false;

  bool general_ground = true;
  for (const Lit& l : general_in.lits)
    for (TermId t : l.args)
      if (is_var(t)) { general_ground = false; break; }
  if (general_ground) {
    // ground case reduces to literal containment
    for (const Lit& l : general_in.lits) {
      bool found = false;
      for (const Lit& s : specific.lits)
        if (l == s) { found = true; break; }
      if (!found) return false;
    }
    return true;
  }

  // The two clauses are separate scopes: move general's variables into a
  // band disjoint from specific's ids so one-way matching cannot alias them.
  std::set<TermId> used;
  for (const Lit& l : specific.lits)
    for (TermId t : l.args)
      if (is_var(t)) used.insert(t);
  Clause general = general_in;
  {
    std::map<TermId, TermId> remap;
    TermId next = -1;
    auto fresh = [&]() {
      while (used.count(next)) --next;
      return next--;
    };
    for (Lit& l : general.lits)
      for (TermId& t : l.args) {
        if (!is_var(t)) continue;
        auto [it, inserted] = remap.emplace(t, 0);
        if (inserted) it->second = fresh();
        t = it->second;
      }
  }

  // backtracking match over literal assignments
  std::vector<size_t> choice(general.lits.size(), 0);
  std::vector<Subst> stack{{}};
  size_t i = 0;
  while (true) {
    if (i == general.lits.size()) return true;
    bool advanced = false;
    for (size_t j = choice[i]; j < specific.lits.size(); ++j) {
      const Lit& g = general.lits[i];
      const Lit& s = specific.lits[j];
      if (g.positive != s.positive || g.pred != s.pred || g.args.size() != s.args.size())
        continue;
      // one-way match: variables of `general` bind, constants must equal
      Subst sub = stack.back();
      bool ok = true;
      for (size_t k = 0; k < g.args.size(); ++k) {
        TermId gt = walk(g.args[k], sub);
        TermId st = s.args[k];
        if (is_var(gt)) {
          sub[gt] = st;
        } else if (gt != st) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      choice[i] = j + 1;
      stack.push_back(std::move(sub));
      ++i;
      if (i < choice.size()) choice[i] = 0;
      advanced = true;
      break;
    }
    if (advanced) continue;
    if (i == 0) return false;
    stack.pop_back();
    --i;
  }
}

struct Saturation {
  std::vector<Clause> kept;
  std::deque<Clause> queue;
  std::unordered_set<std::string> seen;
  int var_counter = -1000000; // fresh variables for renamed clauses
  bool depth_skipped = false;
  bool found_empty = false;
  size_t generated = 0;

  static constexpr size_t kMaxGenerated = 200000;

  bool add(Clause c, int max_depth) {
    std::string key = canonical_key(c);
    if (seen.count(key)) return false;
    if (c.depth > max_depth) {
      // not marked seen: a shallower derivation of the same clause may
      // still arrive within budget
      depth_skipped = true;
      return false;
    }
    seen.insert(std::move(key));
    if (c.lits.empty()) {
      found_empty = true;
      return true;
    }
    for (const Clause& k : kept)
      if (subsumes(k, c)) return false;
    queue.push_back(std::move(c));
    return true;
  }
};

void resolve_pair(const Clause& a, const Clause& b, Saturation& sat, int max_depth) {
  for (size_t i = 0; i < a.lits.size(); ++i) {
    for (size_t j = 0; j < b.lits.size(); ++j) {
      const Lit& la = a.lits[i];
      const Lit& lb = b.lits[j];
      if (la.positive == lb.positive) continue;
      Subst s;
      if (!unify_lits(la, lb, s)) continue;
      Clause res;
      res.depth = std::max(a.depth, b.depth) + 1;
      for (size_t k = 0; k < a.lits.size(); ++k)
        if (k != i) res.lits.push_back(apply_subst(a.lits[k], s));
      for (size_t k = 0; k < b.lits.size(); ++k)
        if (k != j) res.lits.push_back(apply_subst(b.lits[k], s));
      std::sort(res.lits.begin(), res.lits.end());
      res.lits.erase(std::unique(res.lits.begin(), res.lits.end()), res.lits.end());
      bool tautology = false;
      for (const Lit& l : res.lits) {
        Lit flipped = l;
        flipped.positive = !l.positive;
        if (std::binary_search(res.lits.begin(), res.lits.end(), flipped)) {
          tautology = true;
          break;
        }
      }
      if (tautology) continue;
      ++sat.generated;
      sat.add(std::move(res), max_depth);
      if (sat.found_empty) return;
    }
  }
}

void factor_clause(const Clause& c, Saturation& sat, int max_depth) {
  for (size_t i = 0; i < c.lits.size(); ++i) {
    for (size_t j = i + 1; j < c.lits.size(); ++j) {
      if (c.lits[i].positive != c.lits[j].positive) continue;
      Subst s;
      if (!unify_lits(c.lits[i], c.lits[j], s)) continue;
      Clause res;
      res.depth = c.depth; // contraction, not a resolution step
      for (size_t k = 0; k < c.lits.size(); ++k)
        if (k != j) res.lits.push_back(apply_subst(c.lits[k], s));
      std::sort(res.lits.begin(), res.lits.end());
      res.lits.erase(std::unique(res.lits.begin(), res.lits.end()), res.lits.end());
      ++sat.generated;
      sat.add(std::move(res), max_depth);
      if (sat.found_empty) return;
    }
  }
}

// Predicates the goal needs in positive polarity.
void collect_positive_preds(const FormulaPtr& f, bool positive, std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      if (positive) out.insert(f->predicate);
      return;
    case FormulaKind::Not:
      collect_positive_preds(f->lhs, !positive, out);
      return;
    case FormulaKind::And:
      collect_positive_preds(f->lhs, positive, out);
      collect_positive_preds(f->rhs, positive, out);
      return;
    case FormulaKind::Implies:
      collect_positive_preds(f->lhs, !positive, out);
      collect_positive_preds(f->rhs, positive, out);
      return;
    case FormulaKind::ForAll:
    case FormulaKind::Exists:
      collect_positive_preds(f->lhs, positive, out);
      return;
  }
}

} // namespace

ProveResult internal_prove(const LogicTheory& theory, const ProofBudget& budget) {
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(budget.timeout);

  Clausifier clausifier;
  std::vector<Clause> input = clausifier.run(theory);

  Saturation sat;
  for (Clause& c : input) sat.add(std::move(c), budget.max_depth);

  bool timed_out = false;
  std::uint32_t iterations = 0;
  while (!sat.queue.empty() && !sat.found_empty) {
    if (sat.generated > Saturation::kMaxGenerated ||
        ((++iterations & 31u) == 0 && std::chrono::steady_clock::now() > deadline)) {
      timed_out = true;
      break;
    }
    Clause given = std::move(sat.queue.front());
    sat.queue.pop_front();
    bool redundant = false;
    for (const Clause& k : sat.kept)
      if (subsumes(k, given)) { redundant = true; break; }
    if (redundant) continue;

    factor_clause(given, sat, budget.max_depth);
    if (sat.found_empty) break;

    Clause renamed = rename_apart(given, sat.var_counter);
    for (const Clause& k : sat.kept) {
      resolve_pair(renamed, k, sat, budget.max_depth);
      if (sat.found_empty) break;
    }
    if (sat.found_empty) break;
    // self-resolution needs a renamed copy as the partner
    Clause renamed2 = rename_apart(given, sat.var_counter);
    resolve_pair(renamed, renamed2, sat, budget.max_depth);
    sat.kept.push_back(std::move(given));
  }

  ProveResult result;
  if (sat.found_empty) {
    result.outcome = ProveOutcome::Valid;
    result.diagnostics.push_back("goal follows from the axioms (empty clause derived)");
    return result;
  }
  if (timed_out || sat.depth_skipped) {
    result.outcome = ProveOutcome::DepthExhausted;
    result.diagnostics.push_back(timed_out ? "proof search budget exhausted (timeout)"
                                           : "proof search budget exhausted (depth limit)");
    return result;
  }

  result.outcome = ProveOutcome::Invalid;
  std::ostringstream diag;
  diag << "no proof found for goal " << render_formula(theory.goal) << " (search saturated, "
       << sat.kept.size() << " clauses kept)";
  result.diagnostics.push_back(diag.str());

  // Point refinement at goal predicates the axioms can never establish,
  // e.g. a missing bridging equivalence.
  std::set<std::string> established;
  try {
    Clausifier probe;
    for (const Clause& c : probe.run_axioms(theory.axioms))
      for (const Lit& l : c.lits)
        if (l.positive) established.insert(probe.pred_name(l.pred));
  } catch (const UnsupportedFormula&) {
  }
  std::set<std::string> needed;
  collect_positive_preds(theory.goal, true, needed);
  for (const std::string& name : needed)
    if (!established.count(name))
      result.diagnostics.push_back("predicate '" + name +
                                   "' in the goal is never established by any axiom");
  return result;
}

ProverVerdict InternalProver::check_theory(const LogicTheory& theory, const ProofBudget& budget) {
  auto started = std::chrono::steady_clock::now();
  ProverVerdict verdict;
  verdict.backend = ProverBackendKind::Internal;
  try {
    ProveResult result = internal_prove(theory, budget);
    verdict.syntax_ok = true;
    verdict.logic_ok = result.outcome == ProveOutcome::Valid;
    verdict.diagnostics = std::move(result.diagnostics);
    if (verdict.logic_ok) verdict.diagnostics.clear();
  } catch (const UnsupportedFormula& e) {
    verdict.syntax_ok = false;
    verdict.logic_ok = false;
    verdict.diagnostics.push_back(e.what());
  }
  verdict.elapsed = std::chrono::steady_clock::now() - started;
  return verdict;
}

ProverVerdict InternalProver::check_text(const std::string& lif_text, const ProofBudget& budget) {
  try {
    LogicTheory theory = parse_lif(lif_text);
    return check_theory(theory, budget);
  } catch (const LifSyntaxError& e) {
    ProverVerdict verdict;
    verdict.backend = ProverBackendKind::Internal;
    verdict.syntax_ok = false;
    verdict.logic_ok = false;
    verdict.diagnostics.push_back(std::string("syntax error: ") + e.what());
    return verdict;
  }
}

ProverVerdict check(const std::string& lif_text, const ProofBudget& budget,
                    ProverBackend& backend) {
  return backend.check_text(lif_text, budget);
}

} // namespace logicscore
