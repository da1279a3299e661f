#include "logicscore/logic.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/util.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace logicscore {

FormulaPtr make_atom(std::string predicate, std::vector<Term> args) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Atom;
  f->predicate = std::move(predicate);
  f->args = std::move(args);
  return f;
}

FormulaPtr make_not(FormulaPtr inner) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Not;
  f->lhs = std::move(inner);
  return f;
}

FormulaPtr make_and(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::And;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr make_implies(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Implies;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

FormulaPtr make_forall(std::string var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::ForAll;
  f->var = std::move(var);
  f->lhs = std::move(body);
  return f;
}

FormulaPtr make_exists(std::string var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Exists;
  f->var = std::move(var);
  f->lhs = std::move(body);
  return f;
}

Term constant(std::string name) { return Term{TermKind::Constant, std::move(name)}; }
Term variable(std::string name) { return Term{TermKind::Variable, std::move(name)}; }

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::Atom:
      return a->predicate == b->predicate && a->args == b->args;
    case FormulaKind::Not:
      return formula_equal(a->lhs, b->lhs);
    case FormulaKind::And:
    case FormulaKind::Implies:
      return formula_equal(a->lhs, b->lhs) && formula_equal(a->rhs, b->rhs);
    case FormulaKind::ForAll:
    case FormulaKind::Exists:
      return a->var == b->var && formula_equal(a->lhs, b->lhs);
  }
  return false;
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum Kind { Ident, Arrow, Amp, Tilde, LParen, RParen, Comma, Dot, End } kind;
  std::string text;
  int col = 0; // 1-based column in the source line
};

class LineLexer {
public:
  LineLexer(const std::string& line, int lineno, int col_offset)
      : line_(line), lineno_(lineno), pos_(static_cast<size_t>(col_offset)) {}

  Token next() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    int col = static_cast<int>(pos_) + 1;
    if (pos_ >= line_.size()) return Token{Token::End, "", col};
    char c = line_[pos_];
    switch (c) {
      case '&': ++pos_; return Token{Token::Amp, "&", col};
      case '~': ++pos_; return Token{Token::Tilde, "~", col};
      case '(': ++pos_; return Token{Token::LParen, "(", col};
      case ')': ++pos_; return Token{Token::RParen, ")", col};
      case ',': ++pos_; return Token{Token::Comma, ",", col};
      case '.': ++pos_; return Token{Token::Dot, ".", col};
      case '-':
        if (pos_ + 1 < line_.size() && line_[pos_ + 1] == '>') {
          pos_ += 2;
          return Token{Token::Arrow, "->", col};
        }
        fail(col, "stray '-' (expected '->')");
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < line_.size() &&
             (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_'))
        ++pos_;
      return Token{Token::Ident, line_.substr(start, pos_ - start), col};
    }
    fail(col, std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] void fail(int col, const std::string& msg) const {
    throw LifSyntaxError(lineno_, col, msg);
  }

  int lineno() const { return lineno_; }

private:
  const std::string& line_;
  int lineno_;
  size_t pos_;
};

class FormulaParser {
public:
  FormulaParser(LineLexer lexer, std::map<std::string, int>& arities)
      : lexer_(std::move(lexer)), arities_(arities) {
    advance();
  }

  FormulaPtr parse_complete() {
    FormulaPtr f = parse_formula();
    expect(Token::End, "trailing input after formula");
    return f;
  }

private:
  void advance() { tok_ = lexer_.next(); }

  void expect(Token::Kind kind, const std::string& msg) {
    if (tok_.kind != kind) lexer_.fail(tok_.col, msg);
  }

  [[noreturn]] void fail(const std::string& msg) { lexer_.fail(tok_.col, msg); }

  FormulaPtr parse_formula() {
    if (tok_.kind == Token::Ident && (tok_.text == "forall" || tok_.text == "exists")) {
      bool is_forall = tok_.text == "forall";
      advance();
      if (tok_.kind != Token::Ident) fail("expected a variable after quantifier");
      std::string var = tok_.text;
      if (!std::isupper(static_cast<unsigned char>(var[0])))
        fail("quantified variable must start uppercase");
      int var_col = tok_.col;
      advance();
      expect(Token::Dot, "expected '.' after quantified variable");
      advance();
      bound_.push_back(var);
      FormulaPtr body = parse_formula();
      bound_.pop_back();
      (void)var_col;
      return is_forall ? make_forall(var, std::move(body)) : make_exists(var, std::move(body));
    }
    return parse_implication();
  }

  FormulaPtr parse_implication() {
    FormulaPtr lhs = parse_conjunct();
    if (tok_.kind == Token::Arrow) {
      advance();
      FormulaPtr rhs = parse_formula(); // right-associative
      return make_implies(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_conjunct() {
    FormulaPtr f = parse_unary();
    while (tok_.kind == Token::Amp) {
      advance();
      f = make_and(std::move(f), parse_unary());
    }
    return f;
  }

  FormulaPtr parse_unary() {
    if (tok_.kind == Token::Tilde) {
      advance();
      return make_not(parse_unary_base());
    }
    return parse_unary_base();
  }

  FormulaPtr parse_unary_base() {
    if (tok_.kind == Token::LParen) {
      advance();
      FormulaPtr f = parse_formula();
      expect(Token::RParen, "missing ')'");
      advance();
      return f;
    }
    return parse_atom();
  }

  FormulaPtr parse_atom() {
    if (tok_.kind != Token::Ident) fail("expected a predicate");
    if (tok_.text == "forall" || tok_.text == "exists")
      fail("quantifier not allowed here; parenthesize it");
    std::string pred = tok_.text;
    int pred_col = tok_.col;
    if (!std::islower(static_cast<unsigned char>(pred[0])))
      fail("predicate '" + pred + "' must start lowercase");
    advance();
    expect(Token::LParen, "expected '(' after predicate");
    advance();
    std::vector<Term> args;
    for (;;) {
      args.push_back(parse_term());
      if (tok_.kind == Token::Comma) {
        advance();
        continue;
      }
      break;
    }
    expect(Token::RParen, "missing ')' in atom");
    advance();

    auto [it, inserted] = arities_.emplace(pred, static_cast<int>(args.size()));
    if (!inserted && it->second != static_cast<int>(args.size()))
      throw LifSyntaxError(lexer_.lineno(), pred_col,
                           "predicate '" + pred + "' used with arity " +
                               std::to_string(args.size()) + " but earlier arity " +
                               std::to_string(it->second));
    return make_atom(std::move(pred), std::move(args));
  }

  Term parse_term() {
    if (tok_.kind != Token::Ident) fail("expected a term");
    std::string name = tok_.text;
    char first = name[0];
    Term t;
    if (std::isupper(static_cast<unsigned char>(first))) {
      bool in_scope = false;
      for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
        if (*it == name) { in_scope = true; break; }
      if (!in_scope) fail("unbound variable '" + name + "'");
      t = variable(name);
    } else if (std::islower(static_cast<unsigned char>(first))) {
      t = constant(name);
    } else {
      fail("term '" + name + "' must start with a letter");
    }
    advance();
    return t;
  }

  LineLexer lexer_;
  Token tok_;
  std::map<std::string, int>& arities_;
  std::vector<std::string> bound_;
};

} // namespace

LogicTheory parse_lif(const std::string& text) {
  LogicTheory theory;
  std::map<std::string, int> arities;
  bool goal_seen = false;
  int lineno = 0;
  int goal_line = 0;

  for (const std::string& raw : split_lines(text)) {
    ++lineno;
    std::string line = raw;
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue; // blank lines are ignored
    if (goal_seen)
      throw LifSyntaxError(lineno, static_cast<int>(first) + 1,
                           "content after the goal line");

    int body_offset = 0;
    bool is_axiom = false;
    if (line.compare(first, 6, "axiom:") == 0) {
      is_axiom = true;
      body_offset = static_cast<int>(first) + 6;
    } else if (line.compare(first, 5, "goal:") == 0) {
      body_offset = static_cast<int>(first) + 5;
    } else {
      throw LifSyntaxError(lineno, static_cast<int>(first) + 1,
                           "expected 'axiom:' or 'goal:'");
    }

    FormulaParser parser(LineLexer(line, lineno, body_offset), arities);
    FormulaPtr f = parser.parse_complete();
    if (is_axiom) {
      theory.axioms.push_back(std::move(f));
      theory.axiom_provenance.emplace_back();
    } else {
      theory.goal = std::move(f);
      goal_seen = true;
      goal_line = lineno;
    }
  }

  if (!goal_seen) throw LifSyntaxError(lineno == 0 ? 1 : lineno, 1, "missing goal line");
  if (theory.axioms.empty())
    throw LifSyntaxError(goal_line, 1, "a theory requires at least one axiom line");
  return theory;
}

// ---------------------------------------------------------------------------
// renderer
// ---------------------------------------------------------------------------

namespace {

bool is_quantifier(const FormulaPtr& f) {
  return f->kind == FormulaKind::ForAll || f->kind == FormulaKind::Exists;
}

void render(const FormulaPtr& f, std::string& out);

// Wraps in parentheses when the child cannot appear bare at the host's
// grammar level, so re-parsing reproduces the same tree.
void render_wrapped(const FormulaPtr& f, bool needs_paren, std::string& out) {
  if (needs_paren) {
    out += "(";
    render(f, out);
    out += ")";
  } else {
    render(f, out);
  }
}

void render(const FormulaPtr& f, std::string& out) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      out += f->predicate;
      out += "(";
      for (size_t i = 0; i < f->args.size(); ++i) {
        if (i) out += ", ";
        out += f->args[i].name;
      }
      out += ")";
      return;
    }
    case FormulaKind::Not:
      out += "~";
      render_wrapped(f->lhs, f->lhs->kind != FormulaKind::Atom, out);
      return;
    case FormulaKind::And: {
      // left spine flattens naturally; anything else on the left needs parens
      bool lparen = f->lhs->kind == FormulaKind::Implies || is_quantifier(f->lhs);
      render_wrapped(f->lhs, lparen, out);
      out += " & ";
      bool rparen = f->rhs->kind == FormulaKind::And ||
                    f->rhs->kind == FormulaKind::Implies || is_quantifier(f->rhs);
      render_wrapped(f->rhs, rparen, out);
      return;
    }
    case FormulaKind::Implies: {
      bool lparen = f->lhs->kind == FormulaKind::Implies || is_quantifier(f->lhs);
      render_wrapped(f->lhs, lparen, out);
      out += " -> ";
      render(f->rhs, out); // right-associative, quantifiers legal here
      return;
    }
    case FormulaKind::ForAll:
    case FormulaKind::Exists:
      out += f->kind == FormulaKind::ForAll ? "forall " : "exists ";
      out += f->var;
      out += ". ";
      render(f->lhs, out);
      return;
  }
}

} // namespace

std::string render_formula(const FormulaPtr& f) {
  std::string out;
  render(f, out);
  return out;
}

std::string render_lif(const LogicTheory& theory) {
  std::ostringstream out;
  for (const FormulaPtr& axiom : theory.axioms) out << "axiom: " << render_formula(axiom) << "\n";
  out << "goal: " << render_formula(theory.goal) << "\n";
  return out.str();
}

} // namespace logicscore
