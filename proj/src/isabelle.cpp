#include "logicscore/isabelle.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/util.hpp"

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace logicscore {

// ---------------------------------------------------------------------------
// document emission
// ---------------------------------------------------------------------------

namespace {

bool is_quant(const FormulaPtr& f) {
  return f->kind == FormulaKind::ForAll || f->kind == FormulaKind::Exists;
}

void render_hol(const FormulaPtr& f, std::string& out);

void render_hol_wrapped(const FormulaPtr& f, bool paren, std::string& out) {
  if (paren) {
    out += "(";
    render_hol(f, out);
    out += ")";
  } else {
    render_hol(f, out);
  }
}

void render_hol(const FormulaPtr& f, std::string& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      out += f->predicate;
      for (const Term& t : f->args) {
        out += " ";
        out += t.name;
      }
      return;
    case FormulaKind::Not:
      out += "\\<not> ";
      render_hol_wrapped(f->lhs, f->lhs->kind != FormulaKind::Atom, out);
      return;
    case FormulaKind::And: {
      bool lparen = f->lhs->kind == FormulaKind::Implies || f->lhs->kind == FormulaKind::And ||
                    is_quant(f->lhs);
      render_hol_wrapped(f->lhs, lparen, out);
      out += " \\<and> ";
      render_hol_wrapped(f->rhs, f->rhs->kind == FormulaKind::Implies || is_quant(f->rhs), out);
      return;
    }
    case FormulaKind::Implies: {
      render_hol_wrapped(f->lhs, f->lhs->kind == FormulaKind::Implies || is_quant(f->lhs), out);
      out += " \\<longrightarrow> ";
      render_hol(f->rhs, out);
      return;
    }
    case FormulaKind::ForAll:
    case FormulaKind::Exists:
      out += f->kind == FormulaKind::ForAll ? "\\<forall>" : "\\<exists>";
      out += f->var;
      out += ". ";
      render_hol(f->lhs, out);
      return;
  }
}

// Symbol table in first-occurrence order so emission is deterministic.
struct Signature {
  std::vector<std::pair<std::string, int>> predicates; // name, arity
  std::vector<std::string> constants;

  void scan(const FormulaPtr& f) {
    switch (f->kind) {
      case FormulaKind::Atom: {
        auto it = std::find_if(predicates.begin(), predicates.end(),
                               [&](const auto& p) { return p.first == f->predicate; });
        if (it == predicates.end())
          predicates.emplace_back(f->predicate, static_cast<int>(f->args.size()));
        for (const Term& t : f->args) {
          if (t.kind != TermKind::Constant) continue;
          if (std::find(constants.begin(), constants.end(), t.name) == constants.end())
            constants.push_back(t.name);
        }
        return;
      }
      case FormulaKind::Not:
        scan(f->lhs);
        return;
      case FormulaKind::And:
      case FormulaKind::Implies:
        scan(f->lhs);
        scan(f->rhs);
        return;
      case FormulaKind::ForAll:
      case FormulaKind::Exists:
        scan(f->lhs);
        return;
    }
  }
};

std::string expand_method(const std::string& method, const std::string& facts) {
  std::string out = method;
  for (;;) {
    size_t pos = out.find("{facts}");
    if (pos == std::string::npos) break;
    out.replace(pos, 7, facts);
  }
  return out;
}

} // namespace

std::string emit_isabelle(const LogicTheory& theory, const IsabelleTactics& tactics) {
  Signature sig;
  for (const FormulaPtr& a : theory.axioms) sig.scan(a);
  sig.scan(theory.goal);

  std::ostringstream out;
  out << "theory Step imports Main begin\n\n";
  out << "typedecl i\n\n";

  out << "axiomatization\n";
  bool first = true;
  for (const auto& [name, arity] : sig.predicates) {
    out << (first ? "  " : "  and ") << name << " :: \"";
    for (int k = 0; k < arity; ++k) out << "i \\<Rightarrow> ";
    out << "bool\"\n";
    first = false;
  }
  for (const std::string& name : sig.constants) {
    out << (first ? "  " : "  and ") << name << " :: \"i\"\n";
    first = false;
  }

  out << "where\n";
  std::string facts;
  for (size_t k = 0; k < theory.axioms.size(); ++k) {
    std::string body;
    render_hol(theory.axioms[k], body);
    out << "  A" << (k + 1) << ": \"" << body << "\"";
    out << (k + 1 < theory.axioms.size() ? " and\n" : "\n");
    if (k) facts += " ";
    facts += "A" + std::to_string(k + 1);
  }

  std::string goal;
  render_hol(theory.goal, goal);
  out << "\nlemma goal: \"" << goal << "\"\n";
  out << "  by (";
  for (size_t k = 0; k < tactics.methods.size(); ++k) {
    if (k) out << " | ";
    out << expand_method(tactics.methods[k], facts);
  }
  out << ")\n\nend\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// process handling
// ---------------------------------------------------------------------------

namespace {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output; // stdout and stderr interleaved
};

ProcessResult run_process(const std::vector<std::string>& argv,
                          std::chrono::duration<double> timeout) {
  int pipefd[2];
  if (pipe(pipefd) != 0) throw BackendUnavailable("pipe() failed");

  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    throw BackendUnavailable("fork() failed");
  }
  if (pid == 0) {
    dup2(pipefd[1], STDOUT_FILENO);
    dup2(pipefd[1], STDERR_FILENO);
    close(pipefd[0]);
    close(pipefd[1]);
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }

  close(pipefd[1]);
  ProcessResult result;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
  char buf[4096];
  for (;;) {
    auto remaining = deadline - std::chrono::steady_clock::now();
    int ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count());
    if (ms <= 0) {
      result.timed_out = true;
      kill(pid, SIGKILL);
      ms = 1000; // drain what is left
    }
    struct pollfd pfd{pipefd[0], POLLIN, 0};
    int rc = poll(&pfd, 1, ms);
    if (rc > 0) {
      ssize_t n = read(pipefd[0], buf, sizeof(buf));
      if (n > 0) {
        result.output.append(buf, static_cast<size_t>(n));
        continue;
      }
      break; // EOF
    }
    if (rc == 0 && result.timed_out) break;
    if (rc < 0 && errno != EINTR) break;
  }
  close(pipefd[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (result.timed_out) {
    result.exit_code = -1;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;
  }
  return result;
}

constexpr const char* kParseErrorMarkers[] = {
    "Outer syntax error", "Inner syntax error", "Inner lexical error",
    "Type unification failed", "Malformed", "Bad name", "Undefined type name",
    "Undefined constant", "Unknown constant",
};

constexpr const char* kProofErrorMarkers[] = {
    "Failed to finish proof", "Failed to apply", "empty result sequence",
    "Timeout", "Unfinished goals", "Failed to prove",
};

// Bounded count of concurrent external prover processes.
class ProcSemaphore {
public:
  void configure(int limit) {
    std::lock_guard<std::mutex> lock(mu_);
    limit_ = limit < 1 ? 1 : limit;
  }
  void acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return active_ < limit_; });
    ++active_;
  }
  void release() {
    std::lock_guard<std::mutex> lock(mu_);
    --active_;
    cv_.notify_one();
  }

private:
  std::mutex mu_;
  std::condition_variable cv_;
  int limit_ = 2;
  int active_ = 0;
};

ProcSemaphore g_isabelle_procs;

} // namespace

ProverVerdict classify_isabelle_output(int exit_code, bool timed_out, const std::string& output) {
  ProverVerdict verdict;
  verdict.backend = ProverBackendKind::Isabelle;

  std::vector<std::string> diags;
  for (const std::string& line : split_lines(output)) {
    if (line.rfind("*** ", 0) == 0) diags.push_back(line.substr(4));
  }

  if (timed_out) {
    verdict.syntax_ok = true;
    verdict.logic_ok = false;
    verdict.diagnostics = std::move(diags);
    verdict.diagnostics.push_back("timeout");
    return verdict;
  }

  if (exit_code == 0) {
    verdict.syntax_ok = true;
    verdict.logic_ok = true;
    return verdict;
  }

  auto contains_any = [&](const auto& markers) {
    for (const char* m : markers)
      if (output.find(m) != std::string::npos) return true;
    return false;
  };

  verdict.logic_ok = false;
  if (contains_any(kParseErrorMarkers)) {
    verdict.syntax_ok = false;
  } else if (contains_any(kProofErrorMarkers)) {
    verdict.syntax_ok = true;
  } else {
    // unclassifiable failure: fail closed as a proof failure and keep the
    // raw tail for the audit trail
    verdict.syntax_ok = true;
    if (diags.empty()) {
      std::string tail = output.size() > 400 ? output.substr(output.size() - 400) : output;
      diags.push_back("unclassified prover failure: " + tail);
    }
  }
  verdict.diagnostics = std::move(diags);
  if (verdict.diagnostics.empty()) verdict.diagnostics.push_back("prover reported failure");
  return verdict;
}

ProverVerdict isabelle_check(const std::string& theory_doc, const ProofBudget& budget,
                             const IsabelleConfig& config) {
  if (config.executable.empty() || !std::filesystem::exists(config.executable))
    throw BackendUnavailable("isabelle executable not found at '" +
                             config.executable.string() + "'");

  auto started = std::chrono::steady_clock::now();

  std::filesystem::path root = config.scratch_root.empty()
                                   ? std::filesystem::temp_directory_path()
                                   : config.scratch_root;
  std::filesystem::create_directories(root);
  char tmpl[4096];
  std::snprintf(tmpl, sizeof(tmpl), "%s/isa-XXXXXX", root.c_str());
  if (!mkdtemp(tmpl)) throw BackendUnavailable("cannot create scratch directory under " +
                                               root.string());
  std::filesystem::path session(tmpl);

  atomic_write_file(session / "Step.thy", theory_doc);
  std::ostringstream rootfile;
  rootfile << "session Step_Check = HOL +\n  theories\n    Step\n";
  atomic_write_file(session / "ROOT", rootfile.str());

  g_isabelle_procs.acquire();
  ProcessResult proc;
  try {
    proc = run_process({config.executable.string(), "build", "-D", session.string()},
                       budget.timeout);
  } catch (...) {
    g_isabelle_procs.release();
    std::filesystem::remove_all(session);
    throw;
  }
  g_isabelle_procs.release();
  std::filesystem::remove_all(session);

  if (proc.exit_code == 127 && !proc.timed_out)
    throw BackendUnavailable("isabelle executable failed to launch");

  ProverVerdict verdict = classify_isabelle_output(proc.exit_code, proc.timed_out, proc.output);
  verdict.elapsed = std::chrono::steady_clock::now() - started;
  return verdict;
}

IsabelleProver::IsabelleProver(IsabelleConfig config) : config_(std::move(config)) {
  g_isabelle_procs.configure(config_.max_procs);
}

ProverVerdict IsabelleProver::check_document(const std::string& theory_doc,
                                             const ProofBudget& budget) {
  return isabelle_check(theory_doc, budget, config_);
}

ProverVerdict IsabelleProver::check_text(const std::string& lif_text, const ProofBudget& budget) {
  LogicTheory theory;
  try {
    theory = parse_lif(lif_text);
  } catch (const LifSyntaxError& e) {
    ProverVerdict verdict;
    verdict.backend = ProverBackendKind::Isabelle;
    verdict.syntax_ok = false;
    verdict.logic_ok = false;
    verdict.diagnostics.push_back(std::string("syntax error: ") + e.what());
    return verdict;
  }
  return check_document(emit_isabelle(theory, config_.tactics), budget);
}

} // namespace logicscore
