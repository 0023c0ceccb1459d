#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nomlet/alpha.hpp"
#include "nomlet/freshness.hpp"
#include "nomlet/syntax.hpp"

namespace nomlet {

// Equations are symmetric; they are stored with a variable suspension on the
// left whenever one side is a suspension.
struct Equation {
  Expr lhs, rhs;
};

struct Assignment {
  ExprVar var;
  Expr value;
};

// (#Var, #LrLamFA, #Eqs[, #EqsNonVar]) - lexicographic termination measure.
struct MeasureSnapshot {
  size_t num_var = 0;
  size_t num_lr_lam_fa = 0;
  size_t num_eqs = 0;
  size_t num_eqs_nonvar = 0;

  friend bool operator==(const MeasureSnapshot&, const MeasureSnapshot&) = default;
  bool lex_less_3(const MeasureSnapshot& o) const;
  bool lex_less_4(const MeasureSnapshot& o) const;
};

struct TraceNode {
  MeasureSnapshot measure;
  std::string rule;
  std::shared_ptr<const TraceNode> parent;
};

struct UnifStats {
  std::map<std::string, size_t> rule_counts;
  size_t states_explored = 0;
  size_t branch_points = 0;
  size_t max_rule_apps_per_branch = 0;
  size_t max_fixpoint_eqs_per_var = 0;
  size_t measure_violations = 0;
  size_t input_size_counted = 0;
  size_t input_size_uncounted = 0;
  std::vector<std::pair<std::string, MeasureSnapshot>> measure_trace;  // success path
};

// Output triple: substitution chain, atomic freshness context, and the
// remaining fixpoint equations. Atom-variable assignments (from the guessing
// rule of the atom-variable algorithm) are listed separately.
struct Unifier {
  std::vector<Assignment> theta;
  std::vector<std::pair<AtomVar, Atom>> atom_theta;
  FreshnessContext nabla;
  std::vector<Equation> fixpoints;
};

struct UnifState {
  std::vector<Equation> eqs;
  FreshnessContext nabla;
  std::vector<Assignment> theta;
  size_t rule_apps = 0;
  std::shared_ptr<const TraceNode> trace;
};

struct UnifyOptions {
  bool collecting = false;
  bool garbage_free = false;  // replaces (FPS)/(ElimFP) with (FPS2)/(ElimX)
  bool elim_fp = true;        // disable to observe the fixpoint blow-up
  size_t budget = 1000000;    // maximum states entered
  bool record_trace = false;
};

enum class UnifyStatus { Sat, Unsat, Overflow };

struct UnifyResult {
  UnifyStatus status;
  std::vector<Unifier> unifiers;
  UnifStats stats;
};

// One branch produced by the letrec decomposition, with the chosen binding
// permutation rho (pattern slot i paired with slot rho[i] of the other side)
// and the don't-care atom permutation extending it.
struct StepBranch {
  UnifState state;
  std::vector<size_t> rho;
  Perm pi;
};

struct StepResult {
  enum class Kind { Next, Branches, Fail, Done, Stuck } kind;
  std::string rule;
  std::string fail_reason;
  UnifState next;                   // Kind::Next
  std::vector<StepBranch> branches; // Kind::Branches
  Unifier unifier;                  // Kind::Done
};

// Flattening: every non-variable position of depth > 1 is replaced by a
// fresh variable with a defining equation.
std::vector<Equation> flatten(std::vector<Equation> eqs, FreshVars& fresh);

// Applies the highest-priority applicable rule.
StepResult step(const UnifState& s, const UnifyOptions& opts);

UnifState initial_state(const UnifyProblemFile& problem, FreshVars& fresh,
                        const UnifyOptions& opts);

UnifyResult letrec_unify(const UnifyProblemFile& problem, const UnifyOptions& opts = {});

MeasureSnapshot measure_of_eqs(const std::vector<Equation>& eqs);

// Fully expands an assignment chain value (DAG-compressed substitution).
Expr expand_theta(const std::vector<Assignment>& theta, const Expr& e);
std::map<ExprVar, Expr> theta_as_map(const std::vector<Assignment>& theta,
                                     const std::set<ExprVar>& vars);

std::string print_unifier(const Unifier& u, const PermGrammar* g = nullptr);
std::string print_stats(const UnifStats& s);

// Helpers shared with the matching algorithms.
bool is_var_susp(const Expr& e);
bool is_fixpoint_eq(const Equation& eq);

}  // namespace nomlet
