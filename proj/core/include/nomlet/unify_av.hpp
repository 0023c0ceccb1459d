#pragma once

#include <memory>

#include "nomlet/grammar.hpp"
#include "nomlet/unify.hpp"

namespace nomlet {

// Threshold function p for the guided strategy: atom variables in the
// permutations of a fixpoint family are instantiated only once the family
// exceeds p(S) equations. Capped at S^2.
struct StrategyP {
  enum class Kind { NLogN, Quadratic, Constant } kind = Kind::NLogN;
  size_t constant_k = 4;

  double operator()(size_t s) const;
  static StrategyP parse(const std::string& name);  // nlogn | quadratic | constant:k
  std::string name() const;
};

struct AvOptions {
  bool collecting = false;
  size_t budget = 1000000;
  StrategyP p;
  bool record_trace = false;
};

struct AvStats {
  std::map<std::string, size_t> rule_counts;
  size_t states_explored = 0;
  size_t branch_points = 0;
  size_t max_rule_apps_per_branch = 0;
  size_t max_fixpoint_eqs_per_var = 0;
  size_t stuck_states = 0;
  size_t measure_violations = 0;     // 4-component lexicographic measure
  size_t elimab_bound_violations = 0;  // fixpoint family > p(S) after ElimAB
  size_t input_size_counted = 0;
  double p_of_s = 0;
  size_t grammar_size = 0;
};

struct AvResult {
  UnifyStatus status;
  std::vector<Unifier> unifiers;
  AvStats stats;
  std::shared_ptr<PermGrammar> grammar;  // owns the compressed permutations
};

// LetrecUnifyAVB(p) over LRLXA. Binder-distinctness constraints W_i # W_j
// are injected for every letrec in the input. Unifier freshness contexts are
// checked for satisfiability before a result is emitted.
AvResult letrec_unify_av(const UnifyProblemFile& problem, const AvOptions& opts = {});

}  // namespace nomlet
