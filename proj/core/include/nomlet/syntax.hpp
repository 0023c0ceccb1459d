#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nomlet/expr.hpp"
#include "nomlet/sexpr.hpp"

namespace nomlet {

// Textual syntax, shared by every tier:
//   atoms        lowercase identifier:  a  b1  xs
//   expr vars    ?X
//   atom vars    @A
//   env vars     %E (inside letrec environments)
//   (lam <w> <e>)
//   (letrec ((<w> <e>) ... %E ...) <e>)
//   (<fname> <e> ...)              function application, arity inferred
//   (perm ((<w> <w>) ...) <t>)     swappings in function-composition order
//                                  (the last pair of the list acts first)
// Reserved head tokens: lam, letrec, perm.

Expr parse_expr(const SExpr& s, Signature& sig);
Expr parse_expr_text(std::string_view text, Signature& sig);
W parse_w(const SExpr& s);

std::string print_expr(const Expr& e, const PermGrammar* g = nullptr);
std::string print_w(const W& w, const PermGrammar* g = nullptr);
std::string print_perm_target(const PermPtr& p, const std::string& target,
                              const PermGrammar* g = nullptr);
SExpr expr_to_sexpr(const Expr& e, const PermGrammar* g = nullptr);

struct FreshnessIn {
  W subject;
  Expr target;
};

// (problem (eq <e> <e>)* (fresh <w> <e>)*)
struct UnifyProblemFile {
  std::vector<std::pair<Expr, Expr>> equations;
  std::vector<FreshnessIn> freshness;
  Signature sig;
};

// (match (le <pattern> <target>)*)
struct MatchProblemFile {
  std::vector<std::pair<Expr, Expr>> equations;
  Signature sig;
};

UnifyProblemFile parse_unify_problem(std::string_view text);
MatchProblemFile parse_match_problem(std::string_view text);

std::string print_unify_problem(const UnifyProblemFile& p);
std::string print_match_problem(const MatchProblemFile& p);

}  // namespace nomlet
