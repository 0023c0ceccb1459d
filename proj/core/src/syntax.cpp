#include "nomlet/syntax.hpp"

#include <algorithm>
#include <cassert>

#include "nomlet/grammar.hpp"

namespace nomlet {

namespace {

bool valid_atom_name(std::string_view s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

bool valid_fun_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return s != "lam" && s != "letrec" && s != "perm";
}

bool valid_var_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
          c == '_' || c == '\''))
      return false;
  return true;
}

[[noreturn]] void fail(const SExpr& s, const std::string& msg) {
  throw ParseError(msg, s.line, s.col);
}

PermPtr parse_swaplist(const SExpr& s) {
  if (s.is_token()) fail(s, "expected a swapping list");
  std::vector<SwapW> swaps;
  for (const SExpr& item : s.list()) {
    if (item.is_token() || item.list().size() != 2) fail(item, "expected a swapping (w w)");
    swaps.push_back(SwapW{parse_w(item.list()[0]), parse_w(item.list()[1])});
  }
  return px_swaps(std::move(swaps));
}

}  // namespace

W parse_w(const SExpr& s) {
  if (s.is_token()) {
    const std::string& t = s.token();
    if (t.size() > 1 && t[0] == '@') {
      if (!valid_var_name(t.substr(1))) fail(s, "bad atom variable name");
      return w_avar(mk_atom_var(t.substr(1)));
    }
    if (!valid_atom_name(t)) fail(s, "expected an atom or @A");
    return w_atom(mk_atom(t));
  }
  const auto& list = s.list();
  if (list.size() == 3 && list[0].is_token() && list[0].token() == "perm") {
    PermPtr p = parse_swaplist(list[1]);
    W inner = parse_w(list[2]);
    return mk_w(px_compose(p, inner.perm, nullptr), inner.v, nullptr);
  }
  fail(s, "expected an atom, @A, or (perm (...) w)");
}

Expr parse_expr(const SExpr& s, Signature& sig) {
  if (s.is_token()) {
    const std::string& t = s.token();
    if (t.size() > 1 && t[0] == '?') {
      if (!valid_var_name(t.substr(1))) fail(s, "bad expression variable name");
      return mk_var(mk_expr_var(t.substr(1)));
    }
    if (t.size() > 1 && t[0] == '@') {
      if (!valid_var_name(t.substr(1))) fail(s, "bad atom variable name");
      return mk_avar_leaf(mk_atom_var(t.substr(1)));
    }
    if (!valid_atom_name(t)) fail(s, "unknown token '" + t + "'");
    return mk_atom_leaf(mk_atom(t));
  }
  const auto& list = s.list();
  if (list.empty()) fail(s, "empty list");
  if (!list[0].is_token()) fail(list[0], "expected a head symbol");
  const std::string& head = list[0].token();

  if (head == "lam") {
    if (list.size() != 3) fail(s, "lam needs a binder and a body");
    return mk_lam(parse_w(list[1]), parse_expr(list[2], sig));
  }
  if (head == "letrec") {
    if (list.size() != 3) fail(s, "letrec needs an environment and a body");
    if (list[1].is_token()) fail(list[1], "expected an environment list");
    std::vector<EnvItem> env;
    for (const SExpr& item : list[1].list()) {
      if (item.is_token()) {
        const std::string& t = item.token();
        if (t.size() > 1 && t[0] == '%' && valid_var_name(t.substr(1))) {
          env.push_back(SuspEnvVar{nullptr, mk_env_var(t.substr(1))});
          continue;
        }
        fail(item, "expected a binding (w e) or %E");
      }
      const auto& b = item.list();
      if (b.size() == 3 && b[0].is_token() && b[0].token() == "perm" && b[2].is_token() &&
          b[2].token().size() > 1 && b[2].token()[0] == '%') {
        env.push_back(SuspEnvVar{parse_swaplist(b[1]), mk_env_var(b[2].token().substr(1))});
        continue;
      }
      if (b.size() != 2) fail(item, "expected a binding (w e)");
      env.push_back(Binding{parse_w(b[0]), parse_expr(b[1], sig)});
    }
    return mk_letrec(std::move(env), parse_expr(list[2], sig));
  }
  if (head == "perm") {
    if (list.size() != 3) fail(s, "perm needs a swapping list and a target");
    PermPtr p = parse_swaplist(list[1]);
    return apply_perm(p, parse_expr(list[2], sig));
  }
  if (!valid_fun_name(head)) fail(list[0], "bad function symbol '" + head + "'");
  FunSym f = mk_fun(head);
  std::vector<Expr> args;
  for (size_t i = 1; i < list.size(); ++i) args.push_back(parse_expr(list[i], sig));
  if (!sig.declare(f, args.size()))
    fail(s, "function '" + head + "' used with inconsistent arity");
  return mk_fun(f, std::move(args));
}

Expr parse_expr_text(std::string_view text, Signature& sig) {
  return parse_expr(parse_sexpr(text), sig);
}

namespace {

SExpr tok(std::string t) { return SExpr{std::move(t)}; }

SExpr w_to_sexpr(const W& w, const PermGrammar* g);

SExpr swaplist_to_sexpr(const PermPtr& p, const PermGrammar* g) {
  std::vector<SwapW> swaps;
  if (p) {
    if (p->is_ground()) {
      for (auto& [a, b] : p->ground().to_swappings())
        swaps.push_back(SwapW{w_atom(a), w_atom(b)});
    } else if (auto* sw = std::get_if<PermX::Swaps>(&p->rep())) {
      swaps = sw->list;
    } else {
      assert(g && "printing a compressed permutation needs its grammar");
      swaps = g->expand(std::get<PermX::Nt>(p->rep()).id);
    }
  }
  std::vector<SExpr> items;
  for (const SwapW& s : swaps) {
    std::vector<SExpr> pair;
    pair.push_back(w_to_sexpr(s.lhs, g));
    pair.push_back(w_to_sexpr(s.rhs, g));
    items.push_back(SExpr{std::move(pair)});
  }
  return SExpr{std::move(items)};
}

SExpr wrap_perm(const PermPtr& p, SExpr target, const PermGrammar* g) {
  if (!p) return target;
  std::vector<SExpr> items;
  items.push_back(tok("perm"));
  items.push_back(swaplist_to_sexpr(p, g));
  items.push_back(std::move(target));
  return SExpr{std::move(items)};
}

SExpr w_to_sexpr(const W& w, const PermGrammar* g) {
  SExpr base = is_atom(w.v) ? tok(std::string(std::get<Atom>(w.v).name()))
                            : tok("@" + std::string(std::get<AtomVar>(w.v).name()));
  return wrap_perm(w.perm, std::move(base), g);
}

}  // namespace

SExpr expr_to_sexpr(const Expr& e, const PermGrammar* g) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return w_to_sexpr(as_wleaf(e).w, g);
    case ExprKind::Susp: {
      const auto& s = as_susp(e);
      return wrap_perm(s.perm, tok("?" + std::string(s.var.name())), g);
    }
    case ExprKind::Lam: {
      std::vector<SExpr> items;
      items.push_back(tok("lam"));
      items.push_back(w_to_sexpr(as_lam(e).binder, g));
      items.push_back(expr_to_sexpr(as_lam(e).body, g));
      return SExpr{std::move(items)};
    }
    case ExprKind::Fun: {
      const auto& f = as_fun(e);
      std::vector<SExpr> items;
      items.push_back(tok(std::string(f.sym.name())));
      for (const Expr& a : f.args) items.push_back(expr_to_sexpr(a, g));
      return SExpr{std::move(items)};
    }
    case ExprKind::Letrec: {
      const auto& l = as_letrec(e);
      // canonical (multiset) order for printing
      auto env = l.env;
      std::sort(env.begin(), env.end(),
                [](const EnvItem& x, const EnvItem& y) { return env_item_cmp(x, y) < 0; });
      std::vector<SExpr> items;
      items.push_back(tok("letrec"));
      std::vector<SExpr> envs;
      for (const EnvItem& item : env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          std::vector<SExpr> pair;
          pair.push_back(w_to_sexpr(b->binder, g));
          pair.push_back(expr_to_sexpr(b->rhs, g));
          envs.push_back(SExpr{std::move(pair)});
        } else {
          const auto& ev = std::get<SuspEnvVar>(item);
          envs.push_back(wrap_perm(ev.perm, tok("%" + std::string(ev.var.name())), g));
        }
      }
      items.push_back(SExpr{std::move(envs)});
      items.push_back(expr_to_sexpr(l.body, g));
      return SExpr{std::move(items)};
    }
  }
  return tok("?");
}

std::string print_expr(const Expr& e, const PermGrammar* g) {
  return sexpr_to_string(expr_to_sexpr(e, g));
}

std::string print_w(const W& w, const PermGrammar* g) {
  return sexpr_to_string(w_to_sexpr(w, g));
}

std::string print_perm_target(const PermPtr& p, const std::string& target, const PermGrammar* g) {
  return sexpr_to_string(wrap_perm(p, tok(target), g));
}

UnifyProblemFile parse_unify_problem(std::string_view text) {
  SExpr s = parse_sexpr(text);
  if (s.is_token() || s.list().empty() || !s.list()[0].is_token() ||
      s.list()[0].token() != "problem")
    throw ParseError("expected (problem ...)", s.line, s.col);
  UnifyProblemFile out;
  for (size_t i = 1; i < s.list().size(); ++i) {
    const SExpr& item = s.list()[i];
    if (item.is_token() || item.list().empty() || !item.list()[0].is_token())
      fail(item, "expected (eq e e) or (fresh w e)");
    const std::string& head = item.list()[0].token();
    if (head == "eq") {
      if (item.list().size() != 3) fail(item, "eq needs two expressions");
      out.equations.push_back({parse_expr(item.list()[1], out.sig),
                               parse_expr(item.list()[2], out.sig)});
    } else if (head == "fresh") {
      if (item.list().size() != 3) fail(item, "fresh needs a subject and an expression");
      out.freshness.push_back({parse_w(item.list()[1]), parse_expr(item.list()[2], out.sig)});
    } else {
      fail(item, "unknown problem item '" + head + "'");
    }
  }
  return out;
}

MatchProblemFile parse_match_problem(std::string_view text) {
  SExpr s = parse_sexpr(text);
  if (s.is_token() || s.list().empty() || !s.list()[0].is_token() ||
      s.list()[0].token() != "match")
    throw ParseError("expected (match ...)", s.line, s.col);
  MatchProblemFile out;
  for (size_t i = 1; i < s.list().size(); ++i) {
    const SExpr& item = s.list()[i];
    if (item.is_token() || item.list().size() != 3 || !item.list()[0].is_token() ||
        item.list()[0].token() != "le")
      fail(item, "expected (le pattern target)");
    out.equations.push_back({parse_expr(item.list()[1], out.sig),
                             parse_expr(item.list()[2], out.sig)});
  }
  return out;
}

std::string print_unify_problem(const UnifyProblemFile& p) {
  std::string out = "(problem";
  for (auto& [l, r] : p.equations)
    out += "\n  (eq " + print_expr(l) + " " + print_expr(r) + ")";
  for (auto& f : p.freshness)
    out += "\n  (fresh " + print_w(f.subject) + " " + print_expr(f.target) + ")";
  out += ")\n";
  return out;
}

std::string print_match_problem(const MatchProblemFile& p) {
  std::string out = "(match";
  for (auto& [l, r] : p.equations)
    out += "\n  (le " + print_expr(l) + " " + print_expr(r) + ")";
  out += ")\n";
  return out;
}

}  // namespace nomlet
