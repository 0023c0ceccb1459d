#include "nomlet/expr.hpp"

#include <algorithm>
#include <cassert>

#include "nomlet/grammar.hpp"

namespace nomlet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void hash_combine(size_t& h, size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

Expr make(std::variant<ExprNode::WLeaf, ExprNode::Susp, ExprNode::Lam,
                       ExprNode::Fun, ExprNode::Letrec>
              v,
          size_t hash) {
  auto node = std::make_shared<ExprNode>();
  node->v = std::move(v);
  node->hash = hash;
  return Expr(std::move(node));
}

size_t env_item_hash(const EnvItem& item) {
  return std::visit(overloaded{
                        [](const Binding& b) {
                          size_t h = 0xb1;
                          hash_combine(h, w_hash(b.binder));
                          hash_combine(h, b.rhs.hash());
                          return h;
                        },
                        [](const SuspEnvVar& ev) {
                          size_t h = 0xe5;
                          hash_combine(h, ev.var.id);
                          hash_combine(h, px_hash(ev.perm));
                          return h;
                        },
                    },
                    item);
}

}  // namespace

ExprKind Expr::kind() const {
  return static_cast<ExprKind>(p_->v.index());
}

size_t Expr::hash() const { return p_->hash; }

Expr mk_wleaf(W w) {
  size_t h = 0x01;
  hash_combine(h, w_hash(w));
  return make(ExprNode::WLeaf{std::move(w)}, h);
}

Expr mk_atom_leaf(Atom a) { return mk_wleaf(w_atom(a)); }
Expr mk_avar_leaf(AtomVar a) { return mk_wleaf(w_avar(a)); }

Expr mk_susp(PermPtr perm, ExprVar x) {
  size_t h = 0x02;
  hash_combine(h, x.id);
  hash_combine(h, px_hash(perm));
  return make(ExprNode::Susp{std::move(perm), x}, h);
}

Expr mk_var(ExprVar x) { return mk_susp(nullptr, x); }

Expr mk_lam(W binder, Expr body) {
  size_t h = 0x03;
  hash_combine(h, w_hash(binder));
  hash_combine(h, body.hash());
  return make(ExprNode::Lam{std::move(binder), std::move(body)}, h);
}

Expr mk_fun(FunSym sym, std::vector<Expr> args) {
  size_t h = 0x04;
  hash_combine(h, sym.id);
  for (const Expr& a : args) hash_combine(h, a.hash());
  return make(ExprNode::Fun{sym, std::move(args)}, h);
}

Expr mk_letrec(std::vector<EnvItem> env, Expr body) {
  size_t h = 0x05;
  size_t envh = 0;
  for (const EnvItem& item : env) envh += env_item_hash(item);  // multiset hash
  hash_combine(h, envh);
  hash_combine(h, body.hash());
  return make(ExprNode::Letrec{std::move(env), std::move(body)}, h);
}

const ExprNode::WLeaf& as_wleaf(const Expr& e) { return std::get<ExprNode::WLeaf>(e.node().v); }
const ExprNode::Susp& as_susp(const Expr& e) { return std::get<ExprNode::Susp>(e.node().v); }
const ExprNode::Lam& as_lam(const Expr& e) { return std::get<ExprNode::Lam>(e.node().v); }
const ExprNode::Fun& as_fun(const Expr& e) { return std::get<ExprNode::Fun>(e.node().v); }
const ExprNode::Letrec& as_letrec(const Expr& e) { return std::get<ExprNode::Letrec>(e.node().v); }

int env_item_cmp(const EnvItem& a, const EnvItem& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  if (auto* ba = std::get_if<Binding>(&a)) {
    const auto& bb = std::get<Binding>(b);
    if (int c = w_cmp(ba->binder, bb.binder)) return c;
    return cmp(ba->rhs, bb.rhs);
  }
  const auto& ea = std::get<SuspEnvVar>(a);
  const auto& eb = std::get<SuspEnvVar>(b);
  if (!(ea.var == eb.var)) {
    return shortlex_less(ea.var.name(), eb.var.name()) ? -1 : 1;
  }
  return px_cmp(ea.perm, eb.perm);
}

int cmp(const Expr& a, const Expr& b) {
  if (&a.node() == &b.node()) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case ExprKind::WLeaf:
      return w_cmp(as_wleaf(a).w, as_wleaf(b).w);
    case ExprKind::Susp: {
      const auto& sa = as_susp(a);
      const auto& sb = as_susp(b);
      if (!(sa.var == sb.var))
        return shortlex_less(sa.var.name(), sb.var.name()) ? -1 : 1;
      return px_cmp(sa.perm, sb.perm);
    }
    case ExprKind::Lam: {
      const auto& la = as_lam(a);
      const auto& lb = as_lam(b);
      if (int c = w_cmp(la.binder, lb.binder)) return c;
      return cmp(la.body, lb.body);
    }
    case ExprKind::Fun: {
      const auto& fa = as_fun(a);
      const auto& fb = as_fun(b);
      if (!(fa.sym == fb.sym))
        return shortlex_less(fa.sym.name(), fb.sym.name()) ? -1 : 1;
      if (fa.args.size() != fb.args.size())
        return fa.args.size() < fb.args.size() ? -1 : 1;
      for (size_t i = 0; i < fa.args.size(); ++i)
        if (int c = cmp(fa.args[i], fb.args[i])) return c;
      return 0;
    }
    case ExprKind::Letrec: {
      const auto& la = as_letrec(a);
      const auto& lb = as_letrec(b);
      if (la.env.size() != lb.env.size())
        return la.env.size() < lb.env.size() ? -1 : 1;
      // multiset comparison
      auto ea = la.env;
      auto eb = lb.env;
      auto less = [](const EnvItem& x, const EnvItem& y) { return env_item_cmp(x, y) < 0; };
      std::sort(ea.begin(), ea.end(), less);
      std::sort(eb.begin(), eb.end(), less);
      for (size_t i = 0; i < ea.size(); ++i)
        if (int c = env_item_cmp(ea[i], eb[i])) return c;
      return cmp(la.body, lb.body);
    }
  }
  return 0;
}

bool equal(const Expr& a, const Expr& b) {
  if (&a.node() == &b.node()) return true;
  if (a.hash() != b.hash()) return false;
  return cmp(a, b) == 0;
}

Expr apply_perm(const PermPtr& p, const Expr& e, PermGrammar* g) {
  if (!p) return e;
  switch (e.kind()) {
    case ExprKind::WLeaf: {
      const W& w = as_wleaf(e).w;
      return mk_wleaf(mk_w(px_compose(p, w.perm, g), w.v, g));
    }
    case ExprKind::Susp: {
      const auto& s = as_susp(e);
      return mk_susp(px_compose(p, s.perm, g), s.var);
    }
    case ExprKind::Lam: {
      const auto& l = as_lam(e);
      return mk_lam(mk_w(px_compose(p, l.binder.perm, g), l.binder.v, g),
                    apply_perm(p, l.body, g));
    }
    case ExprKind::Fun: {
      const auto& f = as_fun(e);
      std::vector<Expr> args;
      args.reserve(f.args.size());
      for (const Expr& a : f.args) args.push_back(apply_perm(p, a, g));
      return mk_fun(f.sym, std::move(args));
    }
    case ExprKind::Letrec: {
      const auto& l = as_letrec(e);
      std::vector<EnvItem> env;
      env.reserve(l.env.size());
      for (const EnvItem& item : l.env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          env.push_back(Binding{mk_w(px_compose(p, b->binder.perm, g), b->binder.v, g),
                                apply_perm(p, b->rhs, g)});
        } else {
          const auto& ev = std::get<SuspEnvVar>(item);
          env.push_back(SuspEnvVar{px_compose(p, ev.perm, g), ev.var});
        }
      }
      return mk_letrec(std::move(env), apply_perm(p, l.body, g));
    }
  }
  return e;
}

Expr apply_perm(const Perm& p, const Expr& e) {
  return apply_perm(px_ground(p), e, nullptr);
}

namespace {

struct TierFlags {
  bool susp = false;     // pi.X occurs
  bool avar = false;     // atom variable occurs as a W subject
  bool evar = false;
  bool stuck_w = false;  // W with a pending permutation
  bool nonground_susp_perm = false;
};

void scan_w(const W& w, TierFlags& f) {
  if (!is_atom(w.v)) f.avar = true;
  if (w.perm) f.stuck_w = true;  // normalized W: pending perm means stuck
}

void scan(const Expr& e, TierFlags& f) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      scan_w(as_wleaf(e).w, f);
      break;
    case ExprKind::Susp:
      f.susp = true;
      if (!px_is_ground(as_susp(e).perm)) f.nonground_susp_perm = true;
      break;
    case ExprKind::Lam:
      scan_w(as_lam(e).binder, f);
      scan(as_lam(e).body, f);
      break;
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) scan(a, f);
      break;
    case ExprKind::Letrec:
      for (const EnvItem& item : as_letrec(e).env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          scan_w(b->binder, f);
          scan(b->rhs, f);
        } else {
          f.evar = true;
        }
      }
      scan(as_letrec(e).body, f);
      break;
  }
}

}  // namespace

bool is_ground(const Expr& e) {
  TierFlags f;
  scan(e, f);
  return !f.susp && !f.avar && !f.evar && !f.stuck_w;
}

bool is_lrlx(const Expr& e) {
  TierFlags f;
  scan(e, f);
  return !f.avar && !f.evar && !f.stuck_w && !f.nonground_susp_perm;
}

bool has_env_vars(const Expr& e) {
  TierFlags f;
  scan(e, f);
  return f.evar;
}

namespace {

void free_atoms_into(const Expr& e, AtomSet& out) {
  switch (e.kind()) {
    case ExprKind::WLeaf: {
      const W& w = as_wleaf(e).w;
      if (w_is_atom(w)) out.insert(w_as_atom(w));
      break;
    }
    case ExprKind::Susp:
      break;
    case ExprKind::Lam: {
      const auto& l = as_lam(e);
      AtomSet body;
      free_atoms_into(l.body, body);
      if (w_is_atom(l.binder)) {
        body.erase(w_as_atom(l.binder));
        out.insert(body.begin(), body.end());
      }
      // A stuck binder may capture any atom of the body: contribute nothing.
      break;
    }
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) free_atoms_into(a, out);
      break;
    case ExprKind::Letrec: {
      const auto& l = as_letrec(e);
      AtomSet inner;
      bool stuck_binder = false;
      AtomSet binders;
      for (const EnvItem& item : l.env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          if (w_is_atom(b->binder))
            binders.insert(w_as_atom(b->binder));
          else
            stuck_binder = true;
          free_atoms_into(b->rhs, inner);
        }
        // An environment variable stands for unknown bindings; its binders
        // may capture anything, so be conservative.
        else
          stuck_binder = true;
      }
      free_atoms_into(l.body, inner);
      if (!stuck_binder) {
        for (Atom a : binders) inner.erase(a);
        out.insert(inner.begin(), inner.end());
      }
      break;
    }
  }
}

}  // namespace

AtomSet free_atoms(const Expr& e) {
  AtomSet out;
  free_atoms_into(e, out);
  return out;
}

AtomSet bound_atoms(const Expr& e) {
  AtomSet out;
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      break;
    case ExprKind::Lam: {
      const auto& l = as_lam(e);
      if (w_is_atom(l.binder)) out.insert(w_as_atom(l.binder));
      auto rest = bound_atoms(l.body);
      out.insert(rest.begin(), rest.end());
      break;
    }
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) {
        auto rest = bound_atoms(a);
        out.insert(rest.begin(), rest.end());
      }
      break;
    case ExprKind::Letrec: {
      const auto& l = as_letrec(e);
      for (const EnvItem& item : l.env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          if (w_is_atom(b->binder)) out.insert(w_as_atom(b->binder));
          auto rest = bound_atoms(b->rhs);
          out.insert(rest.begin(), rest.end());
        }
      }
      auto rest = bound_atoms(l.body);
      out.insert(rest.begin(), rest.end());
      break;
    }
  }
  return out;
}

AtomSet all_atoms(const Expr& e) {
  AtomSet out;
  collect_atoms(e, nullptr, out);
  return out;
}

void collect_atoms(const Expr& e, const PermGrammar* g, AtomSet& out) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      w_collect_atoms(as_wleaf(e).w, g, out);
      break;
    case ExprKind::Susp:
      px_collect_atoms(as_susp(e).perm, g, out);
      break;
    case ExprKind::Lam:
      w_collect_atoms(as_lam(e).binder, g, out);
      collect_atoms(as_lam(e).body, g, out);
      break;
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) collect_atoms(a, g, out);
      break;
    case ExprKind::Letrec:
      for (const EnvItem& item : as_letrec(e).env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          w_collect_atoms(b->binder, g, out);
          collect_atoms(b->rhs, g, out);
        } else {
          px_collect_atoms(std::get<SuspEnvVar>(item).perm, g, out);
        }
      }
      collect_atoms(as_letrec(e).body, g, out);
      break;
  }
}

void collect_atom_vars(const Expr& e, const PermGrammar* g, std::set<AtomVar>& out) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      w_collect_atom_vars(as_wleaf(e).w, g, out);
      break;
    case ExprKind::Susp:
      px_collect_atom_vars(as_susp(e).perm, g, out);
      break;
    case ExprKind::Lam:
      w_collect_atom_vars(as_lam(e).binder, g, out);
      collect_atom_vars(as_lam(e).body, g, out);
      break;
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) collect_atom_vars(a, g, out);
      break;
    case ExprKind::Letrec:
      for (const EnvItem& item : as_letrec(e).env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          w_collect_atom_vars(b->binder, g, out);
          collect_atom_vars(b->rhs, g, out);
        } else {
          px_collect_atom_vars(std::get<SuspEnvVar>(item).perm, g, out);
        }
      }
      collect_atom_vars(as_letrec(e).body, g, out);
      break;
  }
}

void collect_expr_vars(const Expr& e, std::set<ExprVar>& out) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      break;
    case ExprKind::Susp:
      out.insert(as_susp(e).var);
      break;
    case ExprKind::Lam:
      collect_expr_vars(as_lam(e).body, out);
      break;
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) collect_expr_vars(a, out);
      break;
    case ExprKind::Letrec:
      for (const EnvItem& item : as_letrec(e).env)
        if (auto* b = std::get_if<Binding>(&item)) collect_expr_vars(b->rhs, out);
      collect_expr_vars(as_letrec(e).body, out);
      break;
  }
}

void collect_env_vars(const Expr& e, std::set<EnvVar>& out) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      break;
    case ExprKind::Lam:
      collect_env_vars(as_lam(e).body, out);
      break;
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) collect_env_vars(a, out);
      break;
    case ExprKind::Letrec:
      for (const EnvItem& item : as_letrec(e).env) {
        if (auto* b = std::get_if<Binding>(&item))
          collect_env_vars(b->rhs, out);
        else
          out.insert(std::get<SuspEnvVar>(item).var);
      }
      collect_env_vars(as_letrec(e).body, out);
      break;
  }
}

bool occurs(const Expr& e, ExprVar x) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return false;
    case ExprKind::Susp:
      return as_susp(e).var == x;
    case ExprKind::Lam:
      return occurs(as_lam(e).body, x);
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args)
        if (occurs(a, x)) return true;
      return false;
    case ExprKind::Letrec:
      for (const EnvItem& item : as_letrec(e).env)
        if (auto* b = std::get_if<Binding>(&item))
          if (occurs(b->rhs, x)) return true;
      return occurs(as_letrec(e).body, x);
  }
  return false;
}

Expr subst_var(const Expr& e, ExprVar x, const Expr& value, PermGrammar* g) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return e;
    case ExprKind::Susp: {
      const auto& s = as_susp(e);
      if (!(s.var == x)) return e;
      return apply_perm(s.perm, value, g);
    }
    case ExprKind::Lam: {
      const auto& l = as_lam(e);
      return mk_lam(l.binder, subst_var(l.body, x, value, g));
    }
    case ExprKind::Fun: {
      const auto& f = as_fun(e);
      std::vector<Expr> args;
      args.reserve(f.args.size());
      for (const Expr& a : f.args) args.push_back(subst_var(a, x, value, g));
      return mk_fun(f.sym, std::move(args));
    }
    case ExprKind::Letrec: {
      const auto& l = as_letrec(e);
      std::vector<EnvItem> env;
      env.reserve(l.env.size());
      for (const EnvItem& item : l.env) {
        if (auto* b = std::get_if<Binding>(&item))
          env.push_back(Binding{b->binder, subst_var(b->rhs, x, value, g)});
        else
          env.push_back(item);
      }
      return mk_letrec(std::move(env), subst_var(l.body, x, value, g));
    }
  }
  return e;
}

Expr subst_atom_var(const Expr& e, AtomVar a, Atom b, PermGrammar* g) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return mk_wleaf(w_subst_atom_var(as_wleaf(e).w, a, b, g));
    case ExprKind::Susp: {
      const auto& s = as_susp(e);
      return mk_susp(px_subst_atom_var(s.perm, a, b, g), s.var);
    }
    case ExprKind::Lam: {
      const auto& l = as_lam(e);
      return mk_lam(w_subst_atom_var(l.binder, a, b, g), subst_atom_var(l.body, a, b, g));
    }
    case ExprKind::Fun: {
      const auto& f = as_fun(e);
      std::vector<Expr> args;
      args.reserve(f.args.size());
      for (const Expr& x : f.args) args.push_back(subst_atom_var(x, a, b, g));
      return mk_fun(f.sym, std::move(args));
    }
    case ExprKind::Letrec: {
      const auto& l = as_letrec(e);
      std::vector<EnvItem> env;
      env.reserve(l.env.size());
      for (const EnvItem& item : l.env) {
        if (auto* bd = std::get_if<Binding>(&item))
          env.push_back(Binding{w_subst_atom_var(bd->binder, a, b, g),
                                subst_atom_var(bd->rhs, a, b, g)});
        else {
          const auto& ev = std::get<SuspEnvVar>(item);
          env.push_back(SuspEnvVar{px_subst_atom_var(ev.perm, a, b, g), ev.var});
        }
      }
      return mk_letrec(std::move(env), subst_atom_var(l.body, a, b, g));
    }
  }
  return e;
}

size_t size_counted(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return 1;
    case ExprKind::Lam:
      return 2 + size_counted(as_lam(e).body);
    case ExprKind::Fun: {
      size_t s = 1;
      for (const Expr& a : as_fun(e).args) s += size_counted(a);
      return s;
    }
    case ExprKind::Letrec: {
      size_t s = 1;
      for (const EnvItem& item : as_letrec(e).env) {
        if (auto* b = std::get_if<Binding>(&item))
          s += 1 + size_counted(b->rhs);
        else
          s += 1;
      }
      return s + size_counted(as_letrec(e).body);
    }
  }
  return 1;
}

size_t size_uncounted(const Expr& e, const PermGrammar* g) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return 1 + px_size(as_wleaf(e).w.perm, g);
    case ExprKind::Susp:
      return 1 + px_size(as_susp(e).perm, g);
    case ExprKind::Lam:
      return 2 + px_size(as_lam(e).binder.perm, g) + size_uncounted(as_lam(e).body, g);
    case ExprKind::Fun: {
      size_t s = 1;
      for (const Expr& a : as_fun(e).args) s += size_uncounted(a, g);
      return s;
    }
    case ExprKind::Letrec: {
      size_t s = 1;
      for (const EnvItem& item : as_letrec(e).env) {
        if (auto* b = std::get_if<Binding>(&item))
          s += 1 + px_size(b->binder.perm, g) + size_uncounted(b->rhs, g);
        else
          s += 1 + px_size(std::get<SuspEnvVar>(item).perm, g);
      }
      return s + size_uncounted(as_letrec(e).body, g);
    }
  }
  return 1;
}

bool has_tops(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Susp:
      return false;
    case ExprKind::WLeaf:
      return w_is_atom(as_wleaf(e).w);
    default:
      return true;
  }
}

Tops tops(const Expr& e) {
  assert(has_tops(e));
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return Tops{Tops::Tag::Atom, w_as_atom(as_wleaf(e).w).id, 0};
    case ExprKind::Lam:
      return Tops{Tops::Tag::Lam, 0, 0};
    case ExprKind::Fun:
      return Tops{Tops::Tag::Fun, as_fun(e).sym.id, 0};
    case ExprKind::Letrec:
      return Tops{Tops::Tag::Letrec, 0, as_letrec(e).env.size()};
    default:
      return Tops{Tops::Tag::AtomVarish, 0, 0};
  }
}

}  // namespace nomlet
