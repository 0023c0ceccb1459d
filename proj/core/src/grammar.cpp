#include "nomlet/grammar.hpp"

#include <cassert>

namespace nomlet {

PermGrammar::PermGrammar() {
  // Nonterminal 0 is the identity, its own inverse.
  add({Sym{Empty{}}});
  rules_[0].inv = 0;
}

NtId PermGrammar::add(std::vector<Sym> rhs) {
  Rule r;
  r.rhs = std::move(rhs);
  r.inv = 0;
  for (const Sym& s : r.rhs) {
    if (auto* sw = std::get_if<SwapW>(&s)) {
      w_collect_atoms(sw->lhs, this, r.atoms);
      w_collect_atoms(sw->rhs, this, r.atoms);
      w_collect_atom_vars(sw->lhs, this, r.avars);
      w_collect_atom_vars(sw->rhs, this, r.avars);
    } else if (auto* nt = std::get_if<NtId>(&s)) {
      assert(*nt < rules_.size());
      r.atoms.insert(rules_[*nt].atoms.begin(), rules_[*nt].atoms.end());
      r.avars.insert(rules_[*nt].avars.begin(), rules_[*nt].avars.end());
    }
  }
  r.ground = r.avars.empty();
  rules_.push_back(std::move(r));
  return static_cast<NtId>(rules_.size() - 1);
}

void PermGrammar::link_inverses(NtId p, NtId q) {
  rules_[p].inv = q;
  rules_[q].inv = p;
}

NtId PermGrammar::swap_nt(SwapW s) {
  NtId p = add({Sym{std::move(s)}});
  rules_[p].inv = p;  // swappings are self-inverse
  return p;
}

NtId PermGrammar::compose(NtId p, NtId q) {
  if (p == empty()) return q;
  if (q == empty()) return p;
  NtId r = add({Sym{p}, Sym{q}});
  NtId rinv = add({Sym{inverse(q)}, Sym{inverse(p)}});
  link_inverses(r, rinv);
  return r;
}

NtId PermGrammar::intern(const PermPtr& p) {
  if (!p) return empty();
  if (auto* nt = std::get_if<PermX::Nt>(&p->rep())) return nt->id;
  std::vector<SwapW> list;
  if (p->is_ground()) {
    for (auto& [a, b] : p->ground().to_swappings())
      list.push_back(SwapW{w_atom(a), w_atom(b)});
  } else {
    list = std::get<PermX::Swaps>(p->rep()).list;
  }
  if (list.empty()) return empty();
  // right fold keeps function-composition order: val = s1 . (s2 . (...))
  NtId acc = swap_nt(list.back());
  for (auto it = std::next(list.rbegin()); it != list.rend(); ++it)
    acc = compose(swap_nt(*it), acc);
  return acc;
}

const Perm& PermGrammar::eval_ground(NtId p) const {
  const Rule& r = rules_[p];
  assert(r.ground);
  if (r.eval) return *r.eval;
  Perm val;
  for (const Sym& s : r.rhs) {
    if (std::holds_alternative<Empty>(s)) continue;
    if (auto* sw = std::get_if<SwapW>(&s)) {
      val = nomlet::compose(val, Perm::swap(w_as_atom(sw->lhs), w_as_atom(sw->rhs)));
    } else {
      val = nomlet::compose(val, eval_ground(std::get<NtId>(s)));
    }
  }
  r.eval = std::move(val);
  return *r.eval;
}

NtId PermGrammar::subst_atom_var(NtId p, AtomVar a, Atom b) {
  std::map<NtId, NtId> memo;
  auto go = [&](auto&& self, NtId n) -> NtId {
    if (!rules_[n].avars.count(a)) return n;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    std::vector<Sym> rhs;
    rhs.reserve(rules_[n].rhs.size());
    for (const Sym& s : rules_[n].rhs) {
      if (std::holds_alternative<Empty>(s)) {
        rhs.push_back(s);
      } else if (auto* sw = std::get_if<SwapW>(&s)) {
        rhs.push_back(Sym{SwapW{w_subst_atom_var(sw->lhs, a, b, this),
                                w_subst_atom_var(sw->rhs, a, b, this)}});
      } else {
        rhs.push_back(Sym{self(self, std::get<NtId>(s))});
      }
    }
    NtId inv_n = inverse(n);
    if (inv_n == n) {
      NtId q = add(std::move(rhs));
      rules_[q].inv = q;
      memo[n] = q;
      return q;
    }
    std::vector<Sym> inv_rhs(rhs.rbegin(), rhs.rend());
    for (Sym& s : inv_rhs)
      if (auto* nt = std::get_if<NtId>(&s)) *nt = inverse(*nt);
    NtId q = add(std::move(rhs));
    NtId qinv = add(std::move(inv_rhs));
    link_inverses(q, qinv);
    memo[n] = q;
    memo[inv_n] = qinv;
    return q;
  };
  return go(go, p);
}

std::vector<SwapW> PermGrammar::expand(NtId p) const {
  std::vector<SwapW> out;
  auto go = [&](auto&& self, NtId n) -> void {
    for (const Sym& s : rules_[n].rhs) {
      if (std::holds_alternative<Empty>(s)) continue;
      if (auto* sw = std::get_if<SwapW>(&s))
        out.push_back(*sw);
      else
        self(self, std::get<NtId>(s));
    }
  };
  go(go, p);
  return out;
}

size_t PermGrammar::dag_size(NtId p) const {
  std::set<NtId> seen;
  size_t terms = 0;
  auto go = [&](auto&& self, NtId n) -> void {
    if (!seen.insert(n).second) return;
    for (const Sym& s : rules_[n].rhs) {
      if (std::holds_alternative<SwapW>(s))
        ++terms;
      else if (auto* nt = std::get_if<NtId>(&s))
        self(self, *nt);
    }
  };
  go(go, p);
  return seen.size() + terms;
}

}  // namespace nomlet
