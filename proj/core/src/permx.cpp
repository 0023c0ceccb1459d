#include "nomlet/permx.hpp"

#include <algorithm>
#include <cassert>

#include "nomlet/grammar.hpp"

namespace nomlet {

namespace {

bool sw_is_ground(const SwapW& s) {
  return !s.lhs.perm && !s.rhs.perm && is_atom(s.lhs.v) && is_atom(s.rhs.v);
}

std::vector<SwapW> to_swap_list(const PermPtr& p) {
  if (!p) return {};
  if (p->is_ground()) {
    std::vector<SwapW> out;
    for (auto& [a, b] : p->ground().to_swappings())
      out.push_back(SwapW{w_atom(a), w_atom(b)});
    return out;
  }
  if (auto* s = std::get_if<PermX::Swaps>(&p->rep())) return s->list;
  assert(false && "compressed permutation needs a grammar to expand");
  return {};
}

}  // namespace

PermPtr px_ground(Perm p) {
  if (p.is_identity()) return nullptr;
  return std::make_shared<const PermX>(PermX::Rep{std::move(p)});
}

PermPtr px_swaps(std::vector<SwapW> swaps) {
  if (swaps.empty()) return nullptr;
  if (std::all_of(swaps.begin(), swaps.end(), sw_is_ground)) {
    Perm p;
    for (const SwapW& s : swaps)
      p = compose(p, Perm::swap(w_as_atom(s.lhs), w_as_atom(s.rhs)));
    return px_ground(std::move(p));
  }
  return std::make_shared<const PermX>(PermX::Rep{PermX::Swaps{std::move(swaps)}});
}

PermPtr px_nt(NtId id, const PermGrammar& g) {
  if (g.is_ground(id)) return px_ground(g.eval_ground(id));
  return std::make_shared<const PermX>(PermX::Rep{PermX::Nt{id}});
}

PermPtr px_swap(W a, W b) { return px_swaps({SwapW{std::move(a), std::move(b)}}); }

bool px_is_ground(const PermPtr& p) {
  return !p || p->is_ground();
}

Perm px_eval_ground(const PermPtr& p, const PermGrammar* g) {
  if (!p) return Perm{};
  if (p->is_ground()) return p->ground();
  if (auto* nt = std::get_if<PermX::Nt>(&p->rep())) {
    assert(g);
    return g->eval_ground(nt->id);
  }
  assert(false && "permutation contains atom variables");
  return Perm{};
}

W mk_w(PermPtr perm, VarOrAtom v, const PermGrammar* g) {
  if (!perm) return W{nullptr, v};
  if (is_atom(v) && px_is_ground(perm))
    return W{nullptr, VarOrAtom{px_eval_ground(perm, g).apply(std::get<Atom>(v))}};
  return W{std::move(perm), v};
}

bool w_is_atom(const W& w) { return !w.perm && is_atom(w.v); }

Atom w_as_atom(const W& w) {
  assert(w_is_atom(w));
  return std::get<Atom>(w.v);
}

PermPtr px_compose(const PermPtr& p, const PermPtr& q, PermGrammar* g) {
  if (!p) return q;
  if (!q) return p;
  if (p->is_ground() && q->is_ground())
    return px_ground(compose(p->ground(), q->ground()));
  if (g) return px_nt(g->compose(g->intern(p), g->intern(q)), *g);
  std::vector<SwapW> list = to_swap_list(p);
  std::vector<SwapW> tail = to_swap_list(q);
  list.insert(list.end(), tail.begin(), tail.end());
  return px_swaps(std::move(list));
}

PermPtr px_inverse(const PermPtr& p, PermGrammar* g) {
  if (!p) return nullptr;
  if (p->is_ground()) return px_ground(p->ground().inverse());
  if (auto* nt = std::get_if<PermX::Nt>(&p->rep())) {
    assert(g);
    return px_nt(g->inverse(nt->id), *g);
  }
  // Swappings are self-inverse; reverse the composition order.
  auto list = std::get<PermX::Swaps>(p->rep()).list;
  std::reverse(list.begin(), list.end());
  return px_swaps(std::move(list));
}

void w_collect_atoms(const W& w, const PermGrammar* g, AtomSet& out) {
  if (is_atom(w.v)) out.insert(std::get<Atom>(w.v));
  px_collect_atoms(w.perm, g, out);
}

void w_collect_atom_vars(const W& w, const PermGrammar* g, std::set<AtomVar>& out) {
  if (!is_atom(w.v)) out.insert(std::get<AtomVar>(w.v));
  px_collect_atom_vars(w.perm, g, out);
}

void px_collect_atoms(const PermPtr& p, const PermGrammar* g, AtomSet& out) {
  if (!p) return;
  if (p->is_ground()) {
    for (auto& [a, b] : p->ground().pairs()) out.insert(a);
    return;
  }
  if (auto* s = std::get_if<PermX::Swaps>(&p->rep())) {
    for (const SwapW& sw : s->list) {
      w_collect_atoms(sw.lhs, g, out);
      w_collect_atoms(sw.rhs, g, out);
    }
    return;
  }
  assert(g);
  const AtomSet& atoms = g->atoms(std::get<PermX::Nt>(p->rep()).id);
  out.insert(atoms.begin(), atoms.end());
}

void px_collect_atom_vars(const PermPtr& p, const PermGrammar* g, std::set<AtomVar>& out) {
  if (!p || p->is_ground()) return;
  if (auto* s = std::get_if<PermX::Swaps>(&p->rep())) {
    for (const SwapW& sw : s->list) {
      w_collect_atom_vars(sw.lhs, g, out);
      w_collect_atom_vars(sw.rhs, g, out);
    }
    return;
  }
  assert(g);
  const auto& avars = g->atom_vars(std::get<PermX::Nt>(p->rep()).id);
  out.insert(avars.begin(), avars.end());
}

W w_subst_atom_var(const W& w, AtomVar a, Atom b, PermGrammar* g) {
  VarOrAtom v = w.v;
  if (!is_atom(v) && std::get<AtomVar>(v) == a) v = VarOrAtom{b};
  return mk_w(px_subst_atom_var(w.perm, a, b, g), v, g);
}

PermPtr px_subst_atom_var(const PermPtr& p, AtomVar a, Atom b, PermGrammar* g) {
  if (!p || p->is_ground()) return p;
  if (auto* s = std::get_if<PermX::Swaps>(&p->rep())) {
    std::vector<SwapW> list;
    list.reserve(s->list.size());
    for (const SwapW& sw : s->list)
      list.push_back(SwapW{w_subst_atom_var(sw.lhs, a, b, g),
                           w_subst_atom_var(sw.rhs, a, b, g)});
    return px_swaps(std::move(list));
  }
  assert(g);
  return px_nt(g->subst_atom_var(std::get<PermX::Nt>(p->rep()).id, a, b), *g);
}

size_t px_size(const PermPtr& p, const PermGrammar* g) {
  if (!p) return 0;
  if (p->is_ground()) {
    size_t d = p->ground().pairs().size();
    return d == 0 ? 0 : d - 1;
  }
  if (auto* s = std::get_if<PermX::Swaps>(&p->rep())) return s->list.size();
  assert(g);
  return g->dag_size(std::get<PermX::Nt>(p->rep()).id);
}

int w_cmp(const W& a, const W& b) {
  if (a.v.index() != b.v.index()) return a.v.index() < b.v.index() ? -1 : 1;
  uint32_t ia = is_atom(a.v) ? std::get<Atom>(a.v).id : std::get<AtomVar>(a.v).id;
  uint32_t ib = is_atom(b.v) ? std::get<Atom>(b.v).id : std::get<AtomVar>(b.v).id;
  if (ia != ib) {
    bool lt = is_atom(a.v) ? std::get<Atom>(a.v) < std::get<Atom>(b.v)
                           : std::get<AtomVar>(a.v) < std::get<AtomVar>(b.v);
    return lt ? -1 : 1;
  }
  return px_cmp(a.perm, b.perm);
}

bool w_equal(const W& a, const W& b) { return w_cmp(a, b) == 0; }

int px_cmp(const PermPtr& a, const PermPtr& b) {
  if (!a || !b) return (!a && !b) ? 0 : (!a ? -1 : 1);
  size_t ra = a->rep().index(), rb = b->rep().index();
  if (ra != rb) return ra < rb ? -1 : 1;
  if (a->is_ground()) {
    const auto& pa = a->ground().pairs();
    const auto& pb = b->ground().pairs();
    if (pa == pb) return 0;
    return pa < pb ? -1 : 1;
  }
  if (auto* sa = std::get_if<PermX::Swaps>(&a->rep())) {
    const auto& sb = std::get<PermX::Swaps>(b->rep());
    if (sa->list.size() != sb.list.size())
      return sa->list.size() < sb.list.size() ? -1 : 1;
    for (size_t i = 0; i < sa->list.size(); ++i) {
      if (int c = w_cmp(sa->list[i].lhs, sb.list[i].lhs)) return c;
      if (int c = w_cmp(sa->list[i].rhs, sb.list[i].rhs)) return c;
    }
    return 0;
  }
  NtId na = std::get<PermX::Nt>(a->rep()).id;
  NtId nb = std::get<PermX::Nt>(b->rep()).id;
  return na == nb ? 0 : (na < nb ? -1 : 1);
}

static void hash_combine(size_t& h, size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

size_t w_hash(const W& w) {
  size_t h = is_atom(w.v) ? 0x11u + std::get<Atom>(w.v).id
                          : 0x22u + std::get<AtomVar>(w.v).id;
  hash_combine(h, px_hash(w.perm));
  return h;
}

size_t px_hash(const PermPtr& p) {
  if (!p) return 0x5151;
  size_t h = 0x33 + p->rep().index();
  if (p->is_ground()) {
    for (auto& [a, b] : p->ground().pairs()) {
      hash_combine(h, a.id);
      hash_combine(h, b.id);
    }
    return h;
  }
  if (auto* s = std::get_if<PermX::Swaps>(&p->rep())) {
    for (const SwapW& sw : s->list) {
      hash_combine(h, w_hash(sw.lhs));
      hash_combine(h, w_hash(sw.rhs));
    }
    return h;
  }
  hash_combine(h, std::get<PermX::Nt>(p->rep()).id);
  return h;
}

}  // namespace nomlet
