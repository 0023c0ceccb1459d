#pragma once

#include <memory>
#include <set>
#include <variant>
#include <vector>

#include "nomlet/permx.hpp"
#include "nomlet/signature.hpp"

namespace nomlet {

class Expr;
struct ExprNode;

enum class ExprKind { WLeaf, Susp, Lam, Fun, Letrec };

// Immutable expression tree shared by all language tiers:
//   ground LRL, LRLX (expression variables), LRLXA (atom variables),
//   LRLXAE (environment variables inside letrec).
// Permutations are always pushed down to the leaves on construction, so
// they occur only in W leaves, suspensions pi.X, binder positions, and
// suspended environment variables.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> p) : p_(std::move(p)) {}

  bool valid() const { return p_ != nullptr; }
  const ExprNode& node() const { return *p_; }
  ExprKind kind() const;
  size_t hash() const;

 private:
  std::shared_ptr<const ExprNode> p_;
};

struct Binding {
  W binder;
  Expr rhs;
};

struct SuspEnvVar {
  PermPtr perm;  // nullptr = identity
  EnvVar var;
};

using EnvItem = std::variant<Binding, SuspEnvVar>;

struct ExprNode {
  struct WLeaf {
    W w;
  };
  struct Susp {
    PermPtr perm;  // nullptr = identity
    ExprVar var;
  };
  struct Lam {
    W binder;
    Expr body;
  };
  struct Fun {
    FunSym sym;
    std::vector<Expr> args;
  };
  struct Letrec {
    std::vector<EnvItem> env;
    Expr body;
  };

  std::variant<WLeaf, Susp, Lam, Fun, Letrec> v;
  size_t hash;
};

// Constructors (normalizing).
Expr mk_wleaf(W w);
Expr mk_atom_leaf(Atom a);
Expr mk_avar_leaf(AtomVar a);
Expr mk_susp(PermPtr perm, ExprVar x);
Expr mk_var(ExprVar x);
Expr mk_lam(W binder, Expr body);
Expr mk_fun(FunSym sym, std::vector<Expr> args);
Expr mk_letrec(std::vector<EnvItem> env, Expr body);

const ExprNode::WLeaf& as_wleaf(const Expr& e);
const ExprNode::Susp& as_susp(const Expr& e);
const ExprNode::Lam& as_lam(const Expr& e);
const ExprNode::Fun& as_fun(const Expr& e);
const ExprNode::Letrec& as_letrec(const Expr& e);

// Total order; letrec environments compare as multisets (sorted first).
int cmp(const Expr& a, const Expr& b);
bool equal(const Expr& a, const Expr& b);
int env_item_cmp(const EnvItem& a, const EnvItem& b);

// Applies a permutation by pushing it to the leaves. The grammar is required
// only when compressed permutations are involved.
Expr apply_perm(const PermPtr& p, const Expr& e, PermGrammar* g = nullptr);
Expr apply_perm(const Perm& p, const Expr& e);

// Tier predicates.
bool is_ground(const Expr& e);        // no variables of any kind, no stuck perms
bool is_lrlx(const Expr& e);          // atoms + expression variables only
bool has_env_vars(const Expr& e);

// Free/bound/all atoms for ground expressions. On non-ground input, FA
// returns the atoms free in every ground instance (suspensions contribute
// nothing); binders must be plain atoms for BA.
AtomSet free_atoms(const Expr& e);
AtomSet bound_atoms(const Expr& e);
AtomSet all_atoms(const Expr& e);

// Every atom occurring syntactically, including inside permutations.
void collect_atoms(const Expr& e, const PermGrammar* g, AtomSet& out);
void collect_atom_vars(const Expr& e, const PermGrammar* g, std::set<AtomVar>& out);
void collect_expr_vars(const Expr& e, std::set<ExprVar>& out);
void collect_env_vars(const Expr& e, std::set<EnvVar>& out);
bool occurs(const Expr& e, ExprVar x);

// Substitutions (capture is not an issue: nominal substitution is literal).
Expr subst_var(const Expr& e, ExprVar x, const Expr& value, PermGrammar* g = nullptr);
Expr subst_atom_var(const Expr& e, AtomVar a, Atom b, PermGrammar* g = nullptr);

// Term-tree size with names counted as 1 and permutations ignored.
size_t size_counted(const Expr& e);
// Same, plus the sizes of all permutations.
size_t size_uncounted(const Expr& e, const PermGrammar* g = nullptr);

// tops(e): the top symbol used by clash detection; expressions with equal
// tops are potentially unifiable. Suspensions of variables have no tops.
struct Tops {
  enum class Tag { Atom, AtomVarish, Lam, Fun, Letrec } tag;
  uint32_t fun_id = 0;   // Fun
  size_t letrec_n = 0;   // Letrec: number of env items
  friend bool operator==(const Tops&, const Tops&) = default;
};
bool has_tops(const Expr& e);
Tops tops(const Expr& e);

}  // namespace nomlet
