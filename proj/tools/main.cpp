// Command-line front end: parses problem files, dispatches to the
// unification and matching algorithms, and emits line-oriented s-expression
// records that can be re-parsed and re-verified.
//
// Exit codes: 0 solvable/true, 1 unsolvable/false, 2 input error,
//             3 branch budget exceeded, 5 oracle cross-check disagreement.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nomlet/alpha.hpp"
#include "nomlet/env_match.hpp"
#include "nomlet/match.hpp"
#include "nomlet/oracle.hpp"
#include "nomlet/syntax.hpp"
#include "nomlet/unify.hpp"
#include "nomlet/unify_av.hpp"

using namespace nomlet;

namespace {

constexpr int kExitSat = 0;
constexpr int kExitUnsat = 1;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;
constexpr int kExitOracleMismatch = 5;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int input_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return kExitInput;
}

bool lrlx_binders_distinct(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return true;
    case ExprKind::Lam:
      return lrlx_binders_distinct(as_lam(e).body);
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args)
        if (!lrlx_binders_distinct(a)) return false;
      return true;
    case ExprKind::Letrec: {
      AtomSet seen;
      for (const EnvItem& item : as_letrec(e).env) {
        auto* b = std::get_if<Binding>(&item);
        if (!b) return true;  // checked by the atom-variable tiers instead
        if (!w_is_atom(b->binder)) return true;
        if (!seen.insert(w_as_atom(b->binder)).second) return false;
        if (!lrlx_binders_distinct(b->rhs)) return false;
      }
      return lrlx_binders_distinct(as_letrec(e).body);
    }
  }
  return true;
}

std::optional<std::string> validate_lrlx_problem(const UnifyProblemFile& pf) {
  for (auto& [l, r] : pf.equations) {
    if (!is_lrlx(l) || !is_lrlx(r))
      return "unify expects the tier without atom or environment variables";
    if (!lrlx_binders_distinct(l) || !lrlx_binders_distinct(r))
      return "letrec binders must be pairwise distinct";
  }
  for (auto& f : pf.freshness) {
    if (!w_is_atom(f.subject)) return "freshness subjects must be atoms in this tier";
    if (!is_lrlx(f.target)) return "freshness targets must be in the plain tier";
  }
  return std::nullopt;
}

// ---- oracle cross-check helpers (guarded instance sizes) ----

struct OracleBounds {
  size_t max_atoms = 4;
  size_t max_vars = 3;
  size_t depth = 2;
  size_t max_env = 2;
};

std::optional<std::vector<std::map<ExprVar, Expr>>> run_oracle(
    const std::vector<std::pair<Expr, Expr>>& eqs, const std::vector<Freshness>& fresh,
    std::string& err) {
  OracleBounds bounds;
  AtomSet atoms;
  std::set<ExprVar> vars;
  Signature sig;
  for (auto& [l, r] : eqs) {
    collect_atoms(l, nullptr, atoms);
    collect_atoms(r, nullptr, atoms);
    collect_expr_vars(l, vars);
    collect_expr_vars(r, vars);
  }
  if (atoms.size() > bounds.max_atoms || vars.size() > bounds.max_vars) {
    err = "oracle size guard: at most " + std::to_string(bounds.max_atoms) + " atoms and " +
          std::to_string(bounds.max_vars) + " variables";
    return std::nullopt;
  }
  // collect the signature from the expressions
  struct SigScan {
    Signature& sig;
    void run(const Expr& e) {
      switch (e.kind()) {
        case ExprKind::Lam:
          run(as_lam(e).body);
          break;
        case ExprKind::Fun:
          sig.declare(as_fun(e).sym, as_fun(e).args.size());
          for (const Expr& a : as_fun(e).args) run(a);
          break;
        case ExprKind::Letrec:
          for (const EnvItem& item : as_letrec(e).env)
            if (auto* b = std::get_if<Binding>(&item)) run(b->rhs);
          run(as_letrec(e).body);
          break;
        default:
          break;
      }
    }
  } scan{sig};
  for (auto& [l, r] : eqs) {
    scan.run(l);
    scan.run(r);
  }
  std::vector<Atom> pool(atoms.begin(), atoms.end());
  while (pool.size() < 3) {
    AtomSet avoid(pool.begin(), pool.end());
    pool.push_back(fresh_atom(avoid));
  }
  try {
    auto candidates = oracle::enum_ground_exprs(pool, sig, bounds.depth, bounds.max_env);
    return oracle::enum_ground_solutions(eqs, fresh, candidates);
  } catch (const oracle::OracleLimitError& e) {
    err = e.what();
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nominal unification and matching for higher-order expressions with letrec"};
  app.require_subcommand(1);

  std::string mode = "collecting";
  bool stats = false;
  bool garbage_free = false;
  bool with_oracle = false;
  size_t budget = 1000000;
  std::string strategy = "nlogn";

  auto add_common = [&](CLI::App* cmd, bool has_gf, bool has_strategy) {
    cmd->add_option("--mode", mode, "decision|collecting")->default_str("collecting");
    cmd->add_flag("--stats", stats, "print a stats record");
    cmd->add_option("--budget", budget, "branch budget (states)")->default_str("1000000");
    cmd->add_flag("--oracle", with_oracle, "cross-check against the brute-force oracle");
    if (has_gf) cmd->add_flag("--garbage-free", garbage_free, "garbage-free fixpoint rules");
    if (has_strategy)
      cmd->add_option("--strategy-p", strategy, "nlogn|quadratic|constant:k")
          ->default_str("nlogn");
  };

  std::string file1, file2;
  auto* unify_cmd = app.add_subcommand("unify", "nominal letrec unification");
  unify_cmd->add_option("file", file1, "problem file")->required();
  add_common(unify_cmd, true, false);

  auto* av_cmd = app.add_subcommand("unify-av", "unification with atom variables");
  av_cmd->add_option("file", file1, "problem file")->required();
  add_common(av_cmd, false, true);

  auto* match_cmd = app.add_subcommand("match", "nominal letrec matching");
  match_cmd->add_option("file", file1, "match file")->required();
  add_common(match_cmd, false, false);

  auto* env_cmd = app.add_subcommand("envmatch", "matching with environment variables");
  env_cmd->add_option("file", file1, "match file")->required();
  add_common(env_cmd, false, false);

  auto* alpha_cmd = app.add_subcommand("alphaeq", "alpha-equivalence of two expressions");
  alpha_cmd->add_option("file1", file1, "expression file")->required();
  alpha_cmd->add_option("file2", file2, "expression file")->required();

  auto* genham_cmd = app.add_subcommand("gen-ham", "Hamiltonian-cycle matching encoder");
  genham_cmd->add_option("edges", file1, "edge list file")->required();

  auto* gengi_cmd = app.add_subcommand("gen-gi", "graph-isomorphism matching encoder");
  gengi_cmd->add_option("edges1", file1, "edge list file")->required();
  gengi_cmd->add_option("edges2", file2, "edge list file")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force solutions of a problem file");
  oracle_cmd->add_option("file", file1, "problem or match file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*alpha_cmd) {
      Signature sig;
      Expr e1 = parse_expr_text(slurp(file1), sig);
      Expr e2 = parse_expr_text(slurp(file2), sig);
      if (!is_ground(e1) || !is_ground(e2))
        return input_error("alphaeq expects ground expressions");
      bool eq = alpha_eq(e1, e2);
      std::cout << (eq ? "(alphaeq true)" : "(alphaeq false)") << "\n";
      return eq ? kExitSat : kExitUnsat;
    }

    if (*genham_cmd) {
      Graph g = parse_edge_list(slurp(file1));
      std::cout << print_match_problem(encode_hamiltonian(g));
      return kExitSat;
    }

    if (*gengi_cmd) {
      Graph g1 = parse_edge_list(slurp(file1));
      Graph g2 = parse_edge_list(slurp(file2));
      std::cout << print_match_problem(encode_graph_iso(g1, g2));
      return kExitSat;
    }

    if (*oracle_cmd) {
      std::string text = slurp(file1);
      SExpr s = parse_sexpr(text);
      std::vector<std::pair<Expr, Expr>> eqs;
      std::vector<Freshness> fresh;
      if (!s.is_token() && !s.list().empty() && s.list()[0].is_token() &&
          s.list()[0].token() == "match") {
        MatchProblemFile pf = parse_match_problem(text);
        eqs = pf.equations;
      } else {
        UnifyProblemFile pf = parse_unify_problem(text);
        eqs = pf.equations;
        for (auto& f : pf.freshness) fresh.push_back(Freshness{f.subject, f.target});
      }
      std::string err;
      auto sols = run_oracle(eqs, fresh, err);
      if (!sols) return input_error(err);
      for (auto& rho : *sols) {
        std::cout << "(solution";
        for (auto& [x, e] : rho)
          std::cout << " (?" << x.name() << " " << print_expr(e) << ")";
        std::cout << ")\n";
      }
      return sols->empty() ? kExitUnsat : kExitSat;
    }

    if (mode != "decision" && mode != "collecting")
      return input_error("--mode must be decision or collecting");

    if (*unify_cmd) {
      UnifyProblemFile pf = parse_unify_problem(slurp(file1));
      if (auto err = validate_lrlx_problem(pf)) return input_error(*err);
      UnifyOptions opts;
      opts.collecting = mode == "collecting";
      opts.garbage_free = garbage_free;
      opts.budget = budget;
      opts.record_trace = stats;
      UnifyResult r = letrec_unify(pf, opts);
      for (const Unifier& u : r.unifiers) std::cout << print_unifier(u) << "\n";
      if (r.status == UnifyStatus::Unsat) std::cout << "(unsat)\n";
      if (stats) std::cout << print_stats(r.stats) << "\n";
      if (r.status == UnifyStatus::Overflow) {
        std::cerr << "error: branch budget exceeded\n";
        return kExitBudget;
      }
      if (with_oracle) {
        std::vector<Freshness> fresh;
        for (auto& f : pf.freshness) fresh.push_back(Freshness{f.subject, f.target});
        std::string err;
        auto sols = run_oracle(pf.equations, fresh, err);
        if (!sols) return input_error(err);
        bool agree = sols->empty() == (r.status == UnifyStatus::Unsat);
        std::cout << (agree ? "(oracle-check agree)" : "(oracle-check disagree)") << "\n";
        if (!agree) return kExitOracleMismatch;
      }
      return r.status == UnifyStatus::Sat ? kExitSat : kExitUnsat;
    }

    if (*av_cmd) {
      UnifyProblemFile pf = parse_unify_problem(slurp(file1));
      for (auto& [l, r] : pf.equations)
        if (has_env_vars(l) || has_env_vars(r))
          return input_error("unify-av does not accept environment variables");
      AvOptions opts;
      opts.collecting = mode == "collecting";
      opts.budget = budget;
      opts.p = StrategyP::parse(strategy);
      AvResult r = letrec_unify_av(pf, opts);
      for (const Unifier& u : r.unifiers)
        std::cout << print_unifier(u, r.grammar.get()) << "\n";
      if (r.status == UnifyStatus::Unsat) std::cout << "(unsat)\n";
      if (stats) {
        std::cout << "(stats (rules";
        for (auto& [name, n] : r.stats.rule_counts)
          std::cout << " (" << name << " " << n << ")";
        std::cout << ") (states " << r.stats.states_explored << ") (max-fixpoints-per-var "
                  << r.stats.max_fixpoint_eqs_per_var << ") (grammar-size "
                  << r.stats.grammar_size << ") (p-of-s " << r.stats.p_of_s << "))\n";
      }
      if (r.status == UnifyStatus::Overflow) {
        std::cerr << "error: branch budget exceeded\n";
        return kExitBudget;
      }
      return r.status == UnifyStatus::Sat ? kExitSat : kExitUnsat;
    }

    if (*match_cmd) {
      MatchProblemFile pf = parse_match_problem(slurp(file1));
      for (auto& [p, t] : pf.equations) {
        if (!is_lrlx(p) || has_env_vars(p))
          return input_error("match patterns live in the plain tier");
        if (!is_ground(t)) return input_error("match targets must be ground");
        if (!lrlx_binders_distinct(p) || !lrlx_binders_distinct(t))
          return input_error("letrec binders must be pairwise distinct");
      }
      MatchOptions opts;
      opts.collecting = mode == "collecting";
      opts.budget = budget;
      MatchResult r = letrec_match(pf, opts);
      for (const MatchSolution& s : r.solutions)
        std::cout << print_match_solution(s) << "\n";
      if (r.status == MatchStatus::Unsat) std::cout << "(unsat)\n";
      if (stats) std::cout << "(stats (states " << r.stats.states_explored << "))\n";
      if (r.status == MatchStatus::Overflow) {
        std::cerr << "error: branch budget exceeded\n";
        return kExitBudget;
      }
      if (with_oracle) {
        std::string err;
        auto sols = run_oracle(pf.equations, {}, err);
        if (!sols) return input_error(err);
        bool agree = sols->empty() == (r.status == MatchStatus::Unsat);
        std::cout << (agree ? "(oracle-check agree)" : "(oracle-check disagree)") << "\n";
        if (!agree) return kExitOracleMismatch;
      }
      return r.status == MatchStatus::Sat ? kExitSat : kExitUnsat;
    }

    if (*env_cmd) {
      MatchProblemFile pf = parse_match_problem(slurp(file1));
      for (auto& [p, t] : pf.equations)
        if (!is_ground(t)) return input_error("envmatch targets must be ground");
      MatchOptions opts;
      opts.collecting = mode == "collecting";
      opts.budget = budget;
      EnvMatchResult r = env_match(pf, opts);
      for (const EnvMatchSolution& s : r.solutions)
        std::cout << print_env_match_solution(s) << "\n";
      if (r.status == MatchStatus::Unsat) std::cout << "(unsat)\n";
      if (stats) std::cout << "(stats (states " << r.states_explored << "))\n";
      if (r.status == MatchStatus::Overflow) {
        std::cerr << "error: branch budget exceeded\n";
        return kExitBudget;
      }
      return r.status == MatchStatus::Sat ? kExitSat : kExitUnsat;
    }
  } catch (const ParseError& e) {
    return input_error(e.what());
  } catch (const std::exception& e) {
    return input_error(e.what());
  }
  return kExitInput;
}
