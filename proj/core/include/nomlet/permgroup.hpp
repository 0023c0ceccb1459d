#pragma once

#include <vector>

#include "nomlet/perm.hpp"

namespace nomlet {

// Membership in the subgroup generated by gens, via an incrementally built
// base and strong generating set (deterministic Schreier-Sims).
bool group_member(const Perm& p, const std::vector<Perm>& gens);

// Greedy generator reduction: scans in input order and drops any generator
// contained in the group generated by the remaining ones. The span is
// preserved: <result> = <gens>.
std::vector<Perm> reduce_generators(const std::vector<Perm>& gens);

// Reusable stabilizer chain over a fixed carrier of atoms.
class StabChain {
 public:
  explicit StabChain(std::vector<Atom> carrier);

  void add_generator(const Perm& p);
  bool contains(const Perm& p) const;
  const std::vector<Atom>& carrier() const { return carrier_; }

  // batch construction: place all generators, then stabilize once
  void place_perm(const Perm& p);
  void stabilize_all();

 private:
  using PermV = std::vector<int>;

  PermV to_vec(const Perm& p) const;
  bool is_id(const PermV& v) const;
  PermV compose_v(const PermV& p, const PermV& q) const;
  PermV inverse_v(const PermV& p) const;
  void rebuild_orbit(size_t level);
  // Sifts v through levels starting at `level`; returns the residue and the
  // level it stopped at.
  std::pair<PermV, size_t> sift(PermV v, size_t level) const;
  size_t place(const PermV& g);
  void schreier_sims(size_t level);

  std::vector<Atom> carrier_;
  std::vector<int> base_;
  // gens_[i]: every strong generator fixing base_[0..i-1]
  std::vector<std::vector<PermV>> gens_;
  std::vector<std::vector<PermV>> transversal_;  // [i][point] or empty
  std::vector<std::vector<char>> in_orbit_;
};

}  // namespace nomlet
