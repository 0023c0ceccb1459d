#pragma once

#include <cstdint>
#include <deque>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace nomlet {

// Append-only string interner; one instance per name namespace.
// Reads may happen concurrently, writes are serialized.
class Interner {
 public:
  uint32_t intern(std::string_view name);
  std::string_view name(uint32_t id) const;
  bool lookup(std::string_view name, uint32_t& id) const;
  size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::deque<std::string> names_;
  std::unordered_map<std::string_view, uint32_t> ids_;
};

// The five disjoint namespaces of the term language.
Interner& atom_names();
Interner& atom_var_names();
Interner& expr_var_names();
Interner& env_var_names();
Interner& fun_names();

// Shortlex order on names; this is the canonical order used everywhere
// a deterministic iteration over atoms is required.
bool shortlex_less(std::string_view a, std::string_view b);

}  // namespace nomlet
