#include "nomlet/interner.hpp"

#include <mutex>

namespace nomlet {

uint32_t Interner::intern(std::string_view name) {
  {
    std::shared_lock lock(mutex_);
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
  }
  std::unique_lock lock(mutex_);
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(std::string_view(names_.back()), id);
  return id;
}

std::string_view Interner::name(uint32_t id) const {
  std::shared_lock lock(mutex_);
  return names_[id];
}

bool Interner::lookup(std::string_view name, uint32_t& id) const {
  std::shared_lock lock(mutex_);
  auto it = ids_.find(name);
  if (it == ids_.end()) return false;
  id = it->second;
  return true;
}

size_t Interner::size() const {
  std::shared_lock lock(mutex_);
  return names_.size();
}

Interner& atom_names() {
  static Interner instance;
  return instance;
}
Interner& atom_var_names() {
  static Interner instance;
  return instance;
}
Interner& expr_var_names() {
  static Interner instance;
  return instance;
}
Interner& env_var_names() {
  static Interner instance;
  return instance;
}
Interner& fun_names() {
  static Interner instance;
  return instance;
}

bool shortlex_less(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace nomlet
