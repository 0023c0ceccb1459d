#include "nomlet/signature.hpp"

namespace nomlet {

bool Signature::declare(FunSym f, size_t arity) {
  auto [it, inserted] = table_.emplace(f, arity);
  return inserted || it->second == arity;
}

std::optional<size_t> Signature::arity(FunSym f) const {
  auto it = table_.find(f);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

}  // namespace nomlet
