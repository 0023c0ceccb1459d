#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>

#include "nomlet/interner.hpp"

namespace nomlet {

struct FunSym {
  uint32_t id;
  std::string_view name() const { return fun_names().name(id); }
  friend bool operator==(FunSym, FunSym) = default;
  friend bool operator<(FunSym a, FunSym b) {
    return a.id != b.id && shortlex_less(a.name(), b.name());
  }
};

inline FunSym mk_fun(std::string_view name) { return FunSym{fun_names().intern(name)}; }

// Function symbols with fixed arities. Arities are usually inferred from the
// first occurrence while parsing; declare() rejects inconsistent arities.
class Signature {
 public:
  // Returns false if the symbol was already declared with a different arity.
  bool declare(FunSym f, size_t arity);
  std::optional<size_t> arity(FunSym f) const;
  const std::map<FunSym, size_t>& table() const { return table_; }

 private:
  std::map<FunSym, size_t> table_;
};

}  // namespace nomlet
