#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nomlet {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
        line(line),
        col(col) {}
  int line, col;
};

// Tokens and lists; ';' starts a comment to end of line.
struct SExpr {
  std::variant<std::string, std::vector<SExpr>> v;
  int line = 0, col = 0;

  bool is_token() const { return v.index() == 0; }
  const std::string& token() const { return std::get<std::string>(v); }
  const std::vector<SExpr>& list() const { return std::get<std::vector<SExpr>>(v); }
};

SExpr parse_sexpr(std::string_view text);
std::vector<SExpr> parse_sexprs(std::string_view text);

std::string sexpr_to_string(const SExpr& s);

}  // namespace nomlet
