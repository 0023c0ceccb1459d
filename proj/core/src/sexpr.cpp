#include "nomlet/sexpr.hpp"

namespace nomlet {

namespace {

struct Lexer {
  std::string_view text;
  size_t pos = 0;
  int line = 1, col = 1;

  void advance() {
    if (pos < text.size() && text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {
        while (pos < text.size() && text[pos] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  SExpr next() {
    skip_ws();
    if (pos >= text.size()) throw ParseError("unexpected end of input", line, col);
    int l = line, c = col;
    char ch = text[pos];
    if (ch == '(') {
      advance();
      std::vector<SExpr> items;
      for (;;) {
        skip_ws();
        if (pos >= text.size()) throw ParseError("unterminated list", l, c);
        if (text[pos] == ')') {
          advance();
          break;
        }
        items.push_back(next());
      }
      return SExpr{std::move(items), l, c};
    }
    if (ch == ')') throw ParseError("unexpected ')'", l, c);
    std::string tok;
    while (pos < text.size()) {
      char t = text[pos];
      if (t == '(' || t == ')' || t == ';' || t == ' ' || t == '\t' || t == '\n' || t == '\r')
        break;
      tok.push_back(t);
      advance();
    }
    return SExpr{std::move(tok), l, c};
  }
};

void write(const SExpr& s, std::string& out) {
  if (s.is_token()) {
    out += s.token();
    return;
  }
  out += '(';
  bool first = true;
  for (const SExpr& item : s.list()) {
    if (!first) out += ' ';
    first = false;
    write(item, out);
  }
  out += ')';
}

}  // namespace

SExpr parse_sexpr(std::string_view text) {
  Lexer lx{text};
  SExpr s = lx.next();
  if (!lx.eof()) throw ParseError("trailing input", lx.line, lx.col);
  return s;
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Lexer lx{text};
  std::vector<SExpr> out;
  while (!lx.eof()) out.push_back(lx.next());
  return out;
}

std::string sexpr_to_string(const SExpr& s) {
  std::string out;
  write(s, out);
  return out;
}

}  // namespace nomlet
