#pragma once

// Recursive-descent parser for the concrete formula syntax:
//
//   phi  := "true" | "false" | IDENT | "~" phi | "(" phi BIN phi ")"
//         | "K" IDENT phi | "C" "{" agents "}" phi
//         | "[" "ann" phi "]" phi | "<" "ann" phi ">" phi
//         | "[!]" phi | "<!>" phi
//         | "[" "grp" "{" agents "}" "]" phi | "<" "grp" "{" agents "}" ">" phi
//         | "[" "coa" "{" agents "}" "]" phi | "<" "coa" "{" agents "}" ">" phi
//   BIN  := "&" | "|" | "->"
//
// Derived connectives and diamonds are expanded into the primitive basis.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qpalc/error.hpp"
#include "qpalc/formula.hpp"

namespace qpalc {

namespace detail {

enum class Tok { Ident, LParen, RParen, LBrace, RBrace, LBracket, RBracket, Lt, Gt, Tilde, Amp, Bar, Arrow, Comma, Bang, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line, column;
};

inline std::string_view tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Lt: return "'<'";
    case Tok::Gt: return "'>'";
    case Tok::Tilde: return "'~'";
    case Tok::Amp: return "'&'";
    case Tok::Bar: return "'|'";
    case Tok::Arrow: return "'->'";
    case Tok::Comma: return "','";
    case Tok::Bang: return "'!'";
    case Tok::End: return "end of input";
  }
  return "?";
}

inline std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto ident_start = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto ident_char = [&](char c) { return ident_start(c) || (c >= '0' && c <= '9'); };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      advance(1);
      continue;
    }
    std::size_t l = line, cl = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    Tok k;
    std::size_t len = 1;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case '<': k = Tok::Lt; break;
      case '>': k = Tok::Gt; break;
      case '~': k = Tok::Tilde; break;
      case '&': k = Tok::Amp; break;
      case '|': k = Tok::Bar; break;
      case ',': k = Tok::Comma; break;
      case '!': k = Tok::Bang; break;
      case '-':
        if (i + 1 < text.size() && text[i + 1] == '>') {
          k = Tok::Arrow;
          len = 2;
          break;
        }
        [[fallthrough]];
      default: throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
    }
    out.push_back({k, std::string(text.substr(i, len)), l, cl});
    advance(len);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

inline bool reserved(std::string_view w) { return w == "K" || w == "C" || w == "true" || w == "false"; }

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  Formula parse_all() {
    Formula f = formula();
    if (peek().kind != Tok::End) fail("unexpected " + describe(peek()) + " after formula");
    return f;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::Ident) return "identifier '" + t.text + "'";
    return std::string(tok_name(t.kind));
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }

  const Token& expect(Tok k) {
    if (peek().kind != k) fail("expected " + std::string(tok_name(k)) + ", found " + describe(peek()));
    return next();
  }
  void expect_word(std::string_view w) {
    if (peek().kind != Tok::Ident || peek().text != w)
      fail("expected '" + std::string(w) + "', found " + describe(peek()));
    next();
  }
  std::string identifier() {
    const Token& t = expect(Tok::Ident);
    if (reserved(t.text)) throw ParseError("reserved word '" + t.text + "' cannot name an agent", t.line, t.column);
    return t.text;
  }

  std::vector<std::string> agent_set() {
    expect(Tok::LBrace);
    std::vector<std::string> g;
    if (peek().kind != Tok::RBrace) {
      g.push_back(identifier());
      while (peek().kind == Tok::Comma) {
        next();
        g.push_back(identifier());
      }
    }
    expect(Tok::RBrace);
    return g;
  }

  // After '[' or '<': parse the bracketed operator head up to the closing bracket.
  Formula bracketed(bool box) {
    Tok close = box ? Tok::RBracket : Tok::Gt;
    if (peek().kind == Tok::Bang) {
      next();
      expect(close);
      Formula body = formula();
      return box ? apal_box(body) : apal_diamond(body);
    }
    if (peek().kind != Tok::Ident) fail("expected '!', 'ann', 'grp' or 'coa', found " + describe(peek()));
    const Token& head = peek();
    if (head.text == "ann") {
      next();
      Formula psi = formula();
      expect(close);
      Formula body = formula();
      return box ? announce(psi, body) : announce_dual(psi, body);
    }
    if (head.text == "grp" || head.text == "coa") {
      bool grp = head.text == "grp";
      next();
      auto g = agent_set();
      expect(close);
      Formula body = formula();
      if (grp) return box ? gal_box(g, body) : gal_diamond(g, body);
      return box ? cal_box(g, body) : cal_diamond(g, body);
    }
    fail("unknown operator '" + head.text + "'");
  }

  Formula formula() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Ident: {
        next();
        if (t.text == "true") return top();
        if (t.text == "false") return bottom();
        if (t.text == "K") {
          std::string a = identifier();
          return know(a, formula());
        }
        if (t.text == "C") {
          auto g = agent_set();
          return common(g, formula());
        }
        return atom(t.text);
      }
      case Tok::Tilde: next(); return neg(formula());
      case Tok::LParen: {
        next();
        Formula a = formula();
        const Token& op = peek();
        if (op.kind != Tok::Amp && op.kind != Tok::Bar && op.kind != Tok::Arrow)
          fail("expected '&', '|' or '->', found " + describe(op));
        Tok k = next().kind;
        Formula b = formula();
        expect(Tok::RParen);
        if (k == Tok::Amp) return conj(a, b);
        if (k == Tok::Bar) return disj(a, b);
        return implies(a, b);
      }
      case Tok::LBracket: next(); return bracketed(true);
      case Tok::Lt: next(); return bracketed(false);
      default: fail("unexpected " + describe(t));
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse(std::string_view text) { return detail::Parser(text).parse_all(); }

}  // namespace qpalc
