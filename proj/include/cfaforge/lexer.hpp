#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "cfaforge/diag.hpp"

namespace cfaforge {

struct Token {
  enum class Kind { Identifier, Keyword, IntLit, Operator, Punct, Eof };

  Kind kind;
  std::string text;
  int64_t value = 0;  // IntLit
  SourcePos pos;

  bool is(Kind k, const char* t) const { return kind == k && text == t; }
  bool is_keyword(const char* t) const { return is(Kind::Keyword, t); }
  bool is_op(const char* t) const { return is(Kind::Operator, t); }
  bool is_punct(const char* t) const { return is(Kind::Punct, t); }
};

inline bool is_dialect_keyword(const std::string& s) {
  static const char* kw[] = {"int",     "bool",   "void",    "true",   "false", "if",
                             "else",    "while",  "do",      "switch", "case",  "default",
                             "break",   "continue", "goto",  "return", "extern"};
  for (const char* k : kw)
    if (s == k) return true;
  return false;
}

// Tokenizes the restricted C dialect. Comments are skipped; every other
// construct either becomes a token or raises LexError / UnsupportedFeatureError.
inline std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;

  auto pos_here = [&]() { return SourcePos{line, col}; };
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (i < src.size() && src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto peek = [&](size_t off = 0) -> char { return i + off < src.size() ? src[i + off] : '\0'; };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && peek(1) == '*') {
      SourcePos start = pos_here();
      advance(2);
      while (i < src.size() && !(src[i] == '*' && peek(1) == '/')) advance(1);
      if (i >= src.size()) throw LexError("unterminated block comment", start);
      advance(2);
      continue;
    }
    if (c == '#') throw UnsupportedFeatureError("preprocessor directive", pos_here());
    if (c == '"' || c == '\'') throw UnsupportedFeatureError("string or character literal", pos_here());

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      SourcePos start = pos_here();
      size_t b = i;
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
        advance(1);
      std::string word = src.substr(b, i - b);
      if (word == "float" || word == "double" || word == "struct" || word == "union" ||
          word == "typedef" || word == "for" || word == "enum" || word == "char" ||
          word == "long" || word == "short" || word == "unsigned" || word == "signed" ||
          word == "static" || word == "const" || word == "sizeof")
        throw UnsupportedFeatureError(word, start);
      Token t;
      t.kind = is_dialect_keyword(word) ? Token::Kind::Keyword : Token::Kind::Identifier;
      t.text = word;
      t.pos = start;
      out.push_back(std::move(t));
      continue;
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
      SourcePos start = pos_here();
      size_t b = i;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
      if (i < src.size() && (src[i] == '.' || src[i] == 'e' || src[i] == 'E' || src[i] == 'f'))
        throw UnsupportedFeatureError("floating-point literal", start);
      if (i < src.size() && (src[i] == 'x' || src[i] == 'X') && src[b] == '0') {
        advance(1);
        size_t hb = i;
        while (i < src.size() && std::isxdigit(static_cast<unsigned char>(src[i]))) advance(1);
        if (hb == i) throw LexError("malformed hexadecimal literal", start);
      }
      std::string digits = src.substr(b, i - b);
      if (i < src.size() && (std::isalpha(static_cast<unsigned char>(src[i])) || src[i] == '_'))
        throw LexError("malformed integer literal", start);
      int64_t value = 0;
      try {
        value = std::stoll(digits, nullptr, 0);
      } catch (const std::exception&) {
        throw LexError("integer literal out of range: " + digits, start);
      }
      if (value > 2147483647LL)
        throw LexError("integer literal out of 32-bit range: " + digits, start);
      Token t;
      t.kind = Token::Kind::IntLit;
      t.text = digits;
      t.value = value;
      t.pos = start;
      out.push_back(std::move(t));
      continue;
    }

    SourcePos start = pos_here();
    auto two = src.substr(i, 2);
    if (two == "&&" || two == "||" || two == "==" || two == "!=" || two == "<=" || two == ">=") {
      Token t{Token::Kind::Operator, two, 0, start};
      out.push_back(std::move(t));
      advance(2);
      continue;
    }
    if (two == "++" || two == "--" || two == "+=" || two == "-=" || two == "*=" || two == "/=" ||
        two == "%=" || two == "->" || two == "<<" || two == ">>" || two == "&=" || two == "|=")
      throw UnsupportedFeatureError("operator " + two, start);
    if (c == '&' || c == '|' || c == '^' || c == '~' || c == '?' || c == '[' || c == ']' ||
        c == '.')
      throw UnsupportedFeatureError(std::string("operator ") + c, start);

    if (std::string("+-*/%<>=!").find(c) != std::string::npos) {
      Token t{Token::Kind::Operator, std::string(1, c), 0, start};
      out.push_back(std::move(t));
      advance(1);
      continue;
    }
    if (std::string("(){};,:").find(c) != std::string::npos) {
      Token t{Token::Kind::Punct, std::string(1, c), 0, start};
      out.push_back(std::move(t));
      advance(1);
      continue;
    }
    throw LexError(std::string("unexpected character '") + c + "'", start);
  }

  Token eof{Token::Kind::Eof, "", 0, pos_here()};
  out.push_back(std::move(eof));
  return out;
}

}  // namespace cfaforge
