// Copyright 2026 The skyq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "query_lexer.h"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "skyq/error.h"

namespace skyq::internal {

namespace {

constexpr std::string_view kKeywords[] = {
    "SELECT", "FROM",   "WHERE", "AND",    "OR",      "NOT",     "ORDER",
    "BY",     "ASC",    "DESC",  "LIMIT",  "UNION",   "INTERSECT", "EXCEPT",
    "TAG",    "FULL",   "COUNT", "MIN",    "MAX",     "AVG",     "CIRCLE",
    "LATBAND", "HALFSPACE",
};

bool IsIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

bool IsKeyword(std::string_view upper) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), upper) != std::end(kKeywords);
}

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = column;
    if (IsIdentStart(c)) {
      std::size_t j = i;
      while (j < text.size() && IsIdentChar(text[j])) ++j;
      t.text = std::string(text.substr(i, j - i));
      std::string upper = t.text;
      for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      if (IsKeyword(upper)) {
        t.kind = TokenKind::kKeyword;
        t.text = upper;
      } else {
        t.kind = TokenKind::kIdent;
      }
      advance(j - i);
    } else if (IsDigit(c) || (c == '.' && i + 1 < text.size() && IsDigit(text[i + 1]))) {
      std::size_t j = i;
      while (j < text.size() && IsDigit(text[j])) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && IsDigit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && IsDigit(text[k])) {
          while (k < text.size() && IsDigit(text[k])) ++k;
          j = k;
        }
      }
      t.kind = TokenKind::kNumber;
      t.text = std::string(text.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
        throw ParseError("malformed number '" + t.text + "'", line, column);
      }
      if (j < text.size() && IsIdentStart(text[j])) {
        throw ParseError("malformed number '" + std::string(text.substr(i, j - i + 1)) + "'",
                         line, column);
      }
      advance(j - i);
    } else {
      auto two = text.substr(i, 2);
      std::size_t len = 1;
      switch (c) {
        case '(':
          t.kind = TokenKind::kLParen;
          break;
        case ')':
          t.kind = TokenKind::kRParen;
          break;
        case ',':
          t.kind = TokenKind::kComma;
          break;
        case '-':
          t.kind = TokenKind::kMinus;
          break;
        case '*':
          t.kind = TokenKind::kStar;
          break;
        case '=':
          t.kind = TokenKind::kEq;
          break;
        case '<':
          if (two == "<=") {
            t.kind = TokenKind::kLe;
            len = 2;
          } else if (two == "<>") {
            t.kind = TokenKind::kNe;
            len = 2;
          } else {
            t.kind = TokenKind::kLt;
          }
          break;
        case '>':
          if (two == ">=") {
            t.kind = TokenKind::kGe;
            len = 2;
          } else {
            t.kind = TokenKind::kGt;
          }
          break;
        case '!':
          if (two == "!=") {
            t.kind = TokenKind::kNe;
            len = 2;
            break;
          }
          [[fallthrough]];
        default:
          throw ParseError("unexpected character '" + std::string(1, c) + "'", line, column);
      }
      t.text = std::string(text.substr(i, len));
      advance(len);
    }
    tokens.push_back(std::move(t));
  }
  Token end;
  end.kind = TokenKind::kEnd;
  end.line = line;
  end.column = column;
  tokens.push_back(end);
  return tokens;
}

}  // namespace skyq::internal
