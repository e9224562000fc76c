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

#ifndef SKYQ_SRC_QUERY_LEXER_H_
#define SKYQ_SRC_QUERY_LEXER_H_

#include <string>
#include <string_view>
#include <vector>

namespace skyq::internal {

enum class TokenKind {
  kIdent,
  kKeyword,
  kNumber,
  kLParen,
  kRParen,
  kComma,
  kMinus,
  kLt,
  kLe,
  kGt,
  kGe,
  kEq,
  kNe,
  kStar,
  kEnd,
};

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;  // keywords upper-cased
  double number = 0;
  int line = 1;
  int column = 1;
};

bool IsKeyword(std::string_view upper);

// Throws ParseError on characters outside the language.
std::vector<Token> Tokenize(std::string_view text);

}  // namespace skyq::internal

#endif  // SKYQ_SRC_QUERY_LEXER_H_
