#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace statmodel::frontend::detail {

enum class TokKind { Ident, Int, Float, String, Char, Punct, Pragma, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  int line = 0;
  int column = 0;
};

// Splits source text into tokens. Comments and whitespace are dropped;
// `#pragma @Annotation` lines (with backslash continuations joined) become a
// single Pragma token. #include and other pragmas are ignored; any other
// preprocessor directive raises UnsupportedConstruct.
std::vector<Token> tokenize(std::string_view text, int* line_count = nullptr);

}  // namespace statmodel::frontend::detail
