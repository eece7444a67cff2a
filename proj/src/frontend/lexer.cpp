#include "lexer.hpp"

#include <array>
#include <cctype>

#include "statmodel/error.hpp"

namespace statmodel::frontend::detail {

namespace {

constexpr std::array<std::string_view, 22> kPuncts3Then2{
    "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&",
    "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "::",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : src_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    bool line_start = true;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        advance();
        line_start = true;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '\\' && peek(1) == '\n') {
        advance();
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        int l = line_, col = col_;
        advance();
        advance();
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) fail(ErrorCode::SyntaxError, "unterminated comment", l, col);
        advance();
        advance();
        continue;
      }
      if (c == '#') {
        if (!line_start) fail(ErrorCode::SyntaxError, "stray '#'", line_, col_);
        directive(out);
        line_start = true;
        continue;
      }
      line_start = false;
      out.push_back(token());
    }
    out.push_back(Token{TokKind::End, "", line_, col_});
    return out;
  }

  int lines() const { return line_; }

 private:
  char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] static void fail(ErrorCode code, const std::string& what, int line, int col) {
    throw Error(code, std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }

  void directive(std::vector<Token>& out) {
    int line = line_, col = col_;
    std::string text;
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && peek(1) == '\n') {
        text += ' ';
        advance();
        advance();
        continue;
      }
      text += src_[pos_];
      advance();
    }
    std::size_t k = 1;
    while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
    std::size_t e = k;
    while (e < text.size() && ident_char(text[e])) ++e;
    std::string word = text.substr(k, e - k);
    if (word == "include") return;
    if (word == "pragma") {
      std::size_t a = e;
      while (a < text.size() && std::isspace(static_cast<unsigned char>(text[a]))) ++a;
      if (text.compare(a, 11, "@Annotation") == 0) out.push_back(Token{TokKind::Pragma, text, line, col});
      return;
    }
    fail(ErrorCode::UnsupportedConstruct, "preprocessor directive #" + word, line, col);
  }

  Token token() {
    Token t;
    t.line = line_;
    t.column = col_;
    char c = src_[pos_];
    std::size_t start = pos_;
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      t.kind = TokKind::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      number(t);
      return t;
    } else if (c == '"' || c == '\'') {
      char q = c;
      advance();
      while (pos_ < src_.size() && src_[pos_] != q) {
        if (src_[pos_] == '\n') fail(ErrorCode::SyntaxError, "unterminated literal", t.line, t.column);
        if (src_[pos_] == '\\') advance();
        advance();
      }
      if (pos_ >= src_.size()) fail(ErrorCode::SyntaxError, "unterminated literal", t.line, t.column);
      advance();
      t.kind = q == '"' ? TokKind::String : TokKind::Char;
    } else {
      t.kind = TokKind::Punct;
      std::size_t len = 1;
      for (auto p : kPuncts3Then2) {
        if (src_.substr(pos_, p.size()) == p) {
          len = p.size();
          break;
        }
      }
      static constexpr std::string_view kSingles = "{}()[];,<>=+-*/%!~&|^?:.";
      if (len == 1 && kSingles.find(c) == std::string_view::npos) {
        fail(ErrorCode::SyntaxError, std::string("unexpected character '") + c + "'", line_, col_);
      }
      for (std::size_t i = 0; i < len; ++i) advance();
    }
    t.text = std::string(src_.substr(start, pos_ - start));
    return t;
  }

  void number(Token& t) {
    std::size_t start = pos_;
    bool is_float = false;
    if (src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    } else {
      while (pos_ < src_.size()) {
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
          advance();
        } else if (c == '.') {
          is_float = true;
          advance();
        } else if ((c == 'e' || c == 'E') &&
                   (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                    ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
          is_float = true;
          advance();
          advance();
        } else {
          break;
        }
      }
    }
    while (pos_ < src_.size() && std::string_view("uUlLfF").find(src_[pos_]) != std::string_view::npos) {
      if (src_[pos_] == 'f' || src_[pos_] == 'F') is_float = true;
      advance();
    }
    t.kind = is_float ? TokKind::Float : TokKind::Int;
    t.text = std::string(src_.substr(start, pos_ - start));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text, int* line_count) {
  Lexer lx(text);
  auto out = lx.run();
  if (line_count) {
    int n = lx.lines();
    if (!text.empty() && text.back() == '\n') --n;
    *line_count = n;
  }
  return out;
}

}  // namespace statmodel::frontend::detail
