#include <algorithm>
#include <set>

#include "lexer.hpp"
#include "statmodel/error.hpp"
#include "statmodel/frontend/ast.hpp"

namespace statmodel::frontend {

using detail::TokKind;
using detail::Token;

std::string FunctionDecl::mangled_name() const {
  std::string out = class_name ? *class_name + "_" : "";
  return out + name + "_" + std::to_string(arity);
}

const FunctionDecl* SourceUnit::find_function(std::string_view mangled) const {
  for (const auto& f : functions) {
    if (f.mangled_name() == mangled) return &f;
  }
  return nullptr;
}

namespace {

const std::set<std::string, std::less<>> kTypeWords{
    "void", "int", "double", "float", "char", "long", "short", "unsigned", "signed", "bool",
    "auto", "size_t", "int8_t", "int16_t", "int32_t", "int64_t", "uint8_t", "uint16_t",
    "uint32_t", "uint64_t", "ptrdiff_t"};

const std::set<std::string, std::less<>> kQualifiers{"const", "static", "inline", "extern", "volatile",
                                                     "virtual", "constexpr", "register"};

const std::set<std::string, std::less<>> kUnsupported{
    "while", "do", "goto", "switch", "case", "default", "break", "continue", "try", "throw",
    "catch", "template", "typedef", "new", "delete", "sizeof", "operator", "enum", "union"};

int precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=") return 6;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
  if (op == "<<" || op == ">>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  return 0;
}

bool is_assign_op(std::string_view op) {
  return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" || op == "&=" ||
         op == "|=" || op == "^=" || op == "<<=" || op == ">>=";
}

std::string join_type(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, SourceUnit& unit) : toks_(std::move(toks)), unit_(unit) {}

  void run() {
    while (cur().kind != TokKind::End) {
      if (cur().kind == TokKind::Pragma) {
        throw Error(ErrorCode::MalformedAnnotation,
                    "line " + std::to_string(cur().line) + ": annotation outside a function body");
      }
      if (is(";")) {
        take();
      } else if (is("class") || is("struct")) {
        parse_class();
      } else if (is("using")) {
        while (!is(";")) take_any();
        take();
      } else {
        parse_declaration(std::nullopt);
      }
    }
  }

 private:
  // Token access -----------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k = 1) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

  bool is(std::string_view text) const { return is_at(0, text); }
  bool is_at(std::size_t k, std::string_view text) const {
    const Token& t = peek(k);
    return (t.kind == TokKind::Punct || t.kind == TokKind::Ident) && t.text == text;
  }

  [[noreturn]] void error(const Token& t, const std::string& what) const {
    throw Error(ErrorCode::SyntaxError, unit_.file_name + ":" + std::to_string(t.line) + ":" +
                                            std::to_string(t.column) + ": " + what);
  }

  [[noreturn]] void unsupported(const Token& t, const std::string& what) const {
    throw Error(ErrorCode::UnsupportedConstruct, unit_.file_name + ":" + std::to_string(t.line) + ":" +
                                                     std::to_string(t.column) + ": unsupported construct '" +
                                                     what + "'");
  }

  Token take_any() {
    const Token& t = cur();
    if (t.kind == TokKind::End) error(t, "unexpected end of input");
    if (sink_) sink_->push_back(OwnToken{{t.line, t.column}, role_});
    last_ = {t.line, t.column};
    ++pos_;
    return t;
  }

  Token take() { return take_any(); }

  Token expect(std::string_view text) {
    if (!is(text)) {
      std::string got = cur().kind == TokKind::End ? "end of input" : "'" + cur().text + "'";
      error(cur(), "expected '" + std::string(text) + "' but found " + got);
    }
    return take();
  }

  std::string expect_ident() {
    if (cur().kind != TokKind::Ident) error(cur(), "expected identifier");
    if (kUnsupported.count(cur().text)) unsupported(cur(), cur().text);
    return take().text;
  }

  // Types and declarations -------------------------------------------------

  bool is_type_word(const Token& t) const {
    return t.kind == TokKind::Ident &&
           (kTypeWords.count(t.text) || kQualifiers.count(t.text) || classes_.count(t.text));
  }

  bool starts_declaration() const {
    if (is_type_word(cur())) return true;
    if (cur().kind != TokKind::Ident || kUnsupported.count(cur().text)) return false;
    // `Type name` or `ns::Type name`
    std::size_t k = 0;
    while (is_at(k + 1, "::") && peek(k + 2).kind == TokKind::Ident) k += 2;
    const Token& after = peek(k + 1);
    if (after.kind == TokKind::Ident) return true;
    if ((is_at(k + 1, "*") || is_at(k + 1, "&")) && peek(k + 2).kind == TokKind::Ident &&
        (is_at(k + 3, "=") || is_at(k + 3, ";") || is_at(k + 3, ",") || is_at(k + 3, "[") || is_at(k + 3, ")"))) {
      return k > 0 || classes_.count(cur().text) > 0;
    }
    return false;
  }

  std::string parse_type() {
    std::vector<std::string> words;
    bool have_base = false;
    while (cur().kind == TokKind::Ident) {
      const std::string& w = cur().text;
      if (kQualifiers.count(w)) {
        words.push_back(take().text);
      } else if (kTypeWords.count(w)) {
        words.push_back(take().text);
        have_base = true;
      } else if (!have_base) {
        if (kUnsupported.count(w)) unsupported(cur(), w);
        std::string name = take().text;
        while (is("::") && peek().kind == TokKind::Ident) {
          take();
          name += "::" + take().text;
        }
        if (is("<")) unsupported(cur(), "template arguments");
        words.push_back(name);
        have_base = true;
      } else {
        break;
      }
    }
    if (!have_base) error(cur(), "expected a type");
    return join_type(words);
  }

  Declarator parse_declarator() {
    Declarator d;
    while (is("*")) {
      take();
      ++d.pointer_depth;
      if (is("const")) take();
    }
    if (is("&")) {
      take();
      d.reference = true;
    }
    d.name = expect_ident();
    while (is("[")) {
      take();
      d.dims.push_back(is("]") ? nullptr : expression());
      expect("]");
    }
    if (is("=")) {
      take();
      if (is("{")) unsupported(cur(), "brace initializer");
      d.init = assignment();
    } else if (is("(")) {
      take();
      d.has_ctor_call = true;
      if (!is(")")) {
        d.ctor_args.push_back(assignment());
        while (is(",")) {
          take();
          d.ctor_args.push_back(assignment());
        }
      }
      expect(")");
    } else if (is("{")) {
      unsupported(cur(), "brace initializer");
    }
    return d;
  }

  Decl parse_decl_body() {
    Decl d;
    d.type = parse_type();
    d.declarators.push_back(parse_declarator());
    while (is(",")) {
      take();
      d.declarators.push_back(parse_declarator());
    }
    return d;
  }

  std::vector<Param> parse_params() {
    std::vector<Param> out;
    expect("(");
    if (is("void") && is_at(1, ")")) take();
    while (!is(")")) {
      if (!out.empty()) expect(",");
      Param p;
      p.type = parse_type();
      while (is("*")) {
        take();
        p.type += "*";
        if (is("const")) take();
      }
      if (is("&")) {
        take();
        p.type += "&";
      }
      if (cur().kind == TokKind::Ident) p.name = take().text;
      while (is("[")) {
        take();
        if (!is("]")) expression();
        expect("]");
        p.type += "[]";
      }
      if (is("=")) unsupported(cur(), "default argument");
      out.push_back(std::move(p));
    }
    expect(")");
    return out;
  }

  void parse_class() {
    take();
    std::string name = expect_ident();
    classes_.insert(name);
    if (is(";")) {
      take();
      return;
    }
    if (is(":")) {
      while (!is("{")) take_any();
    }
    expect("{");
    while (!is("}")) {
      if (cur().kind == TokKind::End) error(cur(), "expected '}' at end of class");
      if ((is("public") || is("private") || is("protected")) && is_at(1, ":")) {
        take();
        take();
      } else if (is("class") || is("struct")) {
        unsupported(cur(), "nested class");
      } else if (is("friend") || is("using")) {
        while (!is(";")) take_any();
        take();
      } else if (is(";")) {
        take();
      } else if (cur().kind == TokKind::Pragma) {
        throw Error(ErrorCode::MalformedAnnotation,
                    "line " + std::to_string(cur().line) + ": annotation outside a function body");
      } else {
        parse_declaration(name);
      }
    }
    expect("}");
    expect(";");
  }

  // Function definition, prototype, constructor or variable declaration.
  void parse_declaration(const std::optional<std::string>& class_name) {
    std::optional<std::string> owner = class_name;
    std::string fname;
    int fline = 0;

    while (is("virtual") || is("inline") || is("static") || is("explicit") || is("constexpr")) take();
    bool ctor = false;
    if (class_name && (is(*class_name) || (is("~") && is_at(1, *class_name))) &&
        (is_at(1, "(") || is_at(2, "("))) {
      ctor = true;
      if (is("~")) {
        take();
        fname = "~";
      }
      fline = cur().line;
      fname += take().text;
    } else if (cur().kind == TokKind::Ident && classes_.count(cur().text) && is_at(1, "::") &&
               (is_at(2, cur().text) || is_at(2, "~"))) {
      // Out-of-class constructor or destructor.
      ctor = true;
      owner = take().text;
      take();
      if (is("~")) {
        take();
        fname = "~";
      }
      fline = cur().line;
      fname += take().text;
    }

    if (!ctor) {
      std::string type = parse_type();
      while (is("*") || is("&")) take();
      if (is("operator")) unsupported(cur(), "operator");
      if (cur().kind != TokKind::Ident) error(cur(), "expected a declarator name");
      // A qualified type word may actually be Class::member.
      if (!owner && type.find("::") == std::string::npos && is_at(1, "::")) {
        owner = take().text;
        take();
      }
      fline = cur().line;
      fname = expect_ident();
      if (!is("(")) {
        // Variable declaration; rewind to the declarator and parse normally.
        unit_.globals.push_back(fname);
        skip_rest_of_declarator();
        while (is(",")) {
          take();
          while (is("*") || is("&")) take();
          unit_.globals.push_back(expect_ident());
          skip_rest_of_declarator();
        }
        expect(";");
        return;
      }
    }

    FunctionDecl fn;
    fn.name = fname;
    fn.class_name = owner;
    fn.line = fline;
    fn.params = parse_params();
    fn.arity = static_cast<int>(fn.params.size());
    if (is("const")) take();
    if (is("override") || is("final")) take();
    if (is(":")) {
      // Member initializer list: skip to the body.
      while (!is("{")) take_any();
    }
    if (is(";")) {
      take();
      return;
    }
    if (!is("{")) error(cur(), "expected function body");
    loop_indices_.clear();
    fn.body = parse_stmt({});
    unit_.functions.push_back(std::move(fn));
  }

  void skip_rest_of_declarator() {
    int depth = 0;
    while (cur().kind != TokKind::End) {
      if (depth == 0 && (is(",") || is(";"))) return;
      if (is("(") || is("[") || is("{")) ++depth;
      if (is(")") || is("]") || is("}")) --depth;
      take_any();
    }
  }

  // Statements -------------------------------------------------------------

  StmtPtr parse_stmt(std::vector<Annotation> anns) {
    auto s = std::make_shared<Stmt>();
    s->id = next_id_++;
    s->begin = {cur().line, cur().column};
    auto* saved_sink = sink_;
    TokenRole saved_role = role_;
    sink_ = &s->own_tokens;
    role_ = TokenRole::Plain;

    if (cur().kind == TokKind::Ident && kUnsupported.count(cur().text)) unsupported(cur(), cur().text);

    if (is("{")) {
      s->node = parse_block();
    } else if (is("for")) {
      s->node = parse_for();
    } else if (is("if")) {
      s->node = parse_if();
    } else if (is("return")) {
      take();
      ReturnStmt r;
      if (!is(";")) r.value = expression();
      expect(";");
      s->node = r;
    } else if (is(";")) {
      take();
      s->node = Block{};
    } else if (starts_declaration()) {
      Decl d = parse_decl_body();
      expect(";");
      s->node = std::move(d);
    } else {
      ExprPtr e = expression();
      expect(";");
      s->node = expr_statement(e);
    }

    s->end = last_;
    sink_ = saved_sink;
    role_ = saved_role;
    for (auto& a : anns) a.attach_site = s->id;
    s->annotations = merge_annotations(anns);
    for (const auto& t : s->own_tokens) s->lines.insert(t.pos.line);
    unit_.line_index[s->id] = s->lines;
    return s;
  }

  static std::variant<ForLoop, IfStmt, ExprStmt, CallStmt, Block, Decl, ReturnStmt> expr_statement(
      const ExprPtr& e) {
    if (e->kind == Expr::Kind::Call) {
      const ExprPtr& callee = e->kids[0];
      CallStmt c;
      c.expr = e;
      c.args.assign(e->kids.begin() + 1, e->kids.end());
      if (callee->kind == Expr::Kind::Ident) {
        c.callee = callee->text;
        return c;
      }
      if (callee->kind == Expr::Kind::Member) {
        c.callee = callee->text;
        c.object = callee->kids[0];
        return c;
      }
    }
    return ExprStmt{e};
  }

  Block parse_block() {
    expect("{");
    Block b;
    std::vector<Annotation> pending;
    while (true) {
      if (cur().kind == TokKind::Pragma) {
        const Token& t = cur();
        auto anns = parse_annotation(t.text, t.line);
        pending.insert(pending.end(), anns.begin(), anns.end());
        ++pos_;
        continue;
      }
      if (is("}")) {
        if (!pending.empty()) {
          throw Error(ErrorCode::MalformedAnnotation, "line " + std::to_string(pending.back().line) +
                                                          ": annotation not followed by a statement");
        }
        take();
        break;
      }
      if (cur().kind == TokKind::End) error(cur(), "expected '}'");
      b.stmts.push_back(parse_stmt(std::move(pending)));
      pending.clear();
    }
    return b;
  }

  // Pragmas directly before a nested statement (the body of a for/if written
  // without braces).
  std::vector<Annotation> leading_pragmas() {
    std::vector<Annotation> out;
    while (cur().kind == TokKind::Pragma) {
      auto anns = parse_annotation(cur().text, cur().line);
      out.insert(out.end(), anns.begin(), anns.end());
      ++pos_;
    }
    return out;
  }

  ForLoop parse_for() {
    ForLoop f;
    role_ = TokenRole::ForKeyword;
    take();
    expect("(");
    role_ = TokenRole::ForInit;
    if (!is(";")) {
      if (starts_declaration()) {
        f.init = parse_decl_body();
      } else {
        f.init = expression();
      }
    }
    expect(";");
    role_ = TokenRole::ForCond;
    if (!is(";")) f.cond = expression();
    expect(";");
    role_ = TokenRole::ForStep;
    if (!is(")")) f.step = expression();
    expect(")");
    role_ = TokenRole::Plain;

    f.scop = extract_scop(f, {loop_indices_.begin(), loop_indices_.end()});
    std::string index = std::visit([](const auto& s) { return s.index; }, f.scop);
    loop_indices_.push_back(index);
    f.body = parse_stmt(leading_pragmas());
    loop_indices_.pop_back();
    return f;
  }

  IfStmt parse_if() {
    IfStmt i;
    take();
    expect("(");
    i.cond = expression();
    expect(")");
    i.then_branch = parse_stmt(leading_pragmas());
    if (is("else")) {
      take();
      i.else_branch = parse_stmt(leading_pragmas());
    }
    return i;
  }

  // Expressions ------------------------------------------------------------

  ExprPtr make(Expr::Kind kind, std::string text, SourcePos pos, std::vector<ExprPtr> kids = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->text = std::move(text);
    e->pos = pos;
    e->kids = std::move(kids);
    return e;
  }

  ExprPtr expression() {
    if (cur().kind == TokKind::Pragma) {
      throw Error(ErrorCode::MalformedAnnotation,
                  "line " + std::to_string(cur().line) + ": annotation inside an expression");
    }
    return assignment();
  }

  ExprPtr assignment() {
    ExprPtr lhs = ternary();
    if (cur().kind == TokKind::Punct && is_assign_op(cur().text)) {
      Token op = take();
      ExprPtr rhs = assignment();
      return make(Expr::Kind::Assign, op.text, {op.line, op.column}, {lhs, rhs});
    }
    return lhs;
  }

  ExprPtr ternary() {
    ExprPtr c = binary(1);
    if (is("?")) {
      Token q = take();
      ExprPtr a = assignment();
      expect(":");
      ExprPtr b = assignment();
      return make(Expr::Kind::Ternary, "?", {q.line, q.column}, {c, a, b});
    }
    return c;
  }

  ExprPtr binary(int min_prec) {
    ExprPtr lhs = unary();
    while (cur().kind == TokKind::Punct) {
      int p = precedence(cur().text);
      if (p == 0 || p < min_prec) break;
      Token op = take();
      ExprPtr rhs = binary(p + 1);
      lhs = make(Expr::Kind::Binary, op.text, {op.line, op.column}, {lhs, rhs});
    }
    return lhs;
  }

  bool at_cast() const {
    if (!is("(")) return false;
    std::size_t k = 1;
    bool any = false;
    while (peek(k).kind == TokKind::Ident &&
           (kTypeWords.count(peek(k).text) || peek(k).text == "const")) {
      ++k;
      any = true;
    }
    if (!any) return false;
    while (is_at(k, "*")) ++k;
    return is_at(k, ")");
  }

  ExprPtr unary() {
    if (cur().kind == TokKind::Punct) {
      const std::string& t = cur().text;
      if (t == "-" || t == "+" || t == "!" || t == "~" || t == "*" || t == "&" || t == "++" || t == "--") {
        Token op = take();
        ExprPtr operand = unary();
        return make(Expr::Kind::Unary, op.text, {op.line, op.column}, {operand});
      }
      if (at_cast()) {
        Token open = take();
        std::vector<std::string> words;
        while (!is(")")) words.push_back(take().text);
        take();
        std::string type;
        for (const auto& w : words) {
          if (w == "*") {
            type += "*";
          } else {
            if (!type.empty()) type += ' ';
            type += w;
          }
        }
        ExprPtr operand = unary();
        return make(Expr::Kind::Cast, type, {open.line, open.column}, {operand});
      }
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (true) {
      if (is("[")) {
        Token t = take();
        ExprPtr idx = expression();
        expect("]");
        e = make(Expr::Kind::Index, "", {t.line, t.column}, {e, idx});
      } else if (is("(")) {
        Token t = take();
        std::vector<ExprPtr> kids{e};
        if (!is(")")) {
          kids.push_back(assignment());
          while (is(",")) {
            take();
            kids.push_back(assignment());
          }
        }
        expect(")");
        e = make(Expr::Kind::Call, "", e->pos, std::move(kids));
      } else if (is(".") || is("->")) {
        Token t = take();
        std::string name = expect_ident();
        auto m = make(Expr::Kind::Member, name, {t.line, t.column}, {e});
        std::const_pointer_cast<Expr>(m)->arrow = t.text == "->";
        e = m;
      } else if (is("++") || is("--")) {
        Token t = take();
        e = make(Expr::Kind::Postfix, t.text, {t.line, t.column}, {e});
      } else {
        return e;
      }
    }
  }

  ExprPtr primary() {
    const Token& t = cur();
    SourcePos pos{t.line, t.column};
    switch (t.kind) {
      case TokKind::Int: return make(Expr::Kind::Int, take().text, pos);
      case TokKind::Float: return make(Expr::Kind::Float, take().text, pos);
      case TokKind::String: return make(Expr::Kind::String, take().text, pos);
      case TokKind::Char: return make(Expr::Kind::Char, take().text, pos);
      case TokKind::Ident: {
        if (kUnsupported.count(t.text)) unsupported(t, t.text);
        std::string name = take().text;
        while (is("::") && peek().kind == TokKind::Ident) {
          take();
          name += "::" + take().text;
        }
        return make(Expr::Kind::Ident, name, pos);
      }
      case TokKind::Punct:
        if (t.text == "(") {
          take();
          ExprPtr e = expression();
          expect(")");
          return e;
        }
        break;
      default: break;
    }
    if (t.kind == TokKind::End) error(t, "unexpected end of input");
    error(t, "unexpected '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  SourceUnit& unit_;
  std::set<std::string, std::less<>> classes_;
  std::vector<std::string> loop_indices_;
  std::vector<OwnToken>* sink_ = nullptr;
  TokenRole role_ = TokenRole::Plain;
  SourcePos last_;
  int next_id_ = 1;
};

}  // namespace

SourceUnit parse_source(std::string_view text, std::string file_name) {
  SourceUnit unit;
  unit.file_name = std::move(file_name);
  try {
    auto toks = detail::tokenize(text, &unit.line_count);
    Parser(std::move(toks), unit).run();
  } catch (const Error& e) {
    std::string msg = e.what();
    if (msg.rfind(unit.file_name + ":", 0) != 0 && e.code() != ErrorCode::MalformedAnnotation &&
        e.code() != ErrorCode::UnknownAnnotationKey) {
      msg = unit.file_name + ":" + msg;
    } else if (msg.rfind(unit.file_name + ":", 0) != 0) {
      msg = unit.file_name + ": " + msg;
    }
    throw Error(e.code(), msg);
  }
  return unit;
}

}  // namespace statmodel::frontend
