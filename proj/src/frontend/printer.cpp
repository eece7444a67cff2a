#include <set>
#include <sstream>

#include "statmodel/frontend/ast.hpp"

namespace statmodel::frontend {

std::string print_expr(const Expr& e) {
  using K = Expr::Kind;
  auto kid = [&e](std::size_t i) { return print_expr(*e.kids[i]); };
  switch (e.kind) {
    case K::Int:
    case K::Float:
    case K::String:
    case K::Char:
    case K::Ident: return e.text;
    case K::Unary: return "(" + e.text + kid(0) + ")";
    case K::Postfix: return "(" + kid(0) + e.text + ")";
    case K::Binary: return "(" + kid(0) + " " + e.text + " " + kid(1) + ")";
    case K::Assign: return "(" + kid(0) + " " + e.text + " " + kid(1) + ")";
    case K::Index: return kid(0) + "[" + kid(1) + "]";
    case K::Call: {
      std::string out = kid(0) + "(";
      for (std::size_t i = 1; i < e.kids.size(); ++i) {
        if (i > 1) out += ", ";
        out += kid(i);
      }
      return out + ")";
    }
    case K::Member: return kid(0) + (e.arrow ? "->" : ".") + e.text;
    case K::Ternary: return "(" + kid(0) + " ? " + kid(1) + " : " + kid(2) + ")";
    case K::Cast: return "((" + e.text + ")" + kid(0) + ")";
  }
  return "";
}

namespace {

std::string print_decl(const Decl& d) {
  std::string out = d.type + " ";
  for (std::size_t i = 0; i < d.declarators.size(); ++i) {
    const auto& x = d.declarators[i];
    if (i > 0) out += ", ";
    out += std::string(static_cast<std::size_t>(x.pointer_depth), '*');
    if (x.reference) out += "&";
    out += x.name;
    for (const auto& dim : x.dims) out += "[" + (dim ? print_expr(*dim) : "") + "]";
    if (x.init) out += " = " + print_expr(*x.init);
    if (x.has_ctor_call) {
      out += "(";
      for (std::size_t k = 0; k < x.ctor_args.size(); ++k) {
        if (k > 0) out += ", ";
        out += print_expr(*x.ctor_args[k]);
      }
      out += ")";
    }
  }
  return out;
}

void print_stmt(std::ostringstream& os, const Stmt& s, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  if (!s.annotations.empty()) {
    os << pad << "#pragma @Annotation {";
    for (std::size_t i = 0; i < s.annotations.size(); ++i) {
      if (i > 0) os << ",";
      os << format_annotation(s.annotations[i]);
    }
    os << "}\n";
  }
  if (const auto* b = s.as<Block>()) {
    os << pad << "{\n";
    for (const auto& c : b->stmts) print_stmt(os, *c, depth + 1);
    os << pad << "}\n";
  } else if (const auto* f = s.as<ForLoop>()) {
    os << pad << "for (";
    if (const auto* d = std::get_if<Decl>(&f->init)) os << print_decl(*d);
    if (const auto* e = std::get_if<ExprPtr>(&f->init)) os << print_expr(**e);
    os << "; " << (f->cond ? print_expr(*f->cond) : "") << "; " << (f->step ? print_expr(*f->step) : "")
       << ")\n";
    print_stmt(os, *f->body, depth + 1);
  } else if (const auto* i = s.as<IfStmt>()) {
    os << pad << "if (" << print_expr(*i->cond) << ")\n";
    print_stmt(os, *i->then_branch, depth + 1);
    if (i->else_branch) {
      os << pad << "else\n";
      print_stmt(os, *i->else_branch, depth + 1);
    }
  } else if (const auto* e = s.as<ExprStmt>()) {
    os << pad << print_expr(*e->expr) << ";\n";
  } else if (const auto* c = s.as<CallStmt>()) {
    os << pad << print_expr(*c->expr) << ";\n";
  } else if (const auto* d = s.as<Decl>()) {
    os << pad << print_decl(*d) << ";\n";
  } else if (const auto* r = s.as<ReturnStmt>()) {
    os << pad << "return" << (r->value ? " " + print_expr(*r->value) : "") << ";\n";
  }
}

std::string print_param(const Param& p) {
  std::string type = p.type;
  std::string dims;
  while (type.size() >= 2 && type.compare(type.size() - 2, 2, "[]") == 0) {
    type.resize(type.size() - 2);
    dims += "[]";
  }
  return type + (p.name.empty() ? "" : " " + p.name) + dims;
}

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->text != b->text || a->arrow != b->arrow || a->kids.size() != b->kids.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a->kids.size(); ++i) {
    if (!same_expr(a->kids[i], b->kids[i])) return false;
  }
  return true;
}

bool same_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_expr(a[i], b[i])) return false;
  }
  return true;
}

bool same_decl(const Decl& a, const Decl& b) {
  if (a.type != b.type || a.declarators.size() != b.declarators.size()) return false;
  for (std::size_t i = 0; i < a.declarators.size(); ++i) {
    const auto& x = a.declarators[i];
    const auto& y = b.declarators[i];
    if (x.name != y.name || x.pointer_depth != y.pointer_depth || x.reference != y.reference ||
        x.has_ctor_call != y.has_ctor_call || !same_exprs(x.dims, y.dims) || !same_expr(x.init, y.init) ||
        !same_exprs(x.ctor_args, y.ctor_args)) {
      return false;
    }
  }
  return true;
}

bool same_stmt(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->node.index() != b->node.index() || a->annotations != b->annotations) return false;
  if (const auto* x = a->as<Block>()) {
    const auto& y = *b->as<Block>();
    if (x->stmts.size() != y.stmts.size()) return false;
    for (std::size_t i = 0; i < x->stmts.size(); ++i) {
      if (!same_stmt(x->stmts[i], y.stmts[i])) return false;
    }
    return true;
  }
  if (const auto* x = a->as<ForLoop>()) {
    const auto& y = *b->as<ForLoop>();
    if (x->init.index() != y.init.index()) return false;
    if (const auto* d = std::get_if<Decl>(&x->init); d && !same_decl(*d, std::get<Decl>(y.init))) return false;
    if (const auto* e = std::get_if<ExprPtr>(&x->init); e && !same_expr(*e, std::get<ExprPtr>(y.init))) {
      return false;
    }
    return same_expr(x->cond, y.cond) && same_expr(x->step, y.step) && same_stmt(x->body, y.body);
  }
  if (const auto* x = a->as<IfStmt>()) {
    const auto& y = *b->as<IfStmt>();
    return same_expr(x->cond, y.cond) && same_stmt(x->then_branch, y.then_branch) &&
           same_stmt(x->else_branch, y.else_branch);
  }
  if (const auto* x = a->as<ExprStmt>()) return same_expr(x->expr, b->as<ExprStmt>()->expr);
  if (const auto* x = a->as<CallStmt>()) {
    const auto& y = *b->as<CallStmt>();
    return x->callee == y.callee && same_expr(x->expr, y.expr);
  }
  if (const auto* x = a->as<Decl>()) return same_decl(*x, *b->as<Decl>());
  if (const auto* x = a->as<ReturnStmt>()) return same_expr(x->value, b->as<ReturnStmt>()->value);
  return false;
}

}  // namespace

std::string print_source(const SourceUnit& unit) {
  std::ostringstream os;
  std::set<std::string> classes;
  for (const auto& f : unit.functions) {
    if (f.class_name && classes.insert(*f.class_name).second) os << "class " << *f.class_name << ";\n";
  }
  for (const auto& g : unit.globals) os << "int " << g << ";\n";
  for (const auto& f : unit.functions) {
    bool special = f.class_name && (f.name == *f.class_name || f.name.rfind('~', 0) == 0);
    os << "\n";
    if (!special) os << "void ";
    if (f.class_name) os << *f.class_name << "::";
    os << f.name << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i > 0) os << ", ";
      os << print_param(f.params[i]);
    }
    os << ")\n";
    print_stmt(os, *f.body, 0);
  }
  return os.str();
}

bool same_structure(const SourceUnit& a, const SourceUnit& b) {
  if (a.functions.size() != b.functions.size() || a.globals != b.globals) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const auto& f = a.functions[i];
    const auto& g = b.functions[i];
    if (f.name != g.name || f.class_name != g.class_name || f.arity != g.arity ||
        f.params.size() != g.params.size()) {
      return false;
    }
    for (std::size_t k = 0; k < f.params.size(); ++k) {
      if (f.params[k].name != g.params[k].name || f.params[k].type != g.params[k].type) return false;
    }
    if (!same_stmt(f.body, g.body)) return false;
  }
  return true;
}

}  // namespace statmodel::frontend
