#include "statmodel/poly/count_expr.hpp"

#include <cctype>
#include <limits>
#include <optional>
#include <unordered_map>
#include <utility>

#include "statmodel/error.hpp"

namespace statmodel::poly {

struct CountExpr::Node {
  Kind kind = Kind::Int;
  Int value;
  std::string name;
  std::vector<CountExpr> kids;
  unsigned exp = 0;
  std::int64_t step = 0;
};

namespace {

Int floor_div_int(const Int& a, const Int& d) {
  Int q = a / d;
  if (a % d != 0 && ((a < 0) != (d < 0))) q -= 1;
  return q;
}

// Splits c*rest into (c, rest).
std::pair<Int, CountExpr> split_coefficient(const CountExpr& term) {
  if (term.kind() == CountExpr::Kind::Mul) {
    auto ops = term.operands();
    if (!ops.empty() && ops[0].is_constant()) {
      std::vector<CountExpr> rest(ops.begin() + 1, ops.end());
      if (rest.size() == 1) return {ops[0].value(), rest[0]};
      return {ops[0].value(), CountExpr::product(std::move(rest))};
    }
  }
  return {Int(1), term};
}

struct Env {
  const ParamBinding& params;
  std::vector<std::pair<const std::string*, std::int64_t>> locals;

  std::int64_t lookup(const std::string& name) const {
    for (auto it = locals.rbegin(); it != locals.rend(); ++it) {
      if (*it->first == name) return it->second;
    }
    auto p = params.find(name);
    if (p == params.end()) {
      throw Error(ErrorCode::UnboundParameter, "no value bound for parameter '" + name + "'");
    }
    return p->second;
  }
};

std::int64_t to_int64_checked(const Int& v, const char* what) {
  if (!fits_int64(v)) {
    throw Error(ErrorCode::EnumerationTooLarge,
                std::string("lazy summation ") + what + " out of 64-bit range");
  }
  return static_cast<std::int64_t>(v);
}

Int eval(const CountExpr& e, Env& env) {
  using K = CountExpr::Kind;
  switch (e.kind()) {
    case K::Int:
      return e.value();
    case K::Param:
      return Int(env.lookup(e.name()));
    case K::Add: {
      Int acc = 0;
      for (const auto& k : e.operands()) acc += eval(k, env);
      return acc;
    }
    case K::Mul: {
      Int acc = 1;
      for (const auto& k : e.operands()) {
        acc *= eval(k, env);
        if (acc == 0) break;
      }
      return acc;
    }
    case K::Pow:
      return boost::multiprecision::pow(eval(e.operands()[0], env), e.exponent());
    case K::FloorDiv:
      return floor_div_int(eval(e.operands()[0], env), e.divisor());
    case K::Max0: {
      Int v = eval(e.operands()[0], env);
      return v < 0 ? Int(0) : v;
    }
    case K::LazySum: {
      auto ops = e.operands();
      std::int64_t lo = to_int64_checked(eval(ops[0], env), "lower bound");
      std::int64_t hi = to_int64_checked(eval(ops[1], env), "upper bound");
      Int acc = 0;
      env.locals.emplace_back(&e.name(), 0);
      for (std::int64_t v = lo; v <= hi; v += e.step()) {
        env.locals.back().second = v;
        acc += eval(ops[2], env);
      }
      env.locals.pop_back();
      return acc;
    }
  }
  return 0;
}

void collect_free(const CountExpr& e, std::set<std::string>& out) {
  using K = CountExpr::Kind;
  switch (e.kind()) {
    case K::Int:
      return;
    case K::Param:
      out.insert(e.name());
      return;
    case K::LazySum: {
      auto ops = e.operands();
      collect_free(ops[0], out);
      collect_free(ops[1], out);
      std::set<std::string> inner;
      collect_free(ops[2], inner);
      inner.erase(e.name());
      out.insert(inner.begin(), inner.end());
      return;
    }
    default:
      for (const auto& k : e.operands()) collect_free(k, out);
  }
}

void write_sexpr(const CountExpr& e, std::string& out) {
  using K = CountExpr::Kind;
  switch (e.kind()) {
    case K::Int:
      out += "(int ";
      out += e.value().str();
      out += ')';
      return;
    case K::Param:
      out += "(param ";
      out += e.name();
      out += ')';
      return;
    case K::Add:
    case K::Mul:
      out += e.kind() == K::Add ? "(add" : "(mul";
      for (const auto& k : e.operands()) {
        out += ' ';
        write_sexpr(k, out);
      }
      out += ')';
      return;
    case K::Pow:
      out += "(pow ";
      write_sexpr(e.operands()[0], out);
      out += ' ' + std::to_string(e.exponent()) + ')';
      return;
    case K::FloorDiv:
      out += "(floordiv ";
      write_sexpr(e.operands()[0], out);
      out += ' ' + e.divisor().str() + ')';
      return;
    case K::Max0:
      out += "(max0 ";
      write_sexpr(e.operands()[0], out);
      out += ')';
      return;
    case K::LazySum: {
      auto ops = e.operands();
      out += "(lazysum " + e.name() + ' ';
      write_sexpr(ops[0], out);
      out += ' ';
      write_sexpr(ops[1], out);
      out += ' ' + std::to_string(e.step()) + ' ';
      write_sexpr(ops[2], out);
      out += ')';
      return;
    }
  }
}

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  CountExpr parse_all() {
    CountExpr e = parse();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedModel,
                "count expression: " + what + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  std::string atom() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) fail("expected atom");
    return std::string(text_.substr(start, pos_ - start));
  }

  Int integer() {
    std::string a = atom();
    std::size_t i = (a[0] == '-') ? 1 : 0;
    if (i == a.size()) fail("bad integer '" + a + "'");
    for (; i < a.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(a[i]))) fail("bad integer '" + a + "'");
    }
    return Int(a);
  }

  std::int64_t small_integer() {
    Int v = integer();
    if (!fits_int64(v)) fail("integer out of range");
    return static_cast<std::int64_t>(v);
  }

  CountExpr parse() {
    expect('(');
    std::string head = atom();
    CountExpr result;
    if (head == "int") {
      result = CountExpr::constant(integer());
    } else if (head == "param") {
      result = CountExpr::param(atom());
    } else if (head == "add" || head == "mul") {
      std::vector<CountExpr> kids;
      while (!peek(')')) kids.push_back(parse());
      if (kids.empty()) fail(head + " needs operands");
      result = head == "add" ? CountExpr::sum(std::move(kids)) : CountExpr::product(std::move(kids));
    } else if (head == "pow") {
      CountExpr base = parse();
      std::int64_t k = small_integer();
      if (k < 0) fail("negative exponent");
      result = CountExpr::power(base, static_cast<unsigned>(k));
    } else if (head == "floordiv") {
      CountExpr num = parse();
      Int d = integer();
      if (d <= 0) fail("floordiv divisor must be positive");
      result = CountExpr::floor_div(num, d);
    } else if (head == "max0") {
      result = CountExpr::max0(parse());
    } else if (head == "lazysum") {
      std::string var = atom();
      CountExpr lo = parse();
      CountExpr hi = parse();
      std::int64_t step = small_integer();
      if (step <= 0) fail("lazysum step must be positive");
      CountExpr body = parse();
      result = CountExpr::lazy_sum(var, lo, hi, step, body);
    } else {
      fail("unknown node '" + head + "'");
    }
    expect(')');
    return result;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

bool fits_int64(const Int& v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

CountExpr::CountExpr() {
  static const auto zero = std::make_shared<const Node>();
  node_ = zero;
}

CountExpr CountExpr::constant(Int value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Int;
  n->value = std::move(value);
  return CountExpr(std::move(n));
}

CountExpr CountExpr::param(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Param;
  n->name = std::move(name);
  return CountExpr(std::move(n));
}

CountExpr CountExpr::sum(std::vector<CountExpr> terms) {
  std::vector<CountExpr> flat;
  for (auto& t : terms) {
    if (t.kind() == Kind::Add) {
      for (const auto& k : t.operands()) flat.push_back(k);
    } else {
      flat.push_back(std::move(t));
    }
  }

  Int constant_part = 0;
  std::vector<std::pair<Int, CountExpr>> merged;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& t : flat) {
    if (t.is_constant()) {
      constant_part += t.value();
      continue;
    }
    auto [c, rest] = split_coefficient(t);
    std::string key = rest.to_sexpr();
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(std::move(key), merged.size());
      merged.emplace_back(c, rest);
    } else {
      merged[it->second].first += c;
    }
  }

  std::vector<CountExpr> kids;
  for (auto& [c, rest] : merged) {
    if (c == 0) continue;
    kids.push_back(c == 1 ? rest : product({constant(c), rest}));
  }
  if (constant_part != 0) kids.push_back(constant(constant_part));
  if (kids.empty()) return constant(0);
  if (kids.size() == 1) return kids[0];

  auto n = std::make_shared<Node>();
  n->kind = Kind::Add;
  n->kids = std::move(kids);
  return CountExpr(std::move(n));
}

CountExpr CountExpr::product(std::vector<CountExpr> factors) {
  Int c = 1;
  std::vector<CountExpr> rest;
  for (auto& f : factors) {
    if (f.kind() == Kind::Mul) {
      for (const auto& k : f.operands()) {
        if (k.is_constant()) {
          c *= k.value();
        } else {
          rest.push_back(k);
        }
      }
    } else if (f.is_constant()) {
      c *= f.value();
    } else {
      rest.push_back(std::move(f));
    }
  }
  if (c == 0 || rest.empty()) return constant(c);
  if (c == 1 && rest.size() == 1) return rest[0];

  auto n = std::make_shared<Node>();
  n->kind = Kind::Mul;
  if (c != 1) n->kids.push_back(constant(c));
  for (auto& r : rest) n->kids.push_back(std::move(r));
  return CountExpr(std::move(n));
}

CountExpr CountExpr::power(CountExpr base, unsigned exponent) {
  if (exponent == 0) return constant(1);
  if (exponent == 1) return base;
  if (base.is_constant()) return constant(boost::multiprecision::pow(base.value(), exponent));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pow;
  n->kids.push_back(std::move(base));
  n->exp = exponent;
  return CountExpr(std::move(n));
}

CountExpr CountExpr::floor_div(CountExpr numerator, Int divisor) {
  if (divisor <= 0) {
    throw std::invalid_argument("CountExpr::floor_div: divisor must be positive");
  }
  if (divisor == 1) return numerator;
  if (numerator.is_constant()) return constant(floor_div_int(numerator.value(), divisor));
  auto n = std::make_shared<Node>();
  n->kind = Kind::FloorDiv;
  n->kids.push_back(std::move(numerator));
  n->value = std::move(divisor);
  return CountExpr(std::move(n));
}

CountExpr CountExpr::max0(CountExpr arg) {
  if (arg.is_constant()) return constant(arg.value() < 0 ? Int(0) : arg.value());
  if (arg.kind() == Kind::Max0) return arg;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Max0;
  n->kids.push_back(std::move(arg));
  return CountExpr(std::move(n));
}

CountExpr CountExpr::lazy_sum(std::string var, CountExpr lower, CountExpr upper,
                              std::int64_t step, CountExpr body) {
  if (step <= 0) throw std::invalid_argument("CountExpr::lazy_sum: step must be positive");
  if (body.is_constant() && body.value() == 0) return constant(0);
  if (!body.depends_on(var)) {
    // Constant body: extent times body.
    CountExpr extent = max0(floor_div(upper - lower, step) + constant(1));
    return product({extent, body});
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::LazySum;
  n->name = std::move(var);
  n->kids = {std::move(lower), std::move(upper), std::move(body)};
  n->step = step;
  return CountExpr(std::move(n));
}

CountExpr CountExpr::from_affine(const AffineExpr& e) {
  std::vector<CountExpr> terms;
  for (const auto& [name, c] : e.terms()) {
    terms.push_back(product({constant(c), param(name)}));
  }
  terms.push_back(constant(e.constant()));
  return sum(std::move(terms));
}

CountExpr::Kind CountExpr::kind() const { return node_->kind; }
const Int& CountExpr::value() const { return node_->value; }
const std::string& CountExpr::name() const { return node_->name; }
std::span<const CountExpr> CountExpr::operands() const { return node_->kids; }
unsigned CountExpr::exponent() const { return node_->exp; }
const Int& CountExpr::divisor() const { return node_->value; }
std::int64_t CountExpr::step() const { return node_->step; }

std::set<std::string> CountExpr::free_params() const {
  std::set<std::string> out;
  collect_free(*this, out);
  return out;
}

bool CountExpr::depends_on(std::string_view var) const {
  auto p = free_params();
  return p.find(std::string(var)) != p.end();
}

Int CountExpr::evaluate(const ParamBinding& binding) const {
  Env env{binding, {}};
  return eval(*this, env);
}

std::string CountExpr::to_sexpr() const {
  std::string out;
  write_sexpr(*this, out);
  return out;
}

CountExpr CountExpr::parse_sexpr(std::string_view text) { return SexprParser(text).parse_all(); }

bool operator==(const CountExpr& a, const CountExpr& b) {
  return a.node_ == b.node_ || a.to_sexpr() == b.to_sexpr();
}

}  // namespace statmodel::poly
