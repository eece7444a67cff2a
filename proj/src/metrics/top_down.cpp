#include <algorithm>
#include <functional>
#include <set>

#include "statmodel/error.hpp"
#include "statmodel/metrics/metrics.hpp"

namespace statmodel::metrics {

using binary::LineKey;
using binary::MappedInstruction;
using frontend::Annotation;
using frontend::AnnotationKind;
using frontend::Expr;
using frontend::ExprPtr;
using frontend::ForLoop;
using frontend::FunctionDecl;
using frontend::IfStmt;
using frontend::SourceUnit;
using frontend::Stmt;
using frontend::StmtPtr;
using frontend::TokenRole;

namespace {

// Which execution count an instruction of a statement follows.
enum class Slot { Own, LoopOut, LoopCond, LoopBody };

using CatCounts = std::map<CategoryId, std::int64_t>;

struct FunctionInfo {
  const SourceUnit* unit = nullptr;
  const FunctionDecl* fn = nullptr;
  std::string mangled;
  std::string base;  // file basename
  int first_line = 0;
  int last_line = 0;
};

struct ResolvedCall {
  std::string callee;
  bool external = true;
  int line = 0;
  Slot slot = Slot::Own;
  std::vector<ExprPtr> args;
};

const Annotation* find_annotation(const Stmt& s, AnnotationKind kind) {
  for (const auto& a : s.annotations) {
    if (a.kind == kind) return &a;
  }
  return nullptr;
}

std::string strip_type(std::string t) {
  for (const char* q : {"const ", "volatile ", "struct ", "class "}) {
    for (auto p = t.find(q); p != std::string::npos; p = t.find(q)) t.erase(p, std::string(q).size());
  }
  while (!t.empty() && (t.back() == '*' || t.back() == '&' || t.back() == ' ')) t.pop_back();
  return t;
}

// Calls appearing in the statement's own expressions, tagged with the loop
// header part they belong to.
std::vector<std::pair<const Expr*, Slot>> own_calls(const Stmt& s) {
  std::vector<std::pair<const Expr*, Slot>> out;
  auto scan = [&](const ExprPtr& e, Slot slot) {
    frontend::walk_exprs(e, [&](const Expr& x) {
      if (x.kind == Expr::Kind::Call) out.emplace_back(&x, slot);
    });
  };
  auto scan_decl = [&](const frontend::Decl& d, Slot slot) {
    for (const auto& dc : d.declarators) {
      for (const auto& e : dc.dims) scan(e, slot);
      scan(dc.init, slot);
      for (const auto& e : dc.ctor_args) scan(e, slot);
    }
  };
  if (const auto* f = s.as<ForLoop>()) {
    if (const auto* d = std::get_if<frontend::Decl>(&f->init)) scan_decl(*d, Slot::LoopOut);
    if (const auto* e = std::get_if<ExprPtr>(&f->init)) scan(*e, Slot::LoopOut);
    scan(f->cond, Slot::LoopCond);
    scan(f->step, Slot::LoopBody);
  } else if (const auto* i = s.as<IfStmt>()) {
    scan(i->cond, Slot::Own);
  } else if (const auto* e = s.as<frontend::ExprStmt>()) {
    scan(e->expr, Slot::Own);
  } else if (const auto* c = s.as<frontend::CallStmt>()) {
    scan(c->expr, Slot::Own);
  } else if (const auto* d = s.as<frontend::Decl>()) {
    scan_decl(*d, Slot::Own);
  } else if (const auto* r = s.as<frontend::ReturnStmt>()) {
    scan(r->value, Slot::Own);
  }
  return out;
}

class Analyzer {
 public:
  Analyzer(const std::vector<SourceUnit>& units, const binary::LineMap& line_map, const binary::ArchDescription& arch)
      : units_(units), line_map_(line_map), arch_(arch) {}

  TopDownResult run() {
    register_functions();
    attribute_instructions();
    resolve_calls();
    order_functions();
    for (const auto& name : order_) result_.functions.push_back(analyze(infos_.at(name)));
    return std::move(result_);
  }

 private:
  // Per function: statement id -> slot -> category counts, plus the
  // function-level remainder (prologue, braces outside statements).
  struct Attribution {
    std::map<std::pair<int, Slot>, CatCounts> by_stmt;
    CatCounts function_level;
  };

  void finding(Finding::Kind kind, const std::string& file, int line, std::string msg,
               const std::string& function = {}) {
    Finding f{kind, file, line, std::move(msg)};
    if (!function.empty()) notes_[function].push_back(f);
    result_.findings.push_back(std::move(f));
  }

  void register_functions() {
    for (const auto& u : units_) {
      for (const auto& fn : u.functions) {
        FunctionInfo info;
        info.unit = &u;
        info.fn = &fn;
        info.mangled = fn.mangled_name();
        info.base = binary::path_basename(u.file_name);
        info.first_line = fn.line;
        info.last_line = fn.body ? fn.body->end.line : fn.line;
        if (infos_.count(info.mangled)) {
          throw Error(ErrorCode::DuplicateFunction, "function '" + info.mangled + "' is defined twice (" +
                                                        infos_.at(info.mangled).unit->file_name + ", " +
                                                        u.file_name + ")");
        }
        source_order_.push_back(info.mangled);
        infos_.emplace(info.mangled, info);
      }
    }
  }

  const FunctionInfo* function_at(const std::string& base, int line) const {
    const FunctionInfo* best = nullptr;
    for (const auto& name : source_order_) {
      const auto& info = infos_.at(name);
      if (info.base == base && info.first_line <= line && line <= info.last_line) {
        // Innermost wins when ranges nest (e.g. methods defined in a class body).
        if (!best || info.first_line >= best->first_line) best = &info;
      }
    }
    return best;
  }

  void attribute_instructions() {
    std::size_t no_line = 0, outside = 0;
    std::map<std::string, std::vector<std::pair<int, const std::vector<MappedInstruction>*>>> per_fn;
    for (const auto& [key, instrs] : line_map_) {
      if (key == binary::kUnattributed) {
        no_line += instrs.size();
        continue;
      }
      const FunctionInfo* info = function_at(key.file, static_cast<int>(key.line));
      if (!info) {
        bool known_file = false;
        for (const auto& u : units_) known_file = known_file || binary::path_basename(u.file_name) == key.file;
        if (known_file) outside += instrs.size();
        continue;
      }
      per_fn[info->mangled].emplace_back(static_cast<int>(key.line), &instrs);
    }
    if (no_line) finding(Finding::Kind::Unattributed, "", 0, std::to_string(no_line) + " instructions have no source line");
    if (outside) {
      finding(Finding::Kind::Unattributed, "", 0,
              std::to_string(outside) + " instructions map to source lines outside every analyzed function");
    }
    for (const auto& name : source_order_) attribute_function(infos_.at(name), per_fn[name]);
  }

  struct OwnerTok {
    int column;
    const Stmt* stmt;
    TokenRole role;
  };

  static Slot slot_for(const Stmt& s, TokenRole role) {
    if (!s.as<ForLoop>()) return Slot::Own;
    switch (role) {
      case TokenRole::ForCond: return Slot::LoopCond;
      case TokenRole::ForStep: return Slot::LoopBody;
      default: return Slot::LoopOut;
    }
  }

  void attribute_function(const FunctionInfo& info,
                          const std::vector<std::pair<int, const std::vector<MappedInstruction>*>>& lines) {
    Attribution& att = attribution_[info.mangled];
    std::map<int, std::vector<OwnerTok>> toks;
    std::vector<const Stmt*> all;
    frontend::walk_stmts(info.fn->body, [&](const StmtPtr& s) {
      all.push_back(s.get());
      for (const auto& t : s->own_tokens) toks[t.pos.line].push_back({t.pos.column, s.get(), t.role});
    });
    for (auto& [line, v] : toks) {
      std::stable_sort(v.begin(), v.end(), [](const OwnerTok& a, const OwnerTok& b) { return a.column < b.column; });
    }

    for (const auto& [line, instrs] : lines) {
      auto it = toks.find(line);
      if (it == toks.end()) {
        // No statement has a token here: the innermost statement spanning
        // the line, else the function itself.
        const Stmt* owner = nullptr;
        for (const Stmt* s : all) {
          if (s->begin.line <= line && line <= s->end.line) owner = s;
        }
        for (const auto& mi : *instrs) {
          auto cat = binary::categorize(mi.instr.mnemonic, arch_);
          if (owner) {
            att.by_stmt[{owner->id, owner->as<ForLoop>() ? Slot::LoopBody : Slot::Own}][cat]++;
          } else {
            att.function_level[cat]++;
          }
        }
        continue;
      }
      const auto& v = it->second;
      std::vector<const Stmt*> owners;
      for (const auto& t : v) {
        if (std::find(owners.begin(), owners.end(), t.stmt) == owners.end()) owners.push_back(t.stmt);
      }
      CatCounts shared;
      for (const auto& mi : *instrs) {
        auto cat = binary::categorize(mi.instr.mnemonic, arch_);
        if (mi.column == 0) {
          if (owners.size() == 1) {
            att.by_stmt[{owners[0]->id, owners[0]->as<ForLoop>() ? Slot::LoopBody : Slot::Own}][cat]++;
          } else {
            shared[cat]++;
          }
          continue;
        }
        const OwnerTok* pick = &v.front();
        for (const auto& t : v) {
          if (t.column <= static_cast<int>(mi.column)) pick = &t;
        }
        att.by_stmt[{pick->stmt->id, slot_for(*pick->stmt, pick->role)}][cat]++;
      }
      if (!shared.empty()) {
        // Even split; the remainder goes to the earliest statements.
        const auto k = static_cast<std::int64_t>(owners.size());
        for (const auto& [cat, n] : shared) {
          for (std::int64_t i = 0; i < k; ++i) {
            const Stmt* s = owners[static_cast<std::size_t>(i)];
            std::int64_t part = n / k + (i < n % k ? 1 : 0);
            if (part) att.by_stmt[{s->id, s->as<ForLoop>() ? Slot::LoopBody : Slot::Own}][cat] += part;
          }
        }
        finding(Finding::Kind::SharedLine, info.unit->file_name, line,
                "instructions without a column are split across " + std::to_string(k) + " statements",
                info.mangled);
      }
    }
  }

  std::optional<std::string> variable_type(const FunctionInfo& info, const std::string& name) const {
    for (const auto& p : info.fn->params) {
      if (p.name == name) return strip_type(p.type);
    }
    std::optional<std::string> found;
    frontend::walk_stmts(info.fn->body, [&](const StmtPtr& s) {
      auto check = [&](const frontend::Decl& d) {
        for (const auto& dc : d.declarators) {
          if (dc.name == name && !found) found = strip_type(d.type);
        }
      };
      if (const auto* d = s->as<frontend::Decl>()) check(*d);
      if (const auto* f = s->as<ForLoop>()) {
        if (const auto* d = std::get_if<frontend::Decl>(&f->init)) check(*d);
      }
    });
    return found;
  }

  ResolvedCall resolve(const FunctionInfo& info, const Expr& call, Slot slot) const {
    ResolvedCall rc;
    rc.line = call.pos.line;
    rc.slot = slot;
    rc.args.assign(call.kids.begin() + 1, call.kids.end());
    const std::string arity = std::to_string(call.kids.size() - 1);
    const Expr& target = *call.kids[0];
    std::string name = target.text;
    if (auto p = name.rfind("::"); p != std::string::npos) {
      std::string cls = name.substr(0, p);
      name = name.substr(p + 2);
      std::string cand = cls + "_" + name + "_" + arity;
      if (infos_.count(cand)) {
        rc.callee = cand;
        rc.external = false;
        return rc;
      }
    }
    std::vector<std::string> candidates;
    if (target.kind == Expr::Kind::Member) {
      const Expr& obj = *target.kids[0];
      if (obj.kind == Expr::Kind::Ident && obj.text == "this" && info.fn->class_name) {
        candidates.push_back(*info.fn->class_name + "_" + name + "_" + arity);
      } else if (obj.kind == Expr::Kind::Ident) {
        if (auto t = variable_type(info, obj.text)) candidates.push_back(*t + "_" + name + "_" + arity);
      }
      // Unknown receiver type: accept a unique method of that name.
      std::string suffix = "_" + name + "_" + arity;
      std::vector<std::string> methods;
      for (const auto& [m, fi] : infos_) {
        if (fi.fn->class_name && *fi.fn->class_name + suffix == m) methods.push_back(m);
      }
      if (methods.size() == 1) candidates.push_back(methods[0]);
    } else {
      if (info.fn->class_name) candidates.push_back(*info.fn->class_name + "_" + name + "_" + arity);
      candidates.push_back(name + "_" + arity);
    }
    for (const auto& c : candidates) {
      if (infos_.count(c)) {
        rc.callee = c;
        rc.external = false;
        return rc;
      }
    }
    rc.callee = name + "_" + arity;
    return rc;
  }

  void resolve_calls() {
    for (const auto& name : source_order_) {
      const auto& info = infos_.at(name);
      frontend::walk_stmts(info.fn->body, [&](const StmtPtr& s) {
        for (const auto& [e, slot] : own_calls(*s)) calls_[name][s->id].push_back(resolve(info, *e, slot));
      });
    }
  }

  // Post-order over the call graph so callees come first; calls closing a
  // cycle are dropped and reported.
  void order_functions() {
    std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
    std::function<void(const std::string&)> dfs = [&](const std::string& f) {
      state[f] = 1;
      auto& sites = calls_[f];
      for (auto& [id, list] : sites) {
        for (auto& rc : list) {
          if (rc.external) continue;
          int st = state[rc.callee];
          if (st == 1) {
            dropped_.insert({f, rc.line, rc.callee});
            finding(Finding::Kind::ModelGap, infos_.at(f).unit->file_name, rc.line,
                    "recursive call to '" + rc.callee + "' is not modeled", f);
          } else if (st == 0) {
            dfs(rc.callee);
          }
        }
      }
      state[f] = 2;
      order_.push_back(f);
    };
    for (const auto& name : source_order_) {
      if (state[name] == 0) dfs(name);
    }
  }

  // Top-down traversal of one function -------------------------------------

  struct FnState {
    const FunctionInfo* info = nullptr;
    FunctionMetrics out;
    std::map<std::string, int> param_lines;
    const Attribution* att = nullptr;
  };

  void note_params(FnState& st, const CountExpr& e, int line) {
    for (const auto& p : e.free_params()) st.param_lines.emplace(p, line);
  }

  void add_counts(FnState& st, const CatCounts& counts, const CountExpr& times, int line) {
    bool any = false;
    for (const auto& [cat, n] : counts) {
      if (n == 0) continue;
      st.out.body.add(cat, CountExpr::constant(n) * times);
      any = true;
    }
    if (any) note_params(st, times, line);
  }

  const CatCounts* counts_of(const FnState& st, int id, Slot slot) const {
    auto it = st.att->by_stmt.find({id, slot});
    return it == st.att->by_stmt.end() ? nullptr : &it->second;
  }

  bool inert(const FnState& st, const StmtPtr& s) const {
    bool active = false;
    std::function<void(const StmtPtr&)> walk = [&](const StmtPtr& x) {
      if (!x || active || find_annotation(*x, AnnotationKind::Skip)) return;
      for (Slot slot : {Slot::Own, Slot::LoopOut, Slot::LoopCond, Slot::LoopBody}) {
        if (counts_of(st, x->id, slot)) active = true;
      }
      auto fc = calls_.find(st.out.mangled_name);
      if (fc != calls_.end() && fc->second.count(x->id)) active = true;
      if (const auto* f = x->as<ForLoop>()) {
        walk(f->body);
      } else if (const auto* i = x->as<IfStmt>()) {
        walk(i->then_branch);
        walk(i->else_branch);
      } else if (const auto* b = x->as<frontend::Block>()) {
        for (const auto& c : b->stmts) walk(c);
      }
    };
    walk(s);
    return !active;
  }

  void record_calls(FnState& st, const Stmt& s, const std::map<Slot, CountExpr>& mult, const Region& region) {
    auto fc = calls_.find(st.out.mangled_name);
    if (fc == calls_.end()) return;
    auto it = fc->second.find(s.id);
    if (it == fc->second.end()) return;
    for (const auto& rc : it->second) {
      if (dropped_.count({st.out.mangled_name, rc.line, rc.callee})) continue;
      CallSite site;
      site.callee = rc.callee;
      site.line = rc.line;
      site.external = rc.external;
      site.iterations = mult.at(rc.slot);
      note_params(st, site.iterations, rc.line);
      if (!rc.external) bind_args(st, site, rc, region);
      if (rc.external && reported_external_.insert(rc.callee).second) {
        finding(Finding::Kind::ExternalCall, st.info->unit->file_name, rc.line,
                "'" + rc.callee + "' has no source; only its call sequence is counted", st.out.mangled_name);
      }
      st.out.call_sites.push_back(std::move(site));
    }
  }

  void bind_args(FnState& st, CallSite& site, const ResolvedCall& rc, const Region& region) {
    const FunctionInfo& callee = infos_.at(rc.callee);
    const FunctionMetrics* cm = nullptr;
    for (const auto& f : result_.functions) {
      if (f.mangled_name == rc.callee) cm = &f;
    }
    if (!cm) return;
    for (const auto& p : cm->params) {
      std::optional<CountExpr> value;
      const auto& formals = callee.fn->params;
      for (std::size_t k = 0; k < formals.size() && k < rc.args.size(); ++k) {
        if (formals[k].name != p.name) continue;
        auto a = frontend::to_affine(*rc.args[k]);
        if (!a.expr) break;
        bool uses_index = false;
        for (const auto& v : a.expr->variables()) {
          uses_index = uses_index || std::find(region.loop_indices.begin(), region.loop_indices.end(), v) !=
                                         region.loop_indices.end();
        }
        if (!uses_index) value = CountExpr::from_affine(*a.expr);
        break;
      }
      // Unbound callee parameters surface in the caller tagged with the call line.
      if (!value) value = CountExpr::param(p.name + "_" + std::to_string(rc.line));
      note_params(st, *value, rc.line);
      site.args.emplace(p.name, *value);
    }
  }

  std::map<Slot, CountExpr> uniform(const CountExpr& m) {
    return {{Slot::Own, m}, {Slot::LoopOut, m}, {Slot::LoopCond, m}, {Slot::LoopBody, m}};
  }

  void gap(FnState& st, const Stmt& s, const std::string& why) {
    finding(Finding::Kind::ModelGap, st.info->unit->file_name, s.begin.line, why, st.out.mangled_name);
  }

  std::optional<Region> loop_region(FnState& st, const Stmt& s, const ForLoop& f, const Region& region) {
    Region body = region;
    if (const auto* iters = find_annotation(s, AnnotationKind::IterationCount)) {
      std::string index = std::visit([](const auto& x) { return x.index; }, f.scop);
      if (!index.empty()) body.loop_indices.push_back(index);
      return with_transform(std::move(body), {Transform::Kind::Times, CountExpr::constant(iters->count()), {}});
    }
    const auto* lp_init = find_annotation(s, AnnotationKind::LpInit);
    const auto* lp_cond = find_annotation(s, AnnotationKind::LpCond);

    frontend::LoopSCoP scop;
    if (const auto* ok = std::get_if<frontend::LoopSCoP>(&f.scop)) {
      scop = *ok;
    } else {
      const auto& fail = std::get<frontend::ScopFailure>(f.scop);
      bool lower_ok = fail.lower || lp_init;
      bool upper_ok = fail.upper || lp_cond;
      if (fail.index.empty() || !fail.step || !lower_ok || !upper_ok) {
        gap(st, s, "loop is not affine (" + fail.reason + ") and has no usable annotation");
        return std::nullopt;
      }
      scop.index = fail.index;
      scop.step = *fail.step;
      if (fail.lower) scop.lower = *fail.lower;
      if (fail.upper) scop.upper = *fail.upper;
      scop.params = fail.params;
      scop.comparison = fail.comparison.value_or(*fail.step > 0 ? frontend::Comparison::LessEqual
                                                                : frontend::Comparison::GreaterEqual);
    }
    if (lp_init) {
      scop.lower = AffineExpr::variable(lp_init->identifier());
      scop.params.insert(lp_init->identifier());
    }
    if (lp_cond) {
      scop.upper = frontend::normalize_upper(scop.comparison, AffineExpr::variable(lp_cond->identifier()));
      scop.params.insert(lp_cond->identifier());
    }
    try {
      poly::append_level(body.domain, scop);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonAffineBound) throw;
      gap(st, s, e.what());
      return std::nullopt;
    }
    body.loop_indices.push_back(scop.index);
    return body;
  }

  void visit(FnState& st, const StmtPtr& sp, const Region& region) {
    if (!sp) return;
    const Stmt& s = *sp;
    if (find_annotation(s, AnnotationKind::Skip)) return;
    const int line = s.begin.line;

    if (const auto* f = s.as<ForLoop>()) {
      auto body = loop_region(st, s, *f, region);
      if (!body) return;
      CountExpr out = multiplier(region);
      CountExpr in = multiplier(*body);
      std::map<Slot, CountExpr> m = {
          {Slot::Own, out}, {Slot::LoopOut, out}, {Slot::LoopCond, out + in}, {Slot::LoopBody, in}};
      for (const auto& [slot, times] : m) {
        if (const auto* c = counts_of(st, s.id, slot)) add_counts(st, *c, times, line);
      }
      record_calls(st, s, m, region);
      visit(st, f->body, *body);
      return;
    }

    CountExpr here = multiplier(region);
    if (const auto* c = counts_of(st, s.id, Slot::Own)) add_counts(st, *c, here, line);
    record_calls(st, s, uniform(here), region);

    if (const auto* i = s.as<IfStmt>()) {
      BranchSplit split = handle_branch(*i->cond, s.annotations, region);
      if (split.strategy == BranchStrategy::Gap || split.strategy == BranchStrategy::Unsplit) {
        if (inert(st, i->then_branch) && inert(st, i->else_branch)) {
          visit(st, i->then_branch, region);
          visit(st, i->else_branch, region);
          return;
        }
        if (split.strategy == BranchStrategy::Gap) {
          gap(st, s, "branch condition cannot be modeled (" + split.reason + "); annotate it with pct or iters");
          return;
        }
        finding(Finding::Kind::OverApprox, st.info->unit->file_name, line,
                "branch outside any loop (" + split.reason + "): both arms counted once", st.out.mangled_name);
      }
      visit(st, i->then_branch, split.then_region);
      visit(st, i->else_branch, split.else_region);
    } else if (const auto* b = s.as<frontend::Block>()) {
      for (const auto& c : b->stmts) visit(st, c, region);
    }
  }

  FunctionMetrics analyze(const FunctionInfo& info) {
    FnState st;
    st.info = &info;
    st.att = &attribution_[info.mangled];
    st.out.mangled_name = info.mangled;
    st.out.file = info.unit->file_name;
    st.out.line = info.fn->line;
    add_counts(st, st.att->function_level, CountExpr::constant(1), info.fn->line);
    visit(st, info.fn->body, Region{});

    std::vector<ModelParam> params;
    for (const auto& [name, line] : st.param_lines) params.push_back({name, line});
    std::sort(params.begin(), params.end(), [](const ModelParam& a, const ModelParam& b) {
      return a.source_line != b.source_line ? a.source_line < b.source_line : a.name < b.name;
    });
    st.out.params = std::move(params);
    st.out.notes = notes_[info.mangled];
    return std::move(st.out);
  }

  const std::vector<SourceUnit>& units_;
  const binary::LineMap& line_map_;
  const binary::ArchDescription& arch_;

  std::map<std::string, FunctionInfo> infos_;
  std::vector<std::string> source_order_;
  std::map<std::string, Attribution> attribution_;
  std::map<std::string, std::map<int, std::vector<ResolvedCall>>> calls_;
  std::set<std::tuple<std::string, int, std::string>> dropped_;
  std::vector<std::string> order_;
  std::set<std::string> reported_external_;
  std::map<std::string, std::vector<Finding>> notes_;
  TopDownResult result_;
};

}  // namespace

TopDownResult generate_top_down(const std::vector<SourceUnit>& units, const binary::LineMap& line_map,
                                const binary::ArchDescription& arch) {
  return Analyzer(units, line_map, arch).run();
}

}  // namespace statmodel::metrics
