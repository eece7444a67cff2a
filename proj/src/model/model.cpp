#include <algorithm>
#include <functional>
#include <limits>
#include <set>

#include "statmodel/error.hpp"
#include "statmodel/model/model.hpp"

namespace statmodel::model {

namespace {

void check_acyclic(const std::map<std::string, FunctionMetrics>& fns) {
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::function<void(const std::string&)> dfs = [&](const std::string& f) {
    state[f] = 1;
    for (const auto& c : fns.at(f).call_sites) {
      if (c.external) continue;
      int s = state[c.callee];
      if (s == 1) {
        throw Error(ErrorCode::ModelGap, "call cycle through '" + f + "' and '" + c.callee +
                                             "' (line " + std::to_string(c.line) + "); recursion is not modeled");
      }
      if (s == 0) dfs(c.callee);
    }
    state[f] = 2;
  };
  for (const auto& [name, _] : fns) {
    if (state[name] == 0) dfs(name);
  }
}

void add_param(std::vector<ModelParam>& out, const ModelParam& p) {
  for (auto& q : out) {
    if (q.name == p.name) {
      q.source_line = std::min(q.source_line, p.source_line);
      return;
    }
  }
  out.push_back(p);
}

void sort_params(std::vector<ModelParam>& ps) {
  std::sort(ps.begin(), ps.end(), [](const ModelParam& a, const ModelParam& b) {
    return std::tie(a.source_line, a.name) < std::tie(b.source_line, b.name);
  });
}

const FunctionMetrics& lookup(const Model& m, const std::string& name) {
  auto it = m.functions.find(name);
  if (it == m.functions.end()) throw Error(ErrorCode::UnknownFunction, "no function '" + name + "' in the model");
  return it->second;
}

std::string describe(const Finding& f) {
  std::string s(metrics::finding_kind_name(f.kind));
  if (!f.file.empty()) s += " " + f.file + ":" + std::to_string(f.line);
  return s + ": " + f.message;
}

struct Totals {
  std::map<std::string, Int> per_category;
  std::map<std::string, std::map<std::string, Int>> per_function;
};

class Evaluator {
 public:
  explicit Evaluator(const Model& m) : m_(m) {}

  const Totals& eval(const std::string& fn, const Binding& b) {
    auto key = std::make_pair(fn, b);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const FunctionMetrics& f = lookup(m_, fn);
    if (!stack_.insert(fn).second) throw Error(ErrorCode::ModelGap, "call cycle through '" + fn + "'; recursion is not modeled");
    Totals t;
    auto& own = t.per_function[fn];
    for (const auto& [cat, n] : f.body.counts) {
      Int v = checked(n, b, fn);
      t.per_category[cat] += v;
      own[cat] += v;
    }
    for (const auto& site : f.call_sites) {
      if (site.external) continue;
      Int times = checked(site.iterations, b, fn);
      const FunctionMetrics& callee = lookup(m_, site.callee);
      Binding cb;
      for (const auto& p : root_params(m_, callee.mangled_name)) {
        auto a = site.args.find(p.name);
        if (a != site.args.end()) {
          Int v = a->second.evaluate(b);
          if (v < std::numeric_limits<std::int64_t>::min() || v > std::numeric_limits<std::int64_t>::max()) {
            throw Error(ErrorCode::MalformedModel, "argument " + p.name + " of '" + site.callee + "' is out of range");
          }
          cb[p.name] = static_cast<std::int64_t>(v);
        } else if (auto v = b.find(p.name); v != b.end()) {
          cb[p.name] = v->second;
        } else {
          throw Error(ErrorCode::UnboundParameter, "missing parameter: " + p.name);
        }
      }
      const Totals& sub = eval(site.callee, cb);
      for (const auto& [cat, v] : sub.per_category) t.per_category[cat] += times * v;
      for (const auto& [g, cats] : sub.per_function) {
        auto& dst = t.per_function[g];
        for (const auto& [cat, v] : cats) dst[cat] += times * v;
      }
    }
    stack_.erase(fn);
    return memo_.emplace(std::move(key), std::move(t)).first->second;
  }

 private:
  static Int checked(const CountExpr& e, const Binding& b, const std::string& fn) {
    Int v = e.evaluate(b);
    if (v < 0) {
      throw Error(ErrorCode::MalformedModel, "'" + fn + "': count " + e.to_sexpr() + " is negative (" + v.str() + ")");
    }
    return v;
  }

  const Model& m_;
  std::set<std::string> stack_;
  std::map<std::pair<std::string, Binding>, Totals> memo_;
};

}  // namespace

Model build_model(std::vector<FunctionMetrics> functions, const binary::ArchDescription& arch, ModelMeta meta) {
  Model m;
  m.arch_ref = arch.hash;
  m.meta = std::move(meta);
  for (auto& f : functions) {
    std::string name = f.mangled_name;
    if (!m.functions.emplace(name, std::move(f)).second) {
      throw Error(ErrorCode::DuplicateFunction, "function '" + name + "' is defined more than once");
    }
  }
  for (const auto& [name, f] : m.functions) {
    for (const auto& c : f.call_sites) {
      if (!c.external && !m.functions.count(c.callee)) {
        throw Error(ErrorCode::UnresolvedCallee,
                    "'" + name + "' calls '" + c.callee + "' at line " + std::to_string(c.line) + ", which is not defined");
      }
    }
  }
  check_acyclic(m.functions);
  if (m.functions.count("main_0")) {
    m.entry = "main_0";
  } else {
    for (const auto& [name, _] : m.functions) {
      if (name.rfind("main_", 0) == 0) m.entry = name;
    }
  }
  if (m.entry) {
    m.params = root_params(m, *m.entry);
  } else {
    for (const auto& [_, f] : m.functions) {
      for (const auto& p : f.params) add_param(m.params, p);
    }
    sort_params(m.params);
  }
  return m;
}

std::vector<ModelParam> root_params(const Model& model, const std::string& root) {
  const FunctionMetrics& f = lookup(model, root);
  std::vector<ModelParam> out = f.params;
  // Callee parameters without an argument binding pass through by name.
  std::set<std::string> seen{root};
  std::function<void(const FunctionMetrics&)> walk = [&](const FunctionMetrics& g) {
    for (const auto& c : g.call_sites) {
      if (c.external) continue;
      const FunctionMetrics& callee = lookup(model, c.callee);
      for (const auto& p : callee.params) {
        if (!c.args.count(p.name)) add_param(out, p);
      }
      if (seen.insert(c.callee).second) walk(callee);
    }
  };
  walk(f);
  if (out.size() != f.params.size()) sort_params(out);
  return out;
}

EvaluationResult evaluate(const Model& model, const std::string& root, const Binding& binding) {
  lookup(model, root);
  std::vector<std::string> missing;
  for (const auto& p : root_params(model, root)) {
    if (!binding.count(p.name)) missing.push_back(p.name);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& n : missing) list += (list.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::UnboundParameter, "missing parameter" + std::string(missing.size() > 1 ? "s: " : ": ") + list);
  }
  Binding b;
  for (const auto& p : root_params(model, root)) b[p.name] = binding.at(p.name);

  Evaluator ev(model);
  const Totals& t = ev.eval(root, b);
  EvaluationResult r;
  r.per_category = t.per_category;
  r.per_function = t.per_function;

  // Notes of every reachable function, callers first.
  std::set<std::string> seen;
  std::set<std::string> flagged;
  std::function<void(const std::string&)> walk = [&](const std::string& fn) {
    if (!seen.insert(fn).second) return;
    const FunctionMetrics& f = model.functions.at(fn);
    for (const auto& n : f.notes) {
      if (n.kind == Finding::Kind::ExternalCall) continue;
      std::string s = describe(n);
      if (flagged.insert(s).second) r.flags.push_back(s);
    }
    for (const auto& c : f.call_sites) {
      if (c.external) {
        std::string s = "ExternalCall: '" + c.callee + "' has no source; only its call sequence is counted";
        if (flagged.insert(s).second) r.flags.push_back(s);
      } else {
        walk(c.callee);
      }
    }
  };
  walk(root);
  return r;
}

}  // namespace statmodel::model
