#include <json.hpp>

#include "statmodel/error.hpp"
#include "statmodel/model/model.hpp"

namespace statmodel::model {

using nlohmann::json;

namespace {

json params_json(const std::vector<ModelParam>& ps) {
  json out = json::array();
  for (const auto& p : ps) out.push_back({{"name", p.name}, {"source_line", p.source_line}});
  return out;
}

json function_json(const FunctionMetrics& f) {
  json body = json::object();
  for (const auto& [cat, n] : f.body.counts) body[cat] = n.to_sexpr();
  json calls = json::array();
  for (const auto& c : f.call_sites) {
    json args = json::object();
    for (const auto& [p, v] : c.args) args[p] = v.to_sexpr();
    calls.push_back({{"callee", c.callee},
                     {"line", c.line},
                     {"iterations", c.iterations.to_sexpr()},
                     {"external", c.external},
                     {"args", args}});
  }
  json notes = json::array();
  for (const auto& n : f.notes) {
    notes.push_back({{"kind", std::string(metrics::finding_kind_name(n.kind))},
                     {"file", n.file},
                     {"line", n.line},
                     {"message", n.message}});
  }
  return {{"body", body}, {"calls", calls}, {"params", params_json(f.params)},
          {"file", f.file}, {"line", f.line}, {"notes", notes}};
}

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedModel, why); }

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) malformed(where + " lacks '" + key + "'");
  return *it;
}

std::string str(const json& v, const std::string& where) {
  if (!v.is_string()) malformed(where + " is not a string");
  return v.get<std::string>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) malformed(where + " is not an integer");
  return v.get<int>();
}

CountExpr count(const json& v, const std::string& where) {
  CountExpr e = CountExpr::parse_sexpr(str(v, where));
  if (e.is_constant() && e.value() < 0) malformed(where + " is a negative count (" + e.value().str() + ")");
  return e;
}

std::vector<ModelParam> params_of(const json& v, const std::string& where) {
  if (!v.is_array()) malformed(where + " is not an array");
  std::vector<ModelParam> out;
  for (const auto& p : v) {
    out.push_back({str(field(p, "name", where), where + ".name"), integer(field(p, "source_line", where), where + ".source_line")});
  }
  return out;
}

// Optional fields default when absent, so hand-written models stay short.
const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

FunctionMetrics function_of(const std::string& name, const json& v) {
  const std::string where = "function '" + name + "'";
  FunctionMetrics f;
  f.mangled_name = name;
  const json& body = field(v, "body", where);
  if (!body.is_object()) malformed(where + ".body is not an object");
  for (const auto& [cat, n] : body.items()) f.body.counts.emplace(cat, count(n, where + ".body." + cat));
  const json& calls = field(v, "calls", where);
  if (!calls.is_array()) malformed(where + ".calls is not an array");
  for (const auto& c : calls) {
    metrics::CallSite site;
    site.callee = str(field(c, "callee", where + ".calls"), where + ".calls.callee");
    site.line = integer(field(c, "line", where + ".calls"), where + ".calls.line");
    site.iterations = count(field(c, "iterations", where + ".calls"), where + ".calls.iterations");
    const json& ext = field(c, "external", where + ".calls");
    if (!ext.is_boolean()) malformed(where + ".calls.external is not a boolean");
    site.external = ext.get<bool>();
    if (const json* args = optional_field(c, "args")) {
      if (!args->is_object()) malformed(where + ".calls.args is not an object");
      for (const auto& [p, a] : args->items()) site.args.emplace(p, CountExpr::parse_sexpr(str(a, where + ".calls.args")));
    }
    f.call_sites.push_back(std::move(site));
  }
  if (const json* ps = optional_field(v, "params")) f.params = params_of(*ps, where + ".params");
  if (const json* file = optional_field(v, "file")) f.file = str(*file, where + ".file");
  if (const json* line = optional_field(v, "line")) f.line = integer(*line, where + ".line");
  if (const json* notes = optional_field(v, "notes")) {
    if (!notes->is_array()) malformed(where + ".notes is not an array");
    for (const auto& n : *notes) {
      auto kind = metrics::finding_kind_from_name(str(field(n, "kind", where + ".notes"), where + ".notes.kind"));
      if (!kind) malformed(where + ": unknown note kind");
      f.notes.push_back({*kind, str(field(n, "file", where + ".notes"), where + ".notes.file"),
                         integer(field(n, "line", where + ".notes"), where + ".notes.line"),
                         str(field(n, "message", where + ".notes"), where + ".notes.message")});
    }
  }

  // Every free parameter must be declared; undeclared ones get line 0.
  std::set<std::string> declared;
  for (const auto& p : f.params) declared.insert(p.name);
  auto declare = [&](const CountExpr& e) {
    for (const auto& p : e.free_params()) {
      if (declared.insert(p).second) f.params.push_back({p, 0});
    }
  };
  for (const auto& [_, n] : f.body.counts) declare(n);
  for (const auto& c : f.call_sites) {
    declare(c.iterations);
    for (const auto& [_, a] : c.args) declare(a);
  }
  return f;
}

}  // namespace

std::string serialize(const Model& model) {
  json functions = json::object();
  for (const auto& [name, f] : model.functions) functions[name] = function_json(f);
  json doc = {
      {"schema_version", kSchemaVersion},
      {"arch_ref", model.arch_ref},
      {"params", params_json(model.params)},
      {"functions", functions},
      {"entry", model.entry ? json(*model.entry) : json(nullptr)},
      {"meta", {{"tool_version", model.meta.tool_version}, {"sources", model.meta.sources}, {"created", model.meta.created}}},
  };
  return doc.dump(2) + "\n";
}

Model deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("model is not a JSON object");
  const json& version = field(doc, "schema_version", "model");
  if (!version.is_number_integer() || version.get<long long>() != kSchemaVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "schema_version " + version.dump() + " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
  }

  Model m;
  m.arch_ref = str(field(doc, "arch_ref", "model"), "arch_ref");
  m.params = params_of(field(doc, "params", "model"), "params");
  const json& fns = field(doc, "functions", "model");
  if (!fns.is_object()) malformed("functions is not an object");
  for (const auto& [name, f] : fns.items()) m.functions.emplace(name, function_of(name, f));
  const json& entry = field(doc, "entry", "model");
  if (!entry.is_null()) m.entry = str(entry, "entry");
  if (const json* meta = optional_field(doc, "meta")) {
    if (!meta->is_object()) malformed("meta is not an object");
    if (const json* v = optional_field(*meta, "tool_version")) m.meta.tool_version = str(*v, "meta.tool_version");
    if (const json* v = optional_field(*meta, "created")) m.meta.created = str(*v, "meta.created");
    if (const json* v = optional_field(*meta, "sources")) {
      if (!v->is_array()) malformed("meta.sources is not an array");
      for (const auto& s : *v) m.meta.sources.push_back(str(s, "meta.sources"));
    }
  }

  for (const auto& [name, f] : m.functions) {
    for (const auto& c : f.call_sites) {
      if (!c.external && !m.functions.count(c.callee)) {
        malformed("'" + name + "' calls unknown function '" + c.callee + "'");
      }
    }
  }
  if (m.entry && !m.functions.count(*m.entry)) malformed("entry '" + *m.entry + "' is not a function");
  return m;
}

}  // namespace statmodel::model
