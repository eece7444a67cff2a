#include "statmodel/frontend/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

#include "statmodel/error.hpp"

namespace statmodel::frontend {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void malformed(int line, const std::string& what) {
  std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
  throw Error(ErrorCode::MalformedAnnotation, where + what);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::optional<poly::Int> parse_digits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  }
  return poly::Int(std::string(s));
}

// "0.25", ".5", "1", "1/4" or "25%".
std::optional<poly::Rational> parse_fraction(std::string_view s) {
  if (!s.empty() && s.back() == '%') {
    auto r = parse_fraction(trim(s.substr(0, s.size() - 1)));
    if (!r) return std::nullopt;
    return *r / 100;
  }
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto n = parse_digits(trim(s.substr(0, slash)));
    auto d = parse_digits(trim(s.substr(slash + 1)));
    if (!n || !d || *d == 0) return std::nullopt;
    return poly::Rational(*n, *d);
  }
  auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  poly::Int w = 0;
  if (!whole.empty()) {
    auto v = parse_digits(whole);
    if (!v) return std::nullopt;
    w = *v;
  }
  poly::Rational out(w);
  if (!frac.empty()) {
    auto f = parse_digits(frac);
    if (!f) return std::nullopt;
    out += poly::Rational(*f, boost::multiprecision::pow(poly::Int(10), static_cast<unsigned>(frac.size())));
  }
  return out;
}

Annotation parse_pair(std::string_view key, std::string_view value, int line) {
  Annotation a;
  a.line = line;
  if (key == "iters") {
    std::int64_t n = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc() || p != value.data() + value.size() || n < 0) {
      malformed(line, "iters expects a non-negative integer, got '" + std::string(value) + "'");
    }
    a.kind = AnnotationKind::IterationCount;
    a.value = n;
  } else if (key == "pct") {
    auto r = parse_fraction(value);
    if (!r || *r < 0 || *r > 1) malformed(line, "pct expects a value in [0,1], got '" + std::string(value) + "'");
    a.kind = AnnotationKind::Percentage;
    a.value = *r;
  } else if (key == "lp_init" || key == "lp_cond") {
    if (!is_identifier(value)) {
      malformed(line, std::string(key) + " expects an identifier, got '" + std::string(value) + "'");
    }
    a.kind = key == "lp_init" ? AnnotationKind::LpInit : AnnotationKind::LpCond;
    a.value = std::string(value);
  } else if (key == "skip") {
    if (value != "yes" && value != "true") malformed(line, "skip expects yes or true");
    a.kind = AnnotationKind::Skip;
    a.value = true;
  } else {
    std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
    throw Error(ErrorCode::UnknownAnnotationKey, where + "unknown annotation key '" + std::string(key) + "'");
  }
  return a;
}

}  // namespace

std::string_view annotation_key(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::IterationCount: return "iters";
    case AnnotationKind::Percentage: return "pct";
    case AnnotationKind::LpInit: return "lp_init";
    case AnnotationKind::LpCond: return "lp_cond";
    case AnnotationKind::Skip: return "skip";
  }
  return "";
}

std::vector<Annotation> parse_annotation(std::string_view pragma_text, int line) {
  std::string joined;
  for (std::size_t i = 0; i < pragma_text.size(); ++i) {
    if (pragma_text[i] == '\\' && i + 1 < pragma_text.size() && pragma_text[i + 1] == '\n') {
      joined += ' ';
      ++i;
    } else {
      joined += pragma_text[i];
    }
  }
  std::string_view s = trim(joined);
  auto expect_word = [&](std::string_view w) {
    if (s.substr(0, w.size()) != w) malformed(line, "expected '" + std::string(w) + "'");
    s = trim(s.substr(w.size()));
  };
  expect_word("#");
  expect_word("pragma");
  expect_word("@Annotation");
  if (s.empty() || s.front() != '{') malformed(line, "expected '{'");
  if (s.back() != '}') malformed(line, "expected '}' at end of annotation");
  std::string_view body = s.substr(1, s.size() - 2);
  if (body.find_first_of("{}") != std::string_view::npos) malformed(line, "unbalanced braces");
  if (trim(body).empty()) malformed(line, "empty annotation");

  std::vector<Annotation> out;
  while (true) {
    auto comma = body.find(',');
    std::string_view item = trim(body.substr(0, comma));
    auto colon = item.find(':');
    if (colon == std::string_view::npos) malformed(line, "expected key:value, got '" + std::string(item) + "'");
    std::string_view key = trim(item.substr(0, colon));
    std::string_view value = trim(item.substr(colon + 1));
    if (key.empty() || value.empty()) malformed(line, "empty key or value in '" + std::string(item) + "'");
    out.push_back(parse_pair(key, value, line));
    if (comma == std::string_view::npos) break;
    body = body.substr(comma + 1);
  }
  return out;
}

std::vector<Annotation> merge_annotations(const std::vector<Annotation>& in) {
  std::vector<Annotation> out;
  for (const auto& a : in) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Annotation& o) { return o.kind == a.kind; });
    if (it == out.end()) {
      out.push_back(a);
    } else {
      *it = a;
    }
  }
  return out;
}

std::string format_annotation(const Annotation& a) {
  std::string v;
  switch (a.kind) {
    case AnnotationKind::IterationCount: v = std::to_string(a.count()); break;
    case AnnotationKind::Percentage: {
      const auto& r = a.fraction();
      v = numerator(r).str() + "/" + denominator(r).str();
      break;
    }
    case AnnotationKind::LpInit:
    case AnnotationKind::LpCond: v = a.identifier(); break;
    case AnnotationKind::Skip: v = "yes"; break;
  }
  return std::string(annotation_key(a.kind)) + ":" + v;
}

}  // namespace statmodel::frontend
