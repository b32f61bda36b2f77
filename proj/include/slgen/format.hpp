#pragma once

// Grammar and config files: versioned JSON documents with a fixed key order,
// so serialize() output is canonical and equality of values is byte equality.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "slgen/error.hpp"
#include "slgen/grammar.hpp"
#include "slgen/params.hpp"

namespace slgen {

using ojson = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kGrammarFormat = "slgen-grammar";
inline constexpr int kGrammarVersion = 1;

// 64-bit FNV-1a, rendered as "fnv1a64:<16 hex digits>".
inline std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(path + ": write failed");
}

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline ojson parse_json(std::string_view text, const std::string& source, std::size_t line = 0) {
  try {
    return ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t at = line ? line : line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(source, at, std::string("malformed JSON: ") + e.what());
  }
}

// Typed field access that reports the JSON path on failure.
class Reader {
 public:
  Reader(std::string source, std::size_t line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ParseError(source_, line_, path + ": " + what);
  }

  const ojson& field(const ojson& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
  }

  void only(const ojson& obj, const std::string& path, std::initializer_list<std::string_view> keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
        fail(path, "unknown field '" + it.key() + "'");
    }
  }

  std::int64_t integer(const ojson& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
      fail(path, "integer out of range");
    return v.get<std::int64_t>();
  }

  std::uint64_t u64(const ojson& v, const std::string& path) const {
    if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::uint32_t index(const ojson& v, const std::string& path) const {
    const auto x = integer(v, path);
    if (x < 0 || x > static_cast<std::int64_t>(UINT32_MAX - 1)) fail(path, "index out of range");
    return static_cast<std::uint32_t>(x);
  }

  double real(const ojson& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::string string(const ojson& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  const ojson& array(const ojson& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace detail

// ---------------------------------------------------------------- params ----

inline ojson to_json(const DistSpec& spec) {
  return std::visit(
      [](const auto& d) -> ojson {
        using T = std::decay_t<decltype(d)>;
        ojson j;
        if constexpr (std::is_same_v<T, dist::Constant>) {
          j["kind"] = "constant";
          j["value"] = d.value;
        } else if constexpr (std::is_same_v<T, dist::UniformInt>) {
          j["kind"] = "uniform_int";
          j["min"] = d.min;
          j["max"] = d.max;
        } else if constexpr (std::is_same_v<T, dist::PoissonShifted>) {
          j["kind"] = "poisson_shifted";
          j["lambda"] = d.lambda;
        } else {
          j["kind"] = "categorical";
          if (!d.values.empty()) j["values"] = d.values;
          j["weights"] = d.weights;
        }
        return j;
      },
      spec);
}

inline DistSpec dist_from_json(const ojson& j, const std::string& path, const detail::Reader& r) {
  const std::string kind = r.string(r.field(j, path, "kind"), path + ".kind");
  if (kind == "constant") {
    r.only(j, path, {"kind", "value"});
    return dist::Constant{r.integer(r.field(j, path, "value"), path + ".value")};
  }
  if (kind == "uniform_int") {
    r.only(j, path, {"kind", "min", "max"});
    return dist::UniformInt{r.integer(r.field(j, path, "min"), path + ".min"),
                            r.integer(r.field(j, path, "max"), path + ".max")};
  }
  if (kind == "poisson_shifted") {
    r.only(j, path, {"kind", "lambda"});
    return dist::PoissonShifted{r.real(r.field(j, path, "lambda"), path + ".lambda")};
  }
  if (kind == "categorical") {
    r.only(j, path, {"kind", "values", "weights"});
    dist::Categorical c;
    const auto& w = r.array(r.field(j, path, "weights"), path + ".weights");
    for (std::size_t i = 0; i < w.size(); ++i)
      c.weights.push_back(r.real(w[i], path + ".weights[" + std::to_string(i) + "]"));
    if (j.contains("values")) {
      const auto& v = r.array(j["values"], path + ".values");
      for (std::size_t i = 0; i < v.size(); ++i)
        c.values.push_back(r.integer(v[i], path + ".values[" + std::to_string(i) + "]"));
    }
    return c;
  }
  r.fail(path + ".kind", "unknown distribution kind '" + kind + "'");
}

inline ojson to_json(const GenParams& p) {
  ojson j;
  j["num_categories"] = p.num_categories;
  j["nmg_category_ratio"] = p.nmg_category_ratio;
  j["rules_per_category"] = to_json(p.rules_per_category);
  j["units_per_category"] = to_json(p.units_per_category);
  j["deps_per_rule"] = to_json(p.deps_per_rule);
  j["head_position"] = p.head_position ? to_json(*p.head_position) : ojson(nullptr);
  j["permutation_prob"] = p.permutation_prob;
  j["height_limit"] = p.height_limit;
  j["nmg_sync_ratios"] = ojson{{"full", p.nmg_sync_ratios.full},
                               {"start", p.nmg_sync_ratios.start},
                               {"end", p.nmg_sync_ratios.end}};
  j["duration_scale_mean"] = p.duration_scale_mean;
  j["duration_scale_std"] = p.duration_scale_std;
  j["translation_std"] = p.translation_std;
  j["seed"] = p.seed;
  return j;
}

// Reads GenParams. Required: every field except head_position (default uniform)
// and seed (default 0). Unknown fields are rejected. Does not range-check.
inline GenParams params_from_json(const ojson& j, const std::string& path,
                                  const detail::Reader& r) {
  r.only(j, path,
         {"num_categories", "nmg_category_ratio", "rules_per_category", "units_per_category",
          "deps_per_rule", "head_position", "permutation_prob", "height_limit",
          "nmg_sync_ratios", "duration_scale_mean", "duration_scale_std", "translation_std",
          "seed"});
  auto at = [&](const char* key) -> const ojson& {
    if (!j.contains(key)) throw ParamError(key, "required field is missing");
    return j[key];
  };
  auto sub = [&](const char* key) { return path.empty() ? std::string(key) : path + "." + key; };
  GenParams p;
  p.num_categories = r.integer(at("num_categories"), sub("num_categories"));
  p.nmg_category_ratio = r.real(at("nmg_category_ratio"), sub("nmg_category_ratio"));
  p.rules_per_category = dist_from_json(at("rules_per_category"), sub("rules_per_category"), r);
  p.units_per_category = dist_from_json(at("units_per_category"), sub("units_per_category"), r);
  p.deps_per_rule = dist_from_json(at("deps_per_rule"), sub("deps_per_rule"), r);
  if (j.contains("head_position") && !j["head_position"].is_null())
    p.head_position = dist_from_json(j["head_position"], sub("head_position"), r);
  p.permutation_prob = r.real(at("permutation_prob"), sub("permutation_prob"));
  p.height_limit = r.integer(at("height_limit"), sub("height_limit"));
  const ojson& s = at("nmg_sync_ratios");
  const std::string sp = sub("nmg_sync_ratios");
  r.only(s, sp, {"full", "start", "end"});
  p.nmg_sync_ratios = {r.real(r.field(s, sp, "full"), sp + ".full"),
                       r.real(r.field(s, sp, "start"), sp + ".start"),
                       r.real(r.field(s, sp, "end"), sp + ".end")};
  p.duration_scale_mean = r.real(at("duration_scale_mean"), sub("duration_scale_mean"));
  p.duration_scale_std = r.real(at("duration_scale_std"), sub("duration_scale_std"));
  p.translation_std = r.real(at("translation_std"), sub("translation_std"));
  if (j.contains("seed")) p.seed = r.u64(j["seed"], sub("seed"));
  return p;
}

inline std::string serialize_config(const GenParams& p) { return to_json(p).dump(2) + "\n"; }

// Parses and validates a config document.
inline GenParams parse_config(std::string_view text, const std::string& source = "config") {
  const ojson j = detail::parse_json(text, source);
  detail::Reader r(source, 0);
  if (!j.is_object()) r.fail("$", "config must be a JSON object");
  GenParams p = params_from_json(j, "", r);
  validate(p);
  return p;
}

// --------------------------------------------------------------- grammar ----

inline ojson to_json(const Grammar& g) {
  ojson j;
  j["format"] = kGrammarFormat;
  j["version"] = kGrammarVersion;
  ojson cats = ojson::array();
  for (const auto& c : g.categories)
    cats.push_back({{"index", c.id.index}, {"label", c.label}, {"kind", to_string(c.kind)}});
  j["categories"] = std::move(cats);
  auto ids = [](const std::vector<CategoryId>& v) {
    ojson a = ojson::array();
    for (auto c : v) a.push_back(c.index);
    return a;
  };
  ojson mg = ojson::array();
  for (const auto& r : g.mg_rules)
    mg.push_back({{"id", r.id},
                  {"head", r.head.index},
                  {"left", ids(r.left)},
                  {"right", ids(r.right)},
                  {"permutation_of", r.permutation_of ? ojson(*r.permutation_of) : ojson(nullptr)}});
  j["mg_rules"] = std::move(mg);
  ojson nmg = ojson::array();
  for (const auto& r : g.nmg_rules)
    nmg.push_back({{"id", r.id}, {"head", r.head.index}, {"dependent", r.dependent.index}});
  j["nmg_rules"] = std::move(nmg);
  ojson units = ojson::array();
  for (const auto& u : g.units)
    units.push_back({{"id", u.id},
                     {"category", u.category.index},
                     {"sync", to_string(u.sync)},
                     {"duration_scale", u.duration_scale}});
  j["units"] = std::move(units);
  j["root"] = g.root.index;
  j["params"] = g.params ? to_json(*g.params) : ojson(nullptr);
  return j;
}

inline std::string serialize_grammar(const Grammar& g) { return to_json(g).dump(2) + "\n"; }

inline std::string grammar_hash(const Grammar& g) { return content_hash(serialize_grammar(g)); }

// Parses a grammar file. The result is not validated; see validate_grammar.
inline Grammar parse_grammar(std::string_view text, const std::string& source = "grammar") {
  const ojson j = detail::parse_json(text, source);
  detail::Reader r(source, 0);
  if (!j.is_object()) r.fail("$", "grammar must be a JSON object");
  r.only(j, "$", {"format", "version", "categories", "mg_rules", "nmg_rules", "units", "root", "params"});
  if (r.string(r.field(j, "$", "format"), "format") != kGrammarFormat)
    r.fail("format", "not a grammar file");
  const auto version = r.integer(r.field(j, "$", "version"), "version");
  if (version != kGrammarVersion)
    throw VersionError(source + ": grammar format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kGrammarVersion) + ")");

  Grammar g;
  const auto& cats = r.array(r.field(j, "$", "categories"), "categories");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string p = "categories[" + std::to_string(i) + "]";
    r.only(cats[i], p, {"index", "label", "kind"});
    Category c;
    c.id = CategoryId{r.index(r.field(cats[i], p, "index"), p + ".index")};
    c.label = r.string(r.field(cats[i], p, "label"), p + ".label");
    const auto kind = parse_kind(r.string(r.field(cats[i], p, "kind"), p + ".kind"));
    if (!kind) r.fail(p + ".kind", "expected MG or NMG");
    c.kind = *kind;
    g.categories.push_back(std::move(c));
  }
  auto id_list = [&](const ojson& a, const std::string& p) {
    std::vector<CategoryId> out;
    r.array(a, p);
    for (std::size_t i = 0; i < a.size(); ++i)
      out.push_back(CategoryId{r.index(a[i], p + "[" + std::to_string(i) + "]")});
    return out;
  };
  const auto& mg = r.array(r.field(j, "$", "mg_rules"), "mg_rules");
  for (std::size_t i = 0; i < mg.size(); ++i) {
    const std::string p = "mg_rules[" + std::to_string(i) + "]";
    r.only(mg[i], p, {"id", "head", "left", "right", "permutation_of"});
    MgRule rule;
    rule.id = r.integer(r.field(mg[i], p, "id"), p + ".id");
    rule.head = CategoryId{r.index(r.field(mg[i], p, "head"), p + ".head")};
    rule.left = id_list(r.field(mg[i], p, "left"), p + ".left");
    rule.right = id_list(r.field(mg[i], p, "right"), p + ".right");
    if (mg[i].contains("permutation_of") && !mg[i]["permutation_of"].is_null())
      rule.permutation_of = r.integer(mg[i]["permutation_of"], p + ".permutation_of");
    g.mg_rules.push_back(std::move(rule));
  }
  const auto& nmg = r.array(r.field(j, "$", "nmg_rules"), "nmg_rules");
  for (std::size_t i = 0; i < nmg.size(); ++i) {
    const std::string p = "nmg_rules[" + std::to_string(i) + "]";
    r.only(nmg[i], p, {"id", "head", "dependent"});
    g.nmg_rules.push_back(NmgRule{r.integer(r.field(nmg[i], p, "id"), p + ".id"),
                                  CategoryId{r.index(r.field(nmg[i], p, "head"), p + ".head")},
                                  CategoryId{r.index(r.field(nmg[i], p, "dependent"), p + ".dependent")}});
  }
  const auto& units = r.array(r.field(j, "$", "units"), "units");
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string p = "units[" + std::to_string(i) + "]";
    r.only(units[i], p, {"id", "category", "sync", "duration_scale"});
    Unit u;
    u.id = r.integer(r.field(units[i], p, "id"), p + ".id");
    u.category = CategoryId{r.index(r.field(units[i], p, "category"), p + ".category")};
    const auto sync = parse_sync(r.string(r.field(units[i], p, "sync"), p + ".sync"));
    if (!sync) r.fail(p + ".sync", "unknown sync type");
    u.sync = *sync;
    u.duration_scale = r.real(r.field(units[i], p, "duration_scale"), p + ".duration_scale");
    g.units.push_back(u);
  }
  g.root = CategoryId{r.index(r.field(j, "$", "root"), "root")};
  const ojson& params = r.field(j, "$", "params");
  if (!params.is_null()) g.params = params_from_json(params, "params", r);
  return g;
}

}  // namespace slgen
