#pragma once

// slgen command line: gen-grammar, gen-corpus, validate, stats, score, baseline.
// Exit codes: 0 success, 1 validation failures, 2 usage or input errors.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slgen/corpus.hpp"
#include "slgen/eval.hpp"
#include "slgen/format.hpp"
#include "slgen/grammar_gen.hpp"

namespace slgen::cli {

inline constexpr int kOk = 0;
inline constexpr int kViolations = 1;
inline constexpr int kUsage = 2;

namespace detail {

inline bool looks_like_grammar(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') return false;
  // Corpus files hold one document per line; grammar files are multi-line objects.
  const auto nl = text.find('\n', first);
  const std::string head = text.substr(first, nl == std::string::npos ? text.size() : nl - first);
  return head == "{" || text.find(std::string("\"format\": \"") + std::string(kGrammarFormat) + "\"") != std::string::npos;
}

inline std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void print_table(const EvalReport& r, std::ostream& out) {
  out << "documents      " << r.document_count() << "\n";
  out << "UAS            " << fixed(r.uas()) << "  (" << r.attachment.correct << "/" << r.attachment.total << ")\n";
  out << "root accuracy  " << fixed(r.root_accuracy()) << "\n";
  for (std::size_t i = 0; i < kSyncTypeCount; ++i) {
    const auto& t = r.by_sync[i];
    std::string name(to_string(static_cast<SyncType>(i)));
    name.resize(14, ' ');
    out << "  " << name << " " << (t.total ? fixed(t.score()) : std::string("  -  ")) << "  ("
        << t.correct << "/" << t.total << ")\n";
  }
}

inline void print_stats(const CorpusStats& s, std::ostream& out) {
  out << "documents   " << s.documents << "\n";
  for (std::size_t i = 0; i < kSyncTypeCount; ++i) {
    std::string name(to_string(static_cast<SyncType>(i)));
    name.resize(10, ' ');
    out << "  " << name << s.units_by_sync[i] << "\n";
  }
  out << "MG fraction " << fixed(s.mg_fraction()) << "\n";
  out << "MG duration mean " << fixed(s.mg_durations.mean, 4) << " s, variance "
      << fixed(s.mg_durations.variance(), 4) << "\n";
  out << "depth histogram\n";
  for (const auto& [d, c] : s.depth_histogram) out << "  " << d << "  " << c << "\n";
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Synthetic dependency grammar and temporally annotated corpus generator"};
  app.require_subcommand(1);

  std::string config, grammar_path, out_path, gold, pred, input, manifest_path, from_manifest;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  unsigned jobs = 1;

  auto* gen_grammar = app.add_subcommand("gen-grammar", "Generate a random grammar from a config");
  gen_grammar->add_option("--config", config, "Config file")->required();
  auto* gg_seed = gen_grammar->add_option("--seed", seed, "Override the config seed");
  gen_grammar->add_option("--out", out_path, "Grammar file to write")->required();

  auto* gen_corpus = app.add_subcommand("gen-corpus", "Generate an annotated corpus from a grammar");
  gen_corpus->add_option("--grammar", grammar_path, "Grammar file")->required();
  auto* gc_n = gen_corpus->add_option("--n", n, "Number of documents");
  auto* gc_seed = gen_corpus->add_option("--seed", seed, "Base seed");
  gen_corpus->add_option("--out", out_path, "Corpus file to write")->required();
  gen_corpus->add_option("--config", config, "Temporal parameters (default: the grammar's)");
  gen_corpus->add_option("--manifest", manifest_path, "Manifest file (default: <out>.manifest.json)");
  auto* gc_from = gen_corpus->add_option("--from-manifest", from_manifest, "Regenerate the corpus a manifest describes");
  gen_corpus->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 256u));
  gc_from->excludes(gc_n)->excludes(gc_seed);

  auto* validate_cmd = app.add_subcommand("validate", "Validate a grammar or corpus file");
  validate_cmd->add_option("input", input, "Grammar or corpus file")->required();
  validate_cmd->add_option("--grammar", grammar_path, "Grammar to check a corpus against");

  auto* stats_cmd = app.add_subcommand("stats", "Summarize a corpus");
  stats_cmd->add_option("input", input, "Corpus file")->required();
  stats_cmd->add_option("--grammar", grammar_path, "Grammar for per-unit scale lookup");
  stats_cmd->add_option("--out", out_path, "Write the summary as JSON");

  auto* score_cmd = app.add_subcommand("score", "Score predictions against a gold corpus");
  score_cmd->add_option("--gold", gold, "Gold corpus")->required();
  score_cmd->add_option("--pred", pred, "Prediction file")->required();
  score_cmd->add_option("--out", out_path, "Write the report as JSON");

  auto* baseline_cmd = app.add_subcommand("baseline", "Run the span baseline parser on a corpus");
  baseline_cmd->add_option("input", input, "Corpus file")->required();
  baseline_cmd->add_option("--out", out_path, "Prediction file to write")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*gen_grammar) {
      GenParams p = parse_config(read_file(config), config);
      if (*gg_seed) p.seed = seed;
      const Grammar g = generate_grammar(p);
      write_file(out_path, serialize_grammar(g));
      out << "wrote " << out_path << " (" << g.categories.size() << " categories, "
          << g.mg_rules.size() + g.nmg_rules.size() << " rules, " << g.units.size() << " units, "
          << content_hash(serialize_grammar(g)) << ")\n";
      return kOk;
    }

    if (*gen_corpus) {
      const std::string grammar_bytes = read_file(grammar_path);
      const Grammar g = parse_grammar(grammar_bytes, grammar_path);
      if (manifest_path.empty()) manifest_path = out_path + ".manifest.json";
      std::ofstream corpus(out_path, std::ios::binary | std::ios::trunc);
      if (!corpus) throw Error(out_path + ": cannot open for writing");
      CorpusManifest m;
      if (!from_manifest.empty()) {
        m = parse_manifest(read_file(from_manifest), from_manifest);
        regenerate_corpus(g, m, corpus, jobs);
      } else {
        if (!*gc_n || !*gc_seed) {
          err << "error: gen-corpus needs --n and --seed, or --from-manifest\n";
          return kUsage;
        }
        GenParams p;
        if (!config.empty()) p = parse_config(read_file(config), config);
        else if (g.params) p = *g.params;
        else throw ParamError("params", "grammar carries no params; pass --config");
        m = generate_corpus(g, n, seed, p, corpus, jobs);
      }
      corpus.close();
      if (!corpus) throw Error(out_path + ": write failed");
      if (m.grammar_hash != content_hash(grammar_bytes))
        err << "warning: " << grammar_path << " is not in canonical form; manifest records the canonical hash\n";
      write_file(manifest_path, serialize_manifest(m));
      out << "wrote " << m.document_count << " documents to " << out_path << ", manifest "
          << manifest_path << "\n";
      return kOk;
    }

    if (*validate_cmd) {
      const std::string text = read_file(input);
      std::vector<Violation> violations;
      if (detail::looks_like_grammar(text)) {
        const Grammar g = parse_grammar(text, input);
        violations = validate_grammar(g);
        if (violations.empty() && !is_finite(g))
          violations.push_back({"not-finite", "some category admits no finite derivation"});
      } else {
        std::optional<Grammar> g;
        if (!grammar_path.empty()) g = parse_grammar(read_file(grammar_path), grammar_path);
        std::set<std::string> ids;
        std::istringstream in(text);
        for_each_document(in, input, [&](AnnotatedDocument&& d) {
          if (!ids.insert(d.doc_id).second) violations.push_back({"duplicate-doc", "doc_id " + d.doc_id + " repeated"});
          for (auto& v : validate_document(d, g ? &*g : nullptr)) violations.push_back(std::move(v));
        });
      }
      std::size_t errors = 0;
      for (const auto& v : violations) {
        out << (v.warning ? "warning " : "error ") << v.code << ": " << v.message << "\n";
        if (!v.warning) ++errors;
      }
      out << input << ": " << (errors ? std::to_string(errors) + " violation(s)" : std::string("ok")) << "\n";
      return errors ? kViolations : kOk;
    }

    if (*stats_cmd) {
      std::optional<Grammar> g;
      if (!grammar_path.empty()) g = parse_grammar(read_file(grammar_path), grammar_path);
      std::ifstream in(input, std::ios::binary);
      if (!in) throw ParseError(input, 0, "cannot open file");
      CorpusStats s;
      for_each_document(in, input, [&](AnnotatedDocument&& d) { s.add(d); });
      detail::print_stats(s, out);
      if (!out_path.empty()) write_file(out_path, to_json(s, g ? &*g : nullptr).dump(2) + "\n");
      return kOk;
    }

    if (*score_cmd) {
      const auto gold_docs = parse_corpus(read_file(gold), gold);
      const auto preds = parse_predictions(read_file(pred), pred);
      const EvalReport r = score(gold_docs, preds);
      detail::print_table(r, out);
      if (!out_path.empty()) write_file(out_path, to_json(r).dump(2) + "\n");
      return kOk;
    }

    if (*baseline_cmd) {
      std::ifstream in(input, std::ios::binary);
      if (!in) throw ParseError(input, 0, "cannot open file");
      std::ofstream o(out_path, std::ios::binary | std::ios::trunc);
      if (!o) throw Error(out_path + ": cannot open for writing");
      std::size_t count = 0;
      for_each_document(in, input, [&](AnnotatedDocument&& d) {
        o << serialize_prediction(baseline_parse(d)) << '\n';
        ++count;
      });
      out << "wrote " << count << " predictions to " << out_path << "\n";
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace slgen::cli
