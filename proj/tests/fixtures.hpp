#pragma once

// Hand-built grammars for tests, written in rule notation: "S(N,*,N)", "N()",
// and "M(S)" for markers.

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slgen/slgen.hpp"

namespace slgen::testing {

class GrammarBuilder {
 public:
  GrammarBuilder& mg(const std::string& label) { return add(label, CategoryKind::MG); }
  GrammarBuilder& nmg(const std::string& label, SyncType sync = SyncType::NMG_FULL) {
    sync_[label] = sync;
    return add(label, CategoryKind::NMG);
  }

  // "S(N,*,N)" for MG heads, "M(S)" for NMG heads, "N()" or "N(*)" for leaves.
  GrammarBuilder& rule(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos) throw std::invalid_argument(text);
    const CategoryId head = id(text.substr(0, open));
    std::vector<std::string> items;
    std::stringstream ss(text.substr(open + 1, close - open - 1));
    for (std::string item; std::getline(ss, item, ',');) {
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      if (!item.empty()) items.push_back(item);
    }
    if (g_.categories[head.index].kind == CategoryKind::NMG) {
      if (items.size() != 1) throw std::invalid_argument("marker rule needs one dependent: " + text);
      g_.nmg_rules.push_back(NmgRule{next_rule_++, head, id(items[0])});
      return *this;
    }
    MgRule r;
    r.id = next_rule_++;
    r.head = head;
    bool after = items.empty() || std::find(items.begin(), items.end(), "*") == items.end();
    // Without an explicit star, dependents go to the right.
    for (const auto& it : items) {
      if (it == "*") {
        after = true;
        continue;
      }
      (after ? r.right : r.left).push_back(id(it));
    }
    g_.mg_rules.push_back(std::move(r));
    return *this;
  }

  GrammarBuilder& scale(double s) {
    scale_ = s;
    return *this;
  }

  GrammarBuilder& root(const std::string& label) {
    root_ = label;
    return *this;
  }

  // Derivation depth bound for hand-built grammars.
  GrammarBuilder& limit(std::int64_t height_limit) {
    GenParams p = params_.value_or(GenParams{});
    p.height_limit = height_limit;
    params_ = p;
    return *this;
  }

  GrammarBuilder& params(const GenParams& p) {
    params_ = p;
    return *this;
  }

  // One unit per category.
  Grammar build() const {
    Grammar g = g_;
    UnitId next = 0;
    for (const auto& c : g.categories) {
      Unit u;
      u.id = next++;
      u.category = c.id;
      u.sync = c.kind == CategoryKind::MG ? SyncType::MG : sync_.at(c.label);
      u.duration_scale = scale_;
      g.units.push_back(u);
    }
    g.root = root_.empty() ? CategoryId{0} : *find_category(g, root_);
    g.params = params_;
    return g;
  }

  CategoryId id(const std::string& label) const {
    auto c = find_category(g_, label);
    if (!c) throw std::invalid_argument("undeclared category " + label);
    return *c;
  }

 private:
  GrammarBuilder& add(const std::string& label, CategoryKind kind) {
    Category c;
    c.id = CategoryId{static_cast<std::uint32_t>(g_.categories.size())};
    c.label = label;
    c.kind = kind;
    g_.categories.push_back(c);
    return *this;
  }

  Grammar g_;
  RuleId next_rule_ = 0;
  double scale_ = 0.5;
  std::string root_;
  std::optional<GenParams> params_;
  std::map<std::string, SyncType> sync_;
};

// {S: [S(N,*,N)], N: [N()]}
inline Grammar two_category_grammar() {
  return GrammarBuilder().mg("S").mg("N").rule("S(N,*,N)").rule("N()").build();
}

// Small random grammar for property tests: 1..max_categories categories,
// category 0 is MG, rules with 0..3 dependents, leaf rules not guaranteed.
inline Grammar random_small_grammar(std::uint64_t seed, std::size_t max_categories = 5,
                                    double nmg_ratio = 0.25) {
  Rng rng(seed);
  Grammar g;
  const std::size_t n = 1 + rng.index(max_categories);
  for (std::size_t i = 0; i < n; ++i) {
    Category c;
    c.id = CategoryId{static_cast<std::uint32_t>(i)};
    c.label = "K" + std::to_string(i);
    c.kind = (i > 0 && rng.bernoulli(nmg_ratio)) ? CategoryKind::NMG : CategoryKind::MG;
    g.categories.push_back(c);
  }
  RuleId next = 0;
  auto any = [&] { return CategoryId{static_cast<std::uint32_t>(rng.index(n))}; };
  for (const auto& c : g.categories) {
    const std::size_t rules = rng.index(3) + (c.kind == CategoryKind::NMG ? 1 : 0);
    for (std::size_t k = 0; k < rules; ++k) {
      if (c.kind == CategoryKind::NMG) {
        g.nmg_rules.push_back(NmgRule{next++, c.id, any()});
        continue;
      }
      MgRule r;
      r.id = next++;
      r.head = c.id;
      const std::size_t deps = rng.index(4);
      const std::size_t left = rng.index(deps + 1);
      for (std::size_t d = 0; d < deps; ++d) (d < left ? r.left : r.right).push_back(any());
      g.mg_rules.push_back(std::move(r));
    }
  }
  UnitId uid = 0;
  for (const auto& c : g.categories)
    g.units.push_back(Unit{uid++, c.id, c.kind == CategoryKind::MG ? SyncType::MG : SyncType::NMG_FULL, 0.5});
  g.root = CategoryId{0};
  return g;
}

// Default config used across tests.
inline GenParams default_params() {
  GenParams p;
  p.num_categories = 8;
  p.nmg_category_ratio = 0.25;
  p.rules_per_category = dist::UniformInt{1, 3};
  p.units_per_category = dist::UniformInt{1, 3};
  p.deps_per_rule = dist::Categorical{{}, {0.3, 0.35, 0.25, 0.1}};
  p.permutation_prob = 0.3;
  p.height_limit = 4;
  p.nmg_sync_ratios = {0.5, 0.25, 0.25};
  p.duration_scale_mean = 0.6;
  p.duration_scale_std = 0.15;
  p.translation_std = 0.08;
  p.seed = 7;
  return p;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("slgen-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace slgen::testing
