#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slgen/error.hpp"
#include "slgen/random.hpp"

namespace slgen {

// Integer distributions allowed in configs.
namespace dist {

struct Constant {
  std::int64_t value = 0;
  bool operator==(const Constant&) const = default;
};

struct UniformInt {
  std::int64_t min = 0;
  std::int64_t max = 0;
  bool operator==(const UniformInt&) const = default;
};

// 1 + Poisson(lambda)
struct PoissonShifted {
  double lambda = 1.0;
  bool operator==(const PoissonShifted&) const = default;
};

// values[i] with probability weights[i] / sum(weights). Empty values means 0..n-1.
struct Categorical {
  std::vector<std::int64_t> values;
  std::vector<double> weights;
  bool operator==(const Categorical&) const = default;
};

}  // namespace dist

using DistSpec = std::variant<dist::Constant, dist::UniformInt, dist::PoissonShifted,
                              dist::Categorical>;

inline std::int64_t sample(const DistSpec& spec, Rng& rng) {
  return std::visit(
      [&rng](const auto& d) -> std::int64_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, dist::Constant>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, dist::UniformInt>) {
          return rng.uniform_int(d.min, d.max);
        } else if constexpr (std::is_same_v<T, dist::PoissonShifted>) {
          return 1 + rng.poisson(d.lambda);
        } else {
          const std::size_t i = rng.categorical(d.weights);
          return d.values.empty() ? static_cast<std::int64_t>(i) : d.values[i];
        }
      },
      spec);
}

// Throws ParamError if the spec can produce a value below `floor` or is malformed.
inline void check_dist(const DistSpec& spec, const std::string& field, std::int64_t floor) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, dist::Constant>) {
          if (d.value < floor) throw ParamError(field, "constant below " + std::to_string(floor));
        } else if constexpr (std::is_same_v<T, dist::UniformInt>) {
          if (d.min > d.max) throw ParamError(field, "min > max");
          if (d.min < floor) throw ParamError(field, "min below " + std::to_string(floor));
        } else if constexpr (std::is_same_v<T, dist::PoissonShifted>) {
          if (!(d.lambda >= 0.0) || !std::isfinite(d.lambda) || d.lambda > 64.0)
            throw ParamError(field, "lambda must be in [0, 64]");
          if (1 < floor) throw ParamError(field, "poisson_shifted is always >= 1");
        } else {
          if (d.weights.empty()) throw ParamError(field, "categorical needs weights");
          if (!d.values.empty() && d.values.size() != d.weights.size())
            throw ParamError(field, "values and weights differ in length");
          double total = 0.0;
          for (double w : d.weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw ParamError(field, "negative weight");
            total += w;
          }
          if (!(total > 0.0)) throw ParamError(field, "weights sum to zero");
          for (std::size_t i = 0; i < d.weights.size(); ++i) {
            const std::int64_t v = d.values.empty() ? static_cast<std::int64_t>(i) : d.values[i];
            if (d.weights[i] > 0.0 && v < floor)
              throw ParamError(field, "value below " + std::to_string(floor));
          }
        }
      },
      spec);
}

// Number of dependents placed left of the head, given `deps` dependents.
// nullopt spec means uniform over the deps + 1 slots; other specs are clamped.
inline std::size_t sample_head_slot(const std::optional<DistSpec>& spec, std::size_t deps,
                                    Rng& rng) {
  if (!spec) return rng.index(deps + 1);
  const std::int64_t v = sample(*spec, rng);
  return static_cast<std::size_t>(std::clamp<std::int64_t>(v, 0, static_cast<std::int64_t>(deps)));
}

struct SyncRatios {
  double full = 1.0;
  double start = 0.0;
  double end = 0.0;
  bool operator==(const SyncRatios&) const = default;
};

// Parameters of random grammar generation and of temporal valuation.
struct GenParams {
  std::int64_t num_categories = 1;
  double nmg_category_ratio = 0.0;
  DistSpec rules_per_category = dist::Constant{1};  // R_C
  DistSpec units_per_category = dist::Constant{1};  // U_C
  DistSpec deps_per_rule = dist::Constant{0};
  std::optional<DistSpec> head_position;  // nullopt: uniform
  double permutation_prob = 0.0;
  std::int64_t height_limit = 1;
  SyncRatios nmg_sync_ratios;
  double duration_scale_mean = 0.5;  // seconds
  double duration_scale_std = 0.1;
  double translation_std = 0.1;
  std::uint64_t seed = 0;

  bool operator==(const GenParams&) const = default;
};

// Lower bound on a unit's duration scale (seconds).
inline constexpr double kMinDurationScale = 0.01;

inline void validate(const GenParams& p) {
  auto prob = [](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw ParamError(field, "must be a probability in [0, 1]");
  };
  if (p.num_categories < 1) throw ParamError("num_categories", "must be >= 1");
  prob(p.nmg_category_ratio, "nmg_category_ratio");
  prob(p.permutation_prob, "permutation_prob");
  check_dist(p.rules_per_category, "rules_per_category", 0);
  check_dist(p.units_per_category, "units_per_category", 1);
  check_dist(p.deps_per_rule, "deps_per_rule", 0);
  if (p.head_position) check_dist(*p.head_position, "head_position", 0);
  if (p.height_limit < 1) throw ParamError("height_limit", "must be >= 1");
  prob(p.nmg_sync_ratios.full, "nmg_sync_ratios");
  prob(p.nmg_sync_ratios.start, "nmg_sync_ratios");
  prob(p.nmg_sync_ratios.end, "nmg_sync_ratios");
  const double s = p.nmg_sync_ratios.full + p.nmg_sync_ratios.start + p.nmg_sync_ratios.end;
  if (std::abs(s - 1.0) > 1e-9) throw ParamError("nmg_sync_ratios", "must sum to 1");
  if (!(p.duration_scale_mean > 0.0) || !std::isfinite(p.duration_scale_mean))
    throw ParamError("duration_scale_mean", "must be > 0");
  if (!(p.duration_scale_std >= 0.0) || !std::isfinite(p.duration_scale_std))
    throw ParamError("duration_scale_std", "must be >= 0");
  if (!(p.translation_std >= 0.0) || !std::isfinite(p.translation_std))
    throw ParamError("translation_std", "must be >= 0");
}

}  // namespace slgen
