#ifndef LORADEX_ANALYTICS_SCREENING_HPP
#define LORADEX_ANALYTICS_SCREENING_HPP

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "loradex/error.hpp"
#include "loradex/index.hpp"
#include "loradex/query.hpp"

namespace loradex {

inline constexpr const char* kScreeningDisclaimer =
    "Screening aid only. Strength and consistency percentiles are heuristic proxies used to prioritize "
    "human review; a flag is not a legal determination of infringement or of any other legal question.";

enum class Quadrant { weak_inconsistent, weak_consistent, strong_inconsistent, strong_consistent };

inline const char* to_string(Quadrant q) {
  switch (q) {
    case Quadrant::weak_inconsistent:
      return "weak-inconsistent";
    case Quadrant::weak_consistent:
      return "weak-consistent";
    case Quadrant::strong_inconsistent:
      return "strong-inconsistent";
    case Quadrant::strong_consistent:
      return "strong-consistent";
  }
  return "weak-inconsistent";
}

/// Fractional percentile ranks in [0, 1]: position / (m - 1) in ascending
/// order, tied values share their mid-rank. A single value gets 0.5.
inline std::vector<double> percentile_ranks(const std::vector<double>& values) {
  const std::size_t m = values.size();
  std::vector<double> out(m, 0.5);
  if (m < 2) return out;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  for (std::size_t lo = 0; lo < m;) {
    std::size_t hi = lo;
    while (hi + 1 < m && values[order[hi + 1]] == values[order[lo]]) ++hi;
    const double mid = (static_cast<double>(lo) + static_cast<double>(hi)) / 2.0;
    for (std::size_t i = lo; i <= hi; ++i) out[order[i]] = mid / static_cast<double>(m - 1);
    lo = hi + 1;
  }
  return out;
}

struct ScreeningEntry {
  std::string adapter_id;
  double strength = 0.0;
  double consistency = 0.0;
  double strength_rank = 0.0;
  double consistency_rank = 0.0;
  Quadrant quadrant = Quadrant::weak_inconsistent;
  bool flag = false;                 ///< strong-consistent: review recommended
  std::optional<bool> passes_filter;  ///< metric-space threshold view, when thresholds are given
};

struct ScreeningReport {
  std::vector<ScreeningEntry> entries;  ///< adapter id order
  double strength_split = 0.5;
  double consistency_split = 0.5;
  std::optional<double> tau_s;
  std::optional<double> tau_c;
  std::string disclaimer = kScreeningDisclaimer;

  [[nodiscard]] std::vector<std::string> flagged() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
      if (e.flag) out.push_back(e.adapter_id);
    }
    return out;
  }
};

/// Places each adapter in a strength x consistency quadrant by comparing
/// its percentile ranks with the splits; ranks strictly above a split are
/// "strong" / "consistent".
inline ScreeningReport screening_report(const CorpusIndex& index, double strength_split = 0.5,
                                        double consistency_split = 0.5,
                                        const std::optional<FilterConfig>& thresholds = std::nullopt) {
  if (index.signatures.empty()) throw data_error("screening needs a non-empty index");
  if (!(strength_split >= 0.0 && strength_split <= 1.0 && consistency_split >= 0.0 && consistency_split <= 1.0)) {
    throw usage_error("screening splits must lie in [0, 1]");
  }
  std::vector<double> strengths, consistencies;
  for (const auto& [id, sig] : index.signatures) {
    strengths.push_back(sig.strength);
    consistencies.push_back(sig.consistency);
  }
  const auto s_rank = percentile_ranks(strengths);
  const auto c_rank = percentile_ranks(consistencies);
  ScreeningReport report;
  report.strength_split = strength_split;
  report.consistency_split = consistency_split;
  if (thresholds) {
    report.tau_s = thresholds->tau_s;
    report.tau_c = thresholds->tau_c;
  }
  std::size_t i = 0;
  for (const auto& [id, sig] : index.signatures) {
    ScreeningEntry e;
    e.adapter_id = id;
    e.strength = sig.strength;
    e.consistency = sig.consistency;
    e.strength_rank = s_rank[i];
    e.consistency_rank = c_rank[i];
    const bool strong = e.strength_rank > strength_split;
    const bool consistent = e.consistency_rank > consistency_split;
    e.quadrant = strong ? (consistent ? Quadrant::strong_consistent : Quadrant::strong_inconsistent)
                        : (consistent ? Quadrant::weak_consistent : Quadrant::weak_inconsistent);
    e.flag = e.quadrant == Quadrant::strong_consistent;
    if (thresholds) e.passes_filter = passes_filter(sig, thresholds->tau_s, thresholds->tau_c);
    report.entries.push_back(std::move(e));
    ++i;
  }
  return report;
}

}  // namespace loradex

#endif  // LORADEX_ANALYTICS_SCREENING_HPP
