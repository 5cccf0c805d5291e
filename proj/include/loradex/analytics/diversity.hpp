#ifndef LORADEX_ANALYTICS_DIVERSITY_HPP
#define LORADEX_ANALYTICS_DIVERSITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "loradex/error.hpp"
#include "loradex/index.hpp"
#include "loradex/query.hpp"

namespace loradex {

/// How often each adapter appeared, over the full corpus support. Adapters
/// of the support that are not listed in `counts` have count zero.
struct CountDistribution {
  std::map<std::string, std::uint64_t> counts;
  std::size_t support_size = 0;

  [[nodiscard]] std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [id, c] : counts) t += c;
    return t;
  }

  /// All n counts, zeros included, in unspecified order.
  [[nodiscard]] std::vector<std::uint64_t> dense() const {
    std::vector<std::uint64_t> out;
    out.reserve(support_size);
    for (const auto& [id, c] : counts) out.push_back(c);
    out.resize(std::max(support_size, out.size()), 0);
    return out;
  }

  static CountDistribution from_counts(const std::vector<std::uint64_t>& counts) {
    CountDistribution d;
    d.support_size = counts.size();
    for (std::size_t i = 0; i < counts.size(); ++i) d.counts["#" + std::to_string(i)] = counts[i];
    return d;
  }
};

struct DiversityMetrics {
  double normalized_entropy = 0.0;  ///< H / ln n, natural log
  double gini = 0.0;                ///< mean absolute difference over 2 * mean
  double effective_count = 0.0;     ///< exp(H)
};

inline DiversityMetrics diversity_metrics(const CountDistribution& dist) {
  if (dist.support_size == 0) throw data_error("diversity of an empty support");
  if (dist.counts.size() > dist.support_size) throw data_error("more counted adapters than support size");
  auto counts = dist.dense();
  const std::uint64_t total = dist.total();
  if (total == 0) throw data_error("diversity of a distribution with no observations");
  const auto n = counts.size();
  const double t = static_cast<double>(total);

  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / t;
    h -= p * std::log(p);
  }
  DiversityMetrics m;
  m.normalized_entropy = n > 1 ? h / std::log(static_cast<double>(n)) : 0.0;
  m.effective_count = std::exp(h);

  // sum_i sum_j |c_i - c_j| = 2 sum_i (2i - n - 1) c_(i) over ascending c, i 1-based.
  std::sort(counts.begin(), counts.end());
  std::int64_t numer = 0;
  for (std::size_t i = 0; i < n; ++i) {
    numer += (2 * static_cast<std::int64_t>(i + 1) - static_cast<std::int64_t>(n) - 1) *
             static_cast<std::int64_t>(counts[i]);
  }
  // sum|ci-cj| / (2 n^2 mean) = numer / (n total); both operands are exact
  // integers, so the quotient is correctly rounded.
  m.gini = static_cast<double>(numer) / (static_cast<double>(n) * t);
  return m;
}

/// Tallies appearances among the first k passed entries of each result.
/// Support size comes from the results' provenance.
inline CountDistribution retrieval_counts(const std::vector<RetrievalResult>& results, std::size_t k) {
  if (k < 1) throw usage_error("k must be at least 1");
  CountDistribution dist;
  if (results.empty()) throw data_error("no retrieval results to count");
  const auto& index_id = results.front().provenance.index_id;
  dist.support_size = results.front().provenance.corpus_size;
  for (const auto& r : results) {
    if (r.provenance.index_id != index_id || r.provenance.corpus_size != dist.support_size) {
      throw data_error("retrieval results come from different indices ('" + index_id + "' and '" +
                       r.provenance.index_id + "')");
    }
    std::size_t taken = 0;
    for (const auto& e : r.entries) {
      if (!e.passed) continue;
      if (taken++ == k) break;
      ++dist.counts[e.adapter_id];
    }
  }
  return dist;
}

/// As above, with the support spelled out from the index (zeros listed).
inline CountDistribution retrieval_counts(const std::vector<RetrievalResult>& results, std::size_t k,
                                          const CorpusIndex& index) {
  auto dist = retrieval_counts(results, k);
  if (results.front().provenance.index_id != id_of(index)) {
    throw data_error("retrieval results were not produced by index '" + id_of(index) + "'");
  }
  for (const auto& [id, sig] : index.signatures) dist.counts.try_emplace(id, 0);
  dist.support_size = index.signatures.size();
  return dist;
}

}  // namespace loradex

#endif  // LORADEX_ANALYTICS_DIVERSITY_HPP
