#ifndef LORADEX_QUERY_HPP
#define LORADEX_QUERY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "loradex/error.hpp"
#include "loradex/index.hpp"
#include "loradex/prompts.hpp"
#include "loradex/provider.hpp"
#include "loradex/vector_math.hpp"

namespace loradex {

/// How the query text is combined with each retrieval prompt.
enum class QueryVariant {
  suffix,             ///< u(p + q) - u(p)
  prefix,             ///< u(q + p) - u(p)
  prefix_and_suffix,  ///< u(q + p + q) - u(p)
  query_only,         ///< u(q), no prompt set
};

inline const char* to_string(QueryVariant v) {
  switch (v) {
    case QueryVariant::suffix:
      return "suffix";
    case QueryVariant::prefix:
      return "prefix";
    case QueryVariant::prefix_and_suffix:
      return "prefix_and_suffix";
    case QueryVariant::query_only:
      return "query_only";
  }
  return "suffix";
}

inline QueryVariant parse_variant(const std::string& s) {
  for (auto v : {QueryVariant::suffix, QueryVariant::prefix, QueryVariant::prefix_and_suffix, QueryVariant::query_only}) {
    if (s == to_string(v)) return v;
  }
  throw usage_error("unknown query variant '" + s + "' (expected suffix, prefix, prefix_and_suffix or query_only)");
}

inline constexpr const char* kDefaultSeparator = ", ";

struct QueryVector {
  std::string query_text;
  Vector vector;
  QueryVariant variant = QueryVariant::suffix;
  std::string prompt_set_id;  ///< empty for query_only
  std::string encoder_tag;
  std::size_t truncated_prompts = 0;
};

inline std::string compose_prompt(const std::string& prompt, const std::string& query, QueryVariant variant,
                                  const std::string& sep) {
  switch (variant) {
    case QueryVariant::suffix:
      return prompt + sep + query;
    case QueryVariant::prefix:
      return query + sep + prompt;
    case QueryVariant::prefix_and_suffix:
      return query + sep + prompt + sep + query;
    case QueryVariant::query_only:
      return query;
  }
  return prompt + sep + query;
}

/// Reciprocal textual diff: the mean over retrieval prompts p of
/// u(compose(p, q)) - u(p), reduced in prompt order.
inline QueryVector build_query_vector(const std::string& query_text, const PromptSet& retrieval_prompts,
                                      const EmbeddingProvider& encoder, QueryVariant variant = QueryVariant::suffix,
                                      const std::string& separator = kDefaultSeparator) {
  if (query_text.empty()) throw usage_error("query text is empty");
  const auto probe = encoder.probe();
  QueryVector qv;
  qv.query_text = query_text;
  qv.variant = variant;
  qv.encoder_tag = probe.encoder_tag;

  if (variant == QueryVariant::query_only) {
    const std::vector<std::string> texts{query_text};
    const auto emb = encoder.embed_texts_detailed(texts);
    qv.vector.assign(emb.vectors.at(0).begin(), emb.vectors.at(0).end());
    qv.truncated_prompts = emb.truncated.empty() ? 0 : static_cast<std::size_t>(emb.truncated[0]);
  } else {
    if (retrieval_prompts.role != PromptRole::retrieval) throw usage_error("query prompts must have the retrieval role");
    const auto n = retrieval_prompts.size();
    if (n == 0) throw data_error("retrieval prompt set is empty");
    // Layout: [composed_0 .. composed_{n-1}, plain_0 .. plain_{n-1}].
    std::vector<std::string> texts;
    texts.reserve(2 * n);
    for (const auto& p : retrieval_prompts.prompts) texts.push_back(compose_prompt(p.text, query_text, variant, separator));
    for (const auto& p : retrieval_prompts.prompts) texts.push_back(p.text);
    TextEmbeddings emb;
    try {
      emb = encoder.embed_texts_detailed(texts);
    } catch (const EmbedItemError& e) {
      const auto& prompt = retrieval_prompts.prompts.at(e.index() % n);
      throw Error(e.kind(), std::string(e.what()) + " (retrieval prompt " + prompt.id + ")");
    }
    if (emb.vectors.size() != 2 * n) throw provider_error("provider returned the wrong number of vectors");
    qv.vector = pairwise_row_sum(n, probe.dim, [&](std::size_t i, std::span<double> acc) {
      const auto& with = emb.vectors[i];
      const auto& without = emb.vectors[n + i];
      for (std::size_t j = 0; j < acc.size(); ++j) {
        acc[j] += static_cast<double>(with[j]) - static_cast<double>(without[j]);
      }
    });
    for (auto& x : qv.vector) x /= static_cast<double>(n);
    for (std::size_t i = 0; i < n && i < emb.truncated.size(); ++i) qv.truncated_prompts += emb.truncated[i] ? 1 : 0;
    qv.prompt_set_id = retrieval_prompts.id;
  }
  if (qv.vector.size() != probe.dim) throw provider_error("provider returned vectors of the wrong dimension");
  if (norm(qv.vector) == 0.0) {
    throw Error(ErrorKind::zero_query,
                "query \"" + query_text + "\" has a zero-norm query vector under encoder '" + qv.encoder_tag + "'");
  }
  return qv;
}

struct RankedEntry {
  std::string adapter_id;
  double score = 0.0;       ///< cosine; -inf when the adapter's direction is zero
  bool degenerate = false;  ///< zero-norm semantic direction
};

/// Scores every adapter by cosine(direction, query) and sorts descending,
/// breaking ties by adapter id. Zero-direction adapters go last.
inline std::vector<RankedEntry> rank(const CorpusIndex& index, const QueryVector& qv) {
  if (qv.encoder_tag != index.encoder_tag) {
    throw data_error("encoder mismatch: query encoded with '" + qv.encoder_tag + "', index built with '" +
                     index.encoder_tag + "'");
  }
  if (qv.vector.size() != index.dim) {
    throw data_error("query vector dim " + std::to_string(qv.vector.size()) + " does not match index dim " +
                     std::to_string(index.dim));
  }
  const std::span<const double> q(qv.vector);
  const double qnorm = norm(q);
  if (qnorm == 0.0) throw Error(ErrorKind::zero_query, "query vector has zero norm");
  std::vector<RankedEntry> out;
  out.reserve(index.signatures.size());
  for (const auto& [id, sig] : index.signatures) {
    const std::span<const double> d(sig.direction);
    const double dnorm = norm(d);
    if (dnorm == 0.0) {
      out.push_back({id, -std::numeric_limits<double>::infinity(), true});
    } else {
      out.push_back({id, dot(d, q) / (dnorm * qnorm), false});
    }
  }
  std::sort(out.begin(), out.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.adapter_id < b.adapter_id;
  });
  return out;
}

struct FilterConfig {
  double tau_s = 9.8;    ///< strength must be strictly below
  double tau_c = 0.041;  ///< consistency must be strictly above
  std::size_t top_k = 5;
  bool include_failed = false;  ///< keep failed entries (with reasons) in the result

  void validate() const {
    if (top_k < 1) throw usage_error("top_k must be at least 1");
    if (std::isnan(tau_s) || std::isnan(tau_c)) throw usage_error("thresholds must not be NaN");
  }
};

struct ResultEntry {
  std::string adapter_id;
  double score = 0.0;
  double strength = 0.0;
  double consistency = 0.0;
  bool passed = false;
  std::string reason;  ///< "strength", "consistency", "strength,consistency", "zero-direction" or empty
};

struct QueryProvenance {
  std::string query_text;
  std::string variant = to_string(QueryVariant::suffix);
  std::string prompt_set_id;
  std::string encoder_tag;
  std::string index_id;
  std::size_t corpus_size = 0;
};

struct RetrievalResult {
  std::vector<ResultEntry> entries;
  FilterConfig config;
  QueryProvenance provenance;
  std::vector<std::string> warnings;

  [[nodiscard]] std::vector<const ResultEntry*> passed() const {
    std::vector<const ResultEntry*> out;
    for (const auto& e : entries) {
      if (e.passed) out.push_back(&e);
    }
    return out;
  }
};

/// Candidate-set membership: strict inequalities at both thresholds.
inline bool passes_filter(const LoraSignature& sig, double tau_s, double tau_c) {
  return sig.strength < tau_s && sig.consistency > tau_c;
}

/// Marks entries with strength < tau_s and consistency > tau_c as passed
/// and keeps the first top_k of them. Failed entries ranked above the last
/// kept one are retained only when config.include_failed is set.
inline RetrievalResult filter_and_truncate(const std::vector<RankedEntry>& ranked, const CorpusIndex& index,
                                           const FilterConfig& config) {
  config.validate();
  RetrievalResult result;
  result.config = config;
  result.provenance.encoder_tag = index.encoder_tag;
  result.provenance.index_id = id_of(index);
  result.provenance.corpus_size = index.signatures.size();
  std::size_t kept = 0;
  for (const auto& r : ranked) {
    if (kept == config.top_k) break;
    const auto& sig = index.at(r.adapter_id);
    ResultEntry e{r.adapter_id, r.score, sig.strength, sig.consistency, false, {}};
    if (r.degenerate) {
      e.reason = "zero-direction";
    } else {
      const bool strong = !(sig.strength < config.tau_s);
      const bool inconsistent = !(sig.consistency > config.tau_c);
      if (strong && inconsistent) {
        e.reason = "strength,consistency";
      } else if (strong) {
        e.reason = "strength";
      } else if (inconsistent) {
        e.reason = "consistency";
      }
    }
    e.passed = e.reason.empty();
    if (e.passed) ++kept;
    if (e.passed || config.include_failed) result.entries.push_back(std::move(e));
  }
  if (kept == 0) result.warnings.emplace_back("no adapter passed the strength/consistency filter");
  return result;
}

/// Query vector, ranking and filtering in one call.
inline RetrievalResult retrieve(const CorpusIndex& index, const QueryVector& qv, const FilterConfig& config) {
  auto result = filter_and_truncate(rank(index, qv), index, config);
  result.provenance.query_text = qv.query_text;
  result.provenance.variant = to_string(qv.variant);
  result.provenance.prompt_set_id = qv.prompt_set_id;
  if (qv.truncated_prompts > 0) {
    result.warnings.push_back(std::to_string(qv.truncated_prompts) + " prompt(s) truncated by the encoder");
  }
  return result;
}

inline RetrievalResult retrieve(const CorpusIndex& index, const std::string& query_text, const PromptSet& prompts,
                                const EmbeddingProvider& encoder, const FilterConfig& config,
                                QueryVariant variant = QueryVariant::suffix,
                                const std::string& separator = kDefaultSeparator) {
  config.validate();
  const auto qv = build_query_vector(query_text, prompts, encoder, variant, separator);
  return retrieve(index, qv, config);
}

}  // namespace loradex

#endif  // LORADEX_QUERY_HPP
