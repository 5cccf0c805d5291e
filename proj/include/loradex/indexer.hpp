#ifndef LORADEX_INDEXER_HPP
#define LORADEX_INDEXER_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "loradex/corpus.hpp"
#include "loradex/error.hpp"
#include "loradex/index.hpp"
#include "loradex/vector_math.hpp"

namespace loradex {

struct SampleKey {
  std::string prompt_id;
  std::uint64_t seed = 0;
};

/// All CLIP-diff vectors of one adapter, one row per (prompt, seed).
class DiffCorpus {
 public:
  DiffCorpus(std::string adapter_id, std::size_t dim) : adapter_id_(std::move(adapter_id)), dim_(dim) {}

  void reserve(std::size_t rows) {
    keys_.reserve(rows);
    data_.reserve(rows * dim_);
  }

  void add(SampleKey key, std::span<const double> diff) {
    if (diff.size() != dim_) throw data_error("diff dimension mismatch for adapter '" + adapter_id_ + "'");
    keys_.push_back(std::move(key));
    data_.insert(data_.end(), diff.begin(), diff.end());
  }

  /// Appends a row filled in place by the caller.
  std::span<double> add_row(SampleKey key) {
    keys_.push_back(std::move(key));
    data_.resize(data_.size() + dim_);
    return std::span<double>(data_).subspan(data_.size() - dim_, dim_);
  }

  [[nodiscard]] const std::string& adapter_id() const noexcept { return adapter_id_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t sample_count() const noexcept { return keys_.size(); }
  [[nodiscard]] const SampleKey& key(std::size_t i) const { return keys_.at(i); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
  }

 private:
  std::string adapter_id_;
  std::size_t dim_;
  std::vector<SampleKey> keys_;
  std::vector<double> data_;
};

/// diffs[p, s] = vector(adapter, p, s) - vector(BASE, p, s).
inline DiffCorpus compute_diffs(const Corpus& corpus, const std::string& adapter_id, std::size_t min_samples = 1) {
  const auto adapter = corpus.adapter_index(adapter_id);
  if (!adapter) throw Error(ErrorKind::not_found, "adapter '" + adapter_id + "' not in corpus");
  const auto [lo, hi] = corpus.adapter_range(*adapter);
  DiffCorpus diffs(adapter_id, corpus.dim());
  diffs.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& e = corpus.entries()[i];
    const auto base = corpus.find(Corpus::kBase, e.prompt, e.seed);
    if (!base) {
      throw data_error("missing BASE record for (" + corpus.prompt_name(e.prompt) + ", " + std::to_string(e.seed) +
                       ") needed by adapter '" + adapter_id + "'");
    }
    auto out = diffs.add_row({corpus.prompt_name(e.prompt), e.seed});
    const auto a = corpus.vector(i);
    const auto b = corpus.vector(*base);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<double>(a[j]) - static_cast<double>(b[j]);
  }
  if (diffs.sample_count() < min_samples) {
    throw data_error("adapter '" + adapter_id + "' has " + std::to_string(diffs.sample_count()) +
                     " samples, fewer than the required " + std::to_string(min_samples));
  }
  return diffs;
}

/// Arithmetic mean of the diffs (pairwise summation, no re-normalization).
inline Vector semantic_direction(const DiffCorpus& diffs) {
  const auto n = diffs.sample_count();
  if (n == 0) throw data_error("semantic direction of empty diff corpus");
  auto sum = pairwise_row_sum(n, diffs.dim(), [&](std::size_t i, std::span<double> acc) {
    const auto r = diffs.row(i);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += r[j];
  });
  for (auto& x : sum) x /= static_cast<double>(n);
  return sum;
}

/// Mean Euclidean norm of the diffs.
inline double strength(const DiffCorpus& diffs) {
  const auto n = diffs.sample_count();
  if (n == 0) throw data_error("strength of empty diff corpus");
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = norm(diffs.row(i));
  return pairwise_sum(norms) / static_cast<double>(n);
}

struct ConsistencyResult {
  double value = 0.0;
  std::size_t pairs_used = 0;
  std::size_t excluded_pairs = 0;  ///< pairs involving a zero-norm diff
};

/// Mean pairwise cosine over unordered pairs of nonzero diffs.
///
/// Uses sum_{i<j} cos(v_i, v_j) = (|sum_i v_i/|v_i||^2 - m) / 2 over the m
/// nonzero diffs, which is O(n d) instead of O(n^2 d).
inline ConsistencyResult consistency_detailed(const DiffCorpus& diffs) {
  const auto n = diffs.sample_count();
  if (n < 2) throw data_error("consistency needs at least 2 diffs, got " + std::to_string(n));
  std::vector<double> inv_norm(n);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double len = norm(diffs.row(i));
    inv_norm[i] = len > 0.0 ? 1.0 / len : 0.0;
    nonzero += len > 0.0 ? 1 : 0;
  }
  ConsistencyResult out;
  out.excluded_pairs = n * (n - 1) / 2 - nonzero * (nonzero - 1 + (nonzero == 0)) / 2;
  if (nonzero < 2) {
    throw data_error("consistency undefined for adapter '" + diffs.adapter_id() + "': fewer than 2 nonzero diffs");
  }
  out.pairs_used = nonzero * (nonzero - 1) / 2;
  const auto unit_sum = pairwise_row_sum(n, diffs.dim(), [&](std::size_t i, std::span<double> acc) {
    if (inv_norm[i] == 0.0) return;
    const auto r = diffs.row(i);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += r[j] * inv_norm[i];
  });
  const double m = static_cast<double>(nonzero);
  const double sq = dot(std::span<const double>(unit_sum), std::span<const double>(unit_sum));
  out.value = std::clamp((sq - m) / (m * (m - 1.0)), -1.0, 1.0);
  return out;
}

inline double consistency(const DiffCorpus& diffs) { return consistency_detailed(diffs).value; }

struct IndexBuildConfig {
  std::size_t min_samples = 2;
  std::size_t parallelism = 0;  ///< 0 = hardware concurrency
  double strength_scale = 1.0;
  std::string encoder_tag = kDefaultEncoderTag;
  std::string created_at;
};

struct AdapterBuildEntry {
  std::string adapter_id;
  std::size_t sample_count = 0;
  std::optional<double> strength;
  std::optional<double> consistency;
  std::size_t excluded_pairs = 0;
  std::string exclusion_reason;  ///< empty when indexed

  [[nodiscard]] bool indexed() const noexcept { return exclusion_reason.empty(); }
};

struct BuildReport {
  std::vector<AdapterBuildEntry> adapters;  ///< adapter id order

  [[nodiscard]] std::size_t indexed_count() const {
    return static_cast<std::size_t>(
        std::count_if(adapters.begin(), adapters.end(), [](const auto& a) { return a.indexed(); }));
  }
};

struct BuildOutcome {
  CorpusIndex index;
  BuildReport report;
};

/// Computes the signature of one adapter; the returned entry records why
/// the adapter was excluded, if it was.
inline std::pair<std::optional<LoraSignature>, AdapterBuildEntry> signature_of(const DiffCorpus& diffs,
                                                                              const IndexBuildConfig& config) {
  AdapterBuildEntry entry;
  entry.adapter_id = diffs.adapter_id();
  entry.sample_count = diffs.sample_count();
  if (diffs.sample_count() < config.min_samples) {
    entry.exclusion_reason = "fewer than min_samples (" + std::to_string(config.min_samples) + ") samples";
    return {std::nullopt, entry};
  }
  LoraSignature sig;
  sig.adapter_id = diffs.adapter_id();
  sig.dim = diffs.dim();
  sig.encoder_tag = config.encoder_tag;
  sig.sample_count = diffs.sample_count();
  sig.direction = semantic_direction(diffs);
  sig.strength = strength(diffs);
  entry.strength = sig.strength;
  try {
    const auto c = consistency_detailed(diffs);
    sig.consistency = c.value;
    entry.consistency = c.value;
    entry.excluded_pairs = c.excluded_pairs;
  } catch (const Error& e) {
    entry.exclusion_reason = e.what();
    return {std::nullopt, entry};
  }
  return {std::move(sig), entry};
}

/// Builds an index from adapters whose diffs are produced on demand by
/// `source(adapter_id)`. Adapters are processed concurrently; the output
/// is assembled in the given id order, so it is independent of parallelism.
/// `source` must be safe to call from several threads at once.
inline BuildOutcome build_index(std::span<const std::string> adapter_ids,
                                const std::function<DiffCorpus(const std::string&)>& source,
                                const IndexBuildConfig& config, std::size_t dim, CorpusManifest manifest = {}) {
  if (config.min_samples < 2) throw usage_error("min_samples must be at least 2");
  const std::size_t n = adapter_ids.size();
  std::vector<std::optional<LoraSignature>> sigs(n);
  std::vector<AdapterBuildEntry> entries(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        auto diffs = source(adapter_ids[i]);
        std::tie(sigs[i], entries[i]) = signature_of(diffs, config);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = config.parallelism ? config.parallelism : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  // First failure in id order, so errors are deterministic too.
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  BuildOutcome out;
  out.index.dim = dim;
  out.index.encoder_tag = config.encoder_tag;
  out.index.created_at = config.created_at;
  out.index.strength_scale = config.strength_scale;
  out.index.manifest = manifest;
  for (std::size_t i = 0; i < n; ++i) {
    if (sigs[i]) out.index.signatures.emplace(adapter_ids[i], std::move(*sigs[i]));
  }
  out.report.adapters = std::move(entries);
  if (out.index.signatures.empty()) throw data_error("no adapter could be indexed");
  out.index.id = index_id(out.index);
  return out;
}

/// Builds an index over every adapter in the corpus.
inline BuildOutcome build_index(const Corpus& corpus, const IndexBuildConfig& config) {
  if (!corpus.adapter_ids().empty() && !corpus.has_base()) throw data_error("corpus has no BASE records");
  return build_index(
      corpus.adapter_ids(), [&](const std::string& id) { return compute_diffs(corpus, id); }, config, corpus.dim(),
      corpus.manifest());
}

/// Plain-text build report, one adapter per line.
inline void write_build_report(std::ostream& out, const BuildReport& report) {
  out << "adapter\tsample_count\tstrength\tconsistency\texcluded_pairs\tstatus\n";
  for (const auto& a : report.adapters) {
    out << a.adapter_id << '\t' << a.sample_count << '\t';
    out << (a.strength ? std::to_string(*a.strength) : "-") << '\t';
    out << (a.consistency ? std::to_string(*a.consistency) : "-") << '\t';
    out << a.excluded_pairs << '\t' << (a.indexed() ? "indexed" : "excluded: " + a.exclusion_reason) << '\n';
  }
  out << "indexed " << report.indexed_count() << " of " << report.adapters.size() << " adapters\n";
}

}  // namespace loradex

#endif  // LORADEX_INDEXER_HPP
