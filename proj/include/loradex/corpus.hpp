#ifndef LORADEX_CORPUS_HPP
#define LORADEX_CORPUS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "loradex/error.hpp"
#include "loradex/vector_math.hpp"

namespace loradex {

inline constexpr std::size_t kDefaultDim = 512;
inline constexpr const char* kDefaultEncoderTag = "clip-vit-b32-unnormalized";

/// One embedded generation. An empty adapter_id is the vanilla base model.
struct GenerationRecord {
  std::optional<std::string> adapter_id;
  std::string prompt_id;
  std::uint64_t seed = 0;
  EmbeddingVector vector;

  [[nodiscard]] bool is_base() const noexcept { return !adapter_id.has_value(); }
};

/// A text embedding u(text), keyed by the exact text bytes.
struct TextRecord {
  std::string text;
  EmbeddingVector vector;
};

using Record = std::variant<GenerationRecord, TextRecord>;

inline std::string format_key(const std::optional<std::string>& adapter_id, const std::string& prompt_id,
                              std::uint64_t seed) {
  return "(" + adapter_id.value_or("BASE") + ", " + prompt_id + ", " + std::to_string(seed) + ")";
}

struct CorpusManifest {
  std::size_t adapters = 0;  ///< distinct adapter ids, BASE included
  std::size_t prompts = 0;
  std::size_t seeds = 0;
  std::size_t records = 0;  ///< generation records
  std::size_t text_records = 0;

  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

struct IngestIssue {
  std::size_t position = 0;  ///< 1-based position in the input stream, 0 if unknown
  std::string key;
  std::string reason;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::vector<IngestIssue> rejected;  ///< duplicates and (non-strict) invalid records
};

/// Validated, deduplicated, immutable set of embedding records.
///
/// Generation records are stored sorted by (adapter id, prompt id, seed) with
/// BASE after all adapters, so the stored layout does not depend on the
/// order in which records were ingested.
class Corpus {
 public:
  static constexpr std::uint32_t kBase = std::numeric_limits<std::uint32_t>::max();

  struct Entry {
    std::uint32_t adapter = kBase;
    std::uint32_t prompt = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  Corpus() = default;

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] std::span<const Entry> entries() const noexcept { return entries_; }
  [[nodiscard]] std::span<const float> vector(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dim_, dim_);
  }

  /// Adapter ids (BASE excluded), sorted.
  [[nodiscard]] const std::vector<std::string>& adapter_ids() const noexcept { return adapters_; }
  [[nodiscard]] const std::vector<std::string>& prompt_ids() const noexcept { return prompts_; }
  [[nodiscard]] const std::map<std::string, EmbeddingVector>& texts() const noexcept { return texts_; }

  [[nodiscard]] const std::string& prompt_name(std::uint32_t p) const { return prompts_.at(p); }
  [[nodiscard]] std::optional<std::string> adapter_name(std::uint32_t a) const {
    if (a == kBase) return std::nullopt;
    return adapters_.at(a);
  }

  [[nodiscard]] std::optional<std::uint32_t> adapter_index(const std::string& id) const {
    auto it = std::lower_bound(adapters_.begin(), adapters_.end(), id);
    if (it == adapters_.end() || *it != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - adapters_.begin());
  }

  [[nodiscard]] bool has_base() const noexcept {
    return !entries_.empty() && entries_.back().adapter == kBase;
  }

  /// Half-open range of entry positions belonging to one adapter (or BASE).
  [[nodiscard]] std::pair<std::size_t, std::size_t> adapter_range(std::uint32_t adapter) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), adapter,
                               [](const Entry& e, std::uint32_t a) { return e.adapter < a; });
    auto hi = std::upper_bound(lo, entries_.end(), adapter,
                               [](std::uint32_t a, const Entry& e) { return a < e.adapter; });
    return {static_cast<std::size_t>(lo - entries_.begin()), static_cast<std::size_t>(hi - entries_.begin())};
  }

  [[nodiscard]] std::optional<std::size_t> find(std::uint32_t adapter, std::uint32_t prompt,
                                                std::uint64_t seed) const {
    const Entry key{adapter, prompt, seed};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_less);
    if (it == entries_.end() || !(*it == key)) return std::nullopt;
    return static_cast<std::size_t>(it - entries_.begin());
  }

  [[nodiscard]] GenerationRecord record(std::size_t i) const {
    const auto& e = entries_.at(i);
    auto v = vector(i);
    return {adapter_name(e.adapter), prompts_[e.prompt], e.seed, EmbeddingVector(v.begin(), v.end())};
  }

  [[nodiscard]] CorpusManifest manifest() const {
    CorpusManifest m;
    std::set<std::uint64_t> seeds;
    std::set<std::uint32_t> adapters;
    for (const auto& e : entries_) {
      seeds.insert(e.seed);
      adapters.insert(e.adapter);
    }
    m.adapters = adapters.size();
    m.prompts = prompts_.size();
    m.seeds = seeds.size();
    m.records = entries_.size();
    m.text_records = texts_.size();
    return m;
  }

  /// Keys (p, s) used by some adapter record that have no BASE counterpart.
  [[nodiscard]] std::vector<std::string> missing_base_keys() const {
    std::set<std::pair<std::uint32_t, std::uint64_t>> missing;
    for (const auto& e : entries_) {
      if (e.adapter == kBase) continue;
      if (!find(kBase, e.prompt, e.seed)) missing.emplace(e.prompt, e.seed);
    }
    std::vector<std::string> out;
    for (const auto& [p, s] : missing) out.push_back("(" + prompts_[p] + ", " + std::to_string(s) + ")");
    return out;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    if (a.dim_ != b.dim_ || a.adapters_ != b.adapters_ || a.prompts_ != b.prompts_ || a.entries_ != b.entries_ ||
        a.texts_.size() != b.texts_.size() || a.data_.size() != b.data_.size())
      return false;
    // Bitwise comparison so that -0.0 and 0.0 are distinguished.
    auto bits_equal = [](const std::vector<float>& x, const std::vector<float>& y) {
      return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](float l, float r) {
        return std::bit_cast<std::uint32_t>(l) == std::bit_cast<std::uint32_t>(r);
      });
    };
    if (!bits_equal(a.data_, b.data_)) return false;
    for (auto ia = a.texts_.begin(), ib = b.texts_.begin(); ia != a.texts_.end(); ++ia, ++ib) {
      if (ia->first != ib->first || !bits_equal(ia->second, ib->second)) return false;
    }
    return true;
  }

 private:
  friend class CorpusBuilder;

  static bool entry_less(const Entry& l, const Entry& r) {
    return std::tie(l.adapter, l.prompt, l.seed) < std::tie(r.adapter, r.prompt, r.seed);
  }

  std::size_t dim_ = 0;
  std::vector<std::string> adapters_;
  std::vector<std::string> prompts_;
  std::vector<Entry> entries_;
  std::vector<float> data_;
  std::map<std::string, EmbeddingVector> texts_;
};

/// Single-writer accumulator that validates records and produces a Corpus.
///
/// In strict mode (the default) the first invalid record throws a data
/// error naming its key. Duplicate keys are never fatal: the first
/// occurrence in stream order wins and later ones are reported.
class CorpusBuilder {
 public:
  explicit CorpusBuilder(std::size_t expected_dim, bool strict = true) : dim_(expected_dim), strict_(strict) {
    if (dim_ == 0) throw usage_error("expected dimension must be positive");
  }

  void add(Record record, std::size_t position = 0) {
    std::visit([&](auto&& r) { add(std::move(r), position); }, std::move(record));
  }

  void add(GenerationRecord record, std::size_t position = 0) {
    ++position_;
    const std::size_t pos = position ? position : position_;
    const std::string key = format_key(record.adapter_id, record.prompt_id, record.seed);
    if (auto problem = check_vector(record.vector)) {
      reject(pos, key, *problem);
      return;
    }
    if (record.prompt_id.empty()) {
      reject(pos, key, "missing required field prompt_id");
      return;
    }
    Pending p;
    p.adapter = record.adapter_id ? intern(adapter_ids_, adapter_names_, *record.adapter_id) : Corpus::kBase;
    p.prompt = intern(prompt_ids_, prompt_names_, record.prompt_id);
    p.seed = record.seed;
    p.position = pos;
    pending_.push_back(p);
    data_.insert(data_.end(), record.vector.begin(), record.vector.end());
  }

  void add(TextRecord record, std::size_t position = 0) {
    ++position_;
    const std::size_t pos = position ? position : position_;
    const std::string key = "text \"" + record.text + "\"";
    if (auto problem = check_vector(record.vector)) {
      reject(pos, key, *problem);
      return;
    }
    if (record.text.empty()) {
      reject(pos, key, "missing required field text");
      return;
    }
    if (texts_.contains(record.text)) {
      report_.rejected.push_back({pos, key, "duplicate key"});
      return;
    }
    texts_.emplace(std::move(record.text), std::move(record.vector));
  }

  [[nodiscard]] const IngestReport& report() const noexcept { return report_; }

  Corpus finish() && {
    Corpus c;
    c.dim_ = dim_;
    auto adapter_map = sorted_names(adapter_names_, c.adapters_);
    auto prompt_map = sorted_names(prompt_names_, c.prompts_);
    for (auto& p : pending_) {
      if (p.adapter != Corpus::kBase) p.adapter = adapter_map[p.adapter];
      p.prompt = prompt_map[p.prompt];
    }
    std::vector<std::size_t> order(pending_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      const auto& a = pending_[l];
      const auto& b = pending_[r];
      return std::tie(a.adapter, a.prompt, a.seed, a.position) < std::tie(b.adapter, b.prompt, b.seed, b.position);
    });
    c.entries_.reserve(order.size());
    c.data_.reserve(order.size() * dim_);
    for (std::size_t i : order) {
      const auto& p = pending_[i];
      Corpus::Entry e{p.adapter, p.prompt, p.seed};
      if (!c.entries_.empty() && c.entries_.back() == e) {
        report_.rejected.push_back(
            {p.position,
             format_key(p.adapter == Corpus::kBase ? std::nullopt : std::optional(c.adapters_[p.adapter]),
                        c.prompts_[p.prompt], p.seed),
             "duplicate key"});
        continue;
      }
      c.entries_.push_back(e);
      auto src = data_.begin() + static_cast<std::ptrdiff_t>(i * dim_);
      c.data_.insert(c.data_.end(), src, src + static_cast<std::ptrdiff_t>(dim_));
    }
    std::sort(report_.rejected.begin(), report_.rejected.end(),
              [](const IngestIssue& a, const IngestIssue& b) { return a.position < b.position; });
    c.texts_ = std::move(texts_);
    report_.accepted = c.entries_.size() + c.texts_.size();
    return c;
  }

 private:
  struct Pending {
    std::uint32_t adapter;
    std::uint32_t prompt;
    std::uint64_t seed;
    std::size_t position;
  };

  std::optional<std::string> check_vector(const EmbeddingVector& v) const {
    if (v.size() != dim_) {
      return "dimension mismatch: expected " + std::to_string(dim_) + ", got " + std::to_string(v.size());
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) return "non-finite component at index " + std::to_string(i);
    }
    return std::nullopt;
  }

  void reject(std::size_t pos, const std::string& key, const std::string& reason) {
    if (strict_) {
      throw data_error("record " + key + (pos ? " at position " + std::to_string(pos) : "") + ": " + reason);
    }
    report_.rejected.push_back({pos, key, reason});
  }

  static std::uint32_t intern(std::unordered_map<std::string, std::uint32_t>& ids, std::vector<std::string>& names,
                              const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<std::uint32_t>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  }

  // Sorts names into `sorted` and returns old index -> new index.
  static std::vector<std::uint32_t> sorted_names(const std::vector<std::string>& names,
                                                 std::vector<std::string>& sorted) {
    std::vector<std::uint32_t> order(names.size());
    std::iota(order.begin(), order.end(), 0U);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return names[a] < names[b]; });
    std::vector<std::uint32_t> remap(names.size());
    sorted.clear();
    sorted.reserve(names.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      remap[order[rank]] = rank;
      sorted.push_back(names[order[rank]]);
    }
    return remap;
  }

  std::size_t dim_;
  bool strict_;
  std::size_t position_ = 0;
  std::unordered_map<std::string, std::uint32_t> adapter_ids_;
  std::unordered_map<std::string, std::uint32_t> prompt_ids_;
  std::vector<std::string> adapter_names_;
  std::vector<std::string> prompt_names_;
  std::vector<Pending> pending_;
  std::vector<float> data_;
  std::map<std::string, EmbeddingVector> texts_;
  IngestReport report_;
};

}  // namespace loradex

#endif  // LORADEX_CORPUS_HPP
