#ifndef LORADEX_SYNTHETIC_HPP
#define LORADEX_SYNTHETIC_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "loradex/checksum.hpp"
#include "loradex/corpus.hpp"
#include "loradex/prompts.hpp"
#include "loradex/provider.hpp"
#include "loradex/query.hpp"

// Deterministic stand-ins for the encoder and the generation pipeline, used
// for demos, tests and benchmarks.

namespace loradex::synthetic {

/// Uniform in [-1, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

/// Pseudo-random vector determined by a string.
inline Vector hashed_vector(std::string_view text, std::size_t dim, double scale = 1.0) {
  std::mt19937_64 rng(fnv1a64(text));
  Vector v(dim);
  for (auto& x : v) x = scale * unit_uniform(rng);
  return v;
}

/// Text encoder whose output depends only on the text bytes.
///
/// In `additive` mode the text is split on the separator and the embedding
/// is the sum of per-segment vectors, so u(p + sep + q) - u(p) = u(q): a
/// query then maps onto a known direction. Otherwise the whole text seeds
/// one vector.
class HashTextEncoder final : public EmbeddingProvider {
 public:
  explicit HashTextEncoder(std::size_t dim, bool additive = true, std::string separator = kDefaultSeparator,
                           std::string encoder_tag = kDefaultEncoderTag)
      : dim_(dim), additive_(additive), separator_(std::move(separator)), encoder_tag_(std::move(encoder_tag)) {}

  [[nodiscard]] ProbeResult probe() const override { return {encoder_tag_, dim_, {true, false}}; }

  [[nodiscard]] TextEmbeddings embed_texts_detailed(std::span<const std::string> texts) const override {
    require_nonempty_texts(texts);
    TextEmbeddings out;
    for (const auto& t : texts) out.vectors.push_back(embed(t));
    out.truncated.assign(texts.size(), false);
    return out;
  }

  [[nodiscard]] std::vector<EmbeddingVector> embed_images(std::span<const std::string>) const override {
    throw Error(ErrorKind::capability, "hash text encoder has no image capability");
  }

  [[nodiscard]] EmbeddingVector embed(const std::string& text) const {
    Vector acc(dim_, 0.0);
    if (!additive_) {
      acc = hashed_vector(text, dim_);
    } else {
      std::size_t start = 0;
      while (true) {
        const auto pos = text.find(separator_, start);
        const auto seg = std::string_view(text).substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        const auto v = hashed_vector(seg, dim_);
        for (std::size_t j = 0; j < dim_; ++j) acc[j] += v[j];
        if (pos == std::string::npos) break;
        start = pos + separator_.size();
      }
    }
    return EmbeddingVector(acc.begin(), acc.end());
  }

 private:
  std::size_t dim_;
  bool additive_;
  std::string separator_;
  std::string encoder_tag_;
};

struct SynthConfig {
  std::size_t dim = 64;
  std::size_t adapters = 20;
  std::size_t prompts = 8;
  std::size_t seeds = 4;
  std::uint64_t first_seed = 42;
  double effect_magnitude = 3.0;  ///< length of each adapter's planted mean shift
  double noise = 0.5;             ///< per-component noise on top of the shift
  std::uint64_t rng_seed = 42;
  std::vector<std::string> queries;  ///< each gets an adapter planted along its direction
};

struct SynthOutput {
  std::vector<Record> records;
  PromptSet indexing;
  PromptSet retrieval;
};

inline std::string slug(const std::string& text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

inline PromptSet make_prompt_set(std::size_t count, PromptRole role) {
  static const char* subjects[] = {"a lighthouse", "a red fox", "an old library", "a mountain lake",
                                   "a city street", "a bowl of fruit", "a sailing ship", "a desert canyon"};
  static const char* settings[] = {"at dawn", "in the rain", "under neon light", "in winter", "at noon"};
  PromptSet set;
  set.role = role;
  const char* tag = role == PromptRole::indexing ? "idx" : "ret";
  for (std::size_t i = 0; i < count; ++i) {
    Prompt p;
    p.category = i % 2 == 0 ? "scenes" : "objects";
    p.subcategory = tag;
    p.id = p.category + "/" + p.subcategory + "/" + std::to_string(i + 1);
    p.text = std::string(subjects[i % 8]) + " " + settings[(i / 8) % 5] + " (" + tag + " " + std::to_string(i + 1) + ")";
    set.prompts.push_back(std::move(p));
  }
  assign_id(set);
  return set;
}

/// Builds BASE and adapter image records plus the text records a
/// file-backed provider needs to answer `queries` in every variant.
inline SynthOutput generate(const SynthConfig& cfg, const HashTextEncoder& encoder) {
  SynthOutput out;
  out.indexing = make_prompt_set(cfg.prompts, PromptRole::indexing);
  out.retrieval = make_prompt_set(cfg.prompts, PromptRole::retrieval);
  std::mt19937_64 rng(cfg.rng_seed);

  std::vector<std::pair<std::string, Vector>> adapters;
  for (std::size_t a = 0; a < cfg.adapters; ++a) {
    Vector d(cfg.dim);
    for (auto& x : d) x = unit_uniform(rng);
    adapters.emplace_back("adapter-" + std::to_string(a + 1000).substr(1), std::move(d));
  }
  for (const auto& q : cfg.queries) {
    const auto e = encoder.embed(q);
    adapters.emplace_back("planted-" + slug(q), Vector(e.begin(), e.end()));
  }
  for (auto& [id, d] : adapters) {
    const double len = norm(d);
    for (auto& x : d) x *= cfg.effect_magnitude / len;
  }

  for (const auto& p : out.indexing.prompts) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      const std::uint64_t seed = cfg.first_seed + s;
      const auto base = hashed_vector(p.id + "#" + std::to_string(seed), cfg.dim, 2.0);
      out.records.push_back(GenerationRecord{std::nullopt, p.id, seed, EmbeddingVector(base.begin(), base.end())});
      for (const auto& [id, d] : adapters) {
        EmbeddingVector v(cfg.dim);
        for (std::size_t j = 0; j < cfg.dim; ++j) v[j] = static_cast<float>(base[j] + d[j] + cfg.noise * unit_uniform(rng));
        out.records.push_back(GenerationRecord{id, p.id, seed, std::move(v)});
      }
    }
  }

  std::set<std::string> texts;
  for (const auto& p : out.retrieval.prompts) {
    texts.insert(p.text);
    for (const auto& q : cfg.queries) {
      for (auto v : {QueryVariant::suffix, QueryVariant::prefix, QueryVariant::prefix_and_suffix}) {
        texts.insert(compose_prompt(p.text, q, v, kDefaultSeparator));
      }
    }
  }
  for (const auto& q : cfg.queries) texts.insert(q);
  for (const auto& t : texts) out.records.push_back(TextRecord{t, encoder.embed(t)});
  return out;
}

inline void write_prompt_set(std::ostream& out, const PromptSet& set) {
  out << "prompt_id\tcategory\tsubcategory\ttext\trole\n";
  for (const auto& p : set.prompts) {
    out << p.id << '\t' << p.category << '\t' << p.subcategory << '\t' << p.text << '\t' << to_string(set.role)
        << '\n';
  }
}

}  // namespace loradex::synthetic

#endif  // LORADEX_SYNTHETIC_HPP
