#ifndef LORADEX_PROVIDER_HPP
#define LORADEX_PROVIDER_HPP

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loradex/corpus.hpp"
#include "loradex/error.hpp"
#include "loradex/index.hpp"
#include "loradex/record_io.hpp"

namespace loradex {

struct Capabilities {
  bool text = false;
  bool image = false;

  friend bool operator==(const Capabilities&, const Capabilities&) = default;
};

struct ProbeResult {
  std::string encoder_tag;
  std::size_t dim = 0;
  Capabilities capabilities;
};

struct TextEmbeddings {
  std::vector<EmbeddingVector> vectors;
  std::vector<bool> truncated;  ///< encoder cut the text at its token limit
};

/// Failure tied to one input of a batch.
class EmbedItemError : public Error {
 public:
  EmbedItemError(ErrorKind kind, std::size_t index, const std::string& message)
      : Error(kind, message), index_(index) {}
  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Source of text embeddings u(.) and image embeddings v(.).
///
/// Output i always corresponds to input i, vectors have length probe().dim,
/// and one instance returns identical vectors for identical inputs.
/// Implementations must tolerate concurrent calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  [[nodiscard]] virtual ProbeResult probe() const = 0;
  [[nodiscard]] virtual TextEmbeddings embed_texts_detailed(std::span<const std::string> texts) const = 0;
  [[nodiscard]] virtual std::vector<EmbeddingVector> embed_images(std::span<const std::string> blobs) const = 0;

  [[nodiscard]] std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts) const {
    return embed_texts_detailed(texts).vectors;
  }
};

/// Throws unless the provider speaks the index's encoder tag and dim.
inline void check_compatible(const ProbeResult& probe, const CorpusIndex& index) {
  if (probe.dim != index.dim) {
    throw data_error("encoder mismatch: provider dim " + std::to_string(probe.dim) + ", index dim " +
                     std::to_string(index.dim));
  }
  if (probe.encoder_tag != index.encoder_tag) {
    throw data_error("encoder mismatch: provider tag '" + probe.encoder_tag + "', index tag '" + index.encoder_tag +
                     "'");
  }
}

inline void require_nonempty_texts(std::span<const std::string> texts) {
  if (texts.empty()) throw usage_error("embed_texts needs at least one text");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw EmbedItemError(ErrorKind::usage, i, "empty text at index " + std::to_string(i));
  }
}

/// Serves precomputed text embeddings keyed by exact text bytes.
class FileProvider final : public EmbeddingProvider {
 public:
  FileProvider(std::map<std::string, EmbeddingVector> cache, std::size_t dim,
               std::string encoder_tag = kDefaultEncoderTag)
      : cache_(std::move(cache)), dim_(dim), encoder_tag_(std::move(encoder_tag)) {
    for (const auto& [text, v] : cache_) {
      if (v.size() != dim_) throw data_error("cached embedding for \"" + text + "\" has wrong dimension");
    }
  }

  /// Loads the text records of a record file (image records are ignored).
  static FileProvider from_file(const std::filesystem::path& path, std::size_t dim,
                                std::string encoder_tag = kDefaultEncoderTag) {
    auto loaded = load_records(path, dim);
    return FileProvider(loaded.corpus.texts(), dim, std::move(encoder_tag));
  }

  [[nodiscard]] ProbeResult probe() const override { return {encoder_tag_, dim_, {!cache_.empty(), false}}; }

  [[nodiscard]] TextEmbeddings embed_texts_detailed(std::span<const std::string> texts) const override {
    require_nonempty_texts(texts);
    TextEmbeddings out;
    out.vectors.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto it = cache_.find(texts[i]);
      if (it == cache_.end()) {
        throw EmbedItemError(ErrorKind::provider, i, "embedding cache miss for text \"" + texts[i] + "\"");
      }
      out.vectors.push_back(it->second);
    }
    out.truncated.assign(texts.size(), false);
    return out;
  }

  [[nodiscard]] std::vector<EmbeddingVector> embed_images(std::span<const std::string>) const override {
    throw Error(ErrorKind::capability, "file-backed provider has no image capability");
  }

  [[nodiscard]] std::size_t size() const noexcept { return cache_.size(); }

 private:
  std::map<std::string, EmbeddingVector> cache_;
  std::size_t dim_;
  std::string encoder_tag_;
};

}  // namespace loradex

#endif  // LORADEX_PROVIDER_HPP
