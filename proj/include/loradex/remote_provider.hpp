#ifndef LORADEX_REMOTE_PROVIDER_HPP
#define LORADEX_REMOTE_PROVIDER_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "loradex/provider.hpp"

namespace loradex {

inline std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto n = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                   static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (i + 1 == bytes.size()) {
    const auto n = static_cast<unsigned char>(bytes[i]) << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const auto n = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

struct RemoteProviderConfig {
  std::string endpoint;  ///< e.g. "http://127.0.0.1:8001"
  std::size_t max_batch = 64;
  std::size_t max_in_flight = 4;
  int timeout_seconds = 60;
};

/// Client for the embedding sidecar:
///   GET  /v1/info        -> {encoder_tag, dim, capabilities, token_limit}
///   POST /v1/embed_text  {texts: [...]}  -> {vectors, dim, encoder_tag, truncated}
///   POST /v1/embed_image {images: [base64...]} -> same shape
class RemoteProvider final : public EmbeddingProvider {
 public:
  explicit RemoteProvider(RemoteProviderConfig config) : config_(std::move(config)) {
    if (config_.max_batch == 0 || config_.max_in_flight == 0) {
      throw usage_error("remote provider batch size and in-flight bound must be positive");
    }
  }

  [[nodiscard]] ProbeResult probe() const override {
    auto client = make_client();
    auto res = client.Get("/v1/info");
    check_response(res, "/v1/info");
    try {
      const auto j = nlohmann::json::parse(res->body);
      ProbeResult p;
      p.encoder_tag = j.at("encoder_tag").get<std::string>();
      p.dim = j.at("dim").get<std::size_t>();
      for (const auto& cap : j.value("capabilities", nlohmann::json::array())) {
        if (cap == "text") p.capabilities.text = true;
        if (cap == "image") p.capabilities.image = true;
      }
      return p;
    } catch (const nlohmann::json::exception& e) {
      throw provider_error(std::string("malformed /v1/info response: ") + e.what());
    }
  }

  [[nodiscard]] TextEmbeddings embed_texts_detailed(std::span<const std::string> texts) const override {
    require_nonempty_texts(texts);
    std::vector<std::string> items(texts.begin(), texts.end());
    return embed_batched("/v1/embed_text", "texts", items);
  }

  [[nodiscard]] std::vector<EmbeddingVector> embed_images(std::span<const std::string> blobs) const override {
    if (blobs.empty()) throw usage_error("embed_images needs at least one image");
    std::vector<std::string> encoded;
    encoded.reserve(blobs.size());
    for (const auto& b : blobs) encoded.push_back(base64_encode(b));
    return embed_batched("/v1/embed_image", "images", encoded).vectors;
  }

 private:
  httplib::Client make_client() const {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    return client;
  }

  void check_response(const httplib::Result& res, const std::string& path) const {
    if (!res) {
      throw provider_error("embedding provider " + config_.endpoint + path +
                           " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status == 422 || res->status == 413 || res->status == 400) {
      throw provider_error("embedding provider rejected request (" + std::to_string(res->status) + "): " + res->body);
    }
    if (res->status != 200) {
      throw provider_error("embedding provider " + path + " returned HTTP " + std::to_string(res->status));
    }
  }

  TextEmbeddings embed_chunk(const std::string& path, const char* field, std::span<const std::string> items,
                             std::size_t offset) const {
    auto client = make_client();
    nlohmann::json body;
    body[field] = items;
    auto res = client.Post(path, body.dump(), "application/json");
    check_response(res, path);
    TextEmbeddings out;
    try {
      const auto j = nlohmann::json::parse(res->body);
      const auto& vectors = j.at("vectors");
      if (vectors.size() != items.size()) {
        throw provider_error("embedding provider returned " + std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(items.size()) + " inputs");
      }
      const auto dim = j.at("dim").get<std::size_t>();
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        auto v = detail::parse_vector(vectors[i]);
        if (v.size() != dim || !all_finite(std::span<const float>(v))) {
          throw EmbedItemError(ErrorKind::provider, offset + i,
                               "embedding provider returned an invalid vector for input " +
                                   std::to_string(offset + i));
        }
        out.vectors.push_back(std::move(v));
      }
      const auto trunc = j.value("truncated", nlohmann::json::array());
      out.truncated.assign(items.size(), false);
      for (std::size_t i = 0; i < trunc.size() && i < items.size(); ++i) out.truncated[i] = trunc[i].get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw provider_error(std::string("malformed embedding response: ") + e.what());
    }
    return out;
  }

  // Splits into chunks of max_batch and keeps at most max_in_flight requests
  // outstanding. Chunk results are written to fixed slots, so order holds.
  TextEmbeddings embed_batched(const std::string& path, const char* field, const std::vector<std::string>& items) const {
    const std::size_t chunks = (items.size() + config_.max_batch - 1) / config_.max_batch;
    std::vector<TextEmbeddings> results(chunks);
    std::vector<std::exception_ptr> errors(chunks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        const std::size_t begin = c * config_.max_batch;
        const std::size_t count = std::min(config_.max_batch, items.size() - begin);
        try {
          results[c] = embed_chunk(path, field, std::span<const std::string>(items).subspan(begin, count), begin);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      const std::size_t threads = std::min(config_.max_in_flight, chunks);
      for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
      worker();
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    TextEmbeddings out;
    for (auto& r : results) {
      for (auto& v : r.vectors) out.vectors.push_back(std::move(v));
      out.truncated.insert(out.truncated.end(), r.truncated.begin(), r.truncated.end());
    }
    return out;
  }

  RemoteProviderConfig config_;
};

}  // namespace loradex

#endif  // LORADEX_REMOTE_PROVIDER_HPP
