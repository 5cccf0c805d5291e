#ifndef LORADEX_SERVICE_HPP
#define LORADEX_SERVICE_HPP

#include <chrono>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "loradex/analytics/screening.hpp"
#include "loradex/error.hpp"
#include "loradex/index.hpp"
#include "loradex/json_codec.hpp"
#include "loradex/prompts.hpp"
#include "loradex/provider.hpp"
#include "loradex/query.hpp"

namespace loradex {

struct ServiceConfig {
  std::string index_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string provider;  ///< http(s) URL of the sidecar, or path to a text-record cache
  std::string prompts_path;
  FilterConfig defaults;
  QueryVariant default_variant = QueryVariant::suffix;
  std::string separator = kDefaultSeparator;
  std::vector<std::string> cors_allowlist;
  std::size_t query_cache_size = 1024;
  std::size_t page_limit = 100;
  double strength_split = 0.5;
  double consistency_split = 0.5;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

/// Thread-safe LRU of query vectors keyed by (text, variant, prompt set id).
class QueryVectorCache {
 public:
  explicit QueryVectorCache(std::size_t capacity) : capacity_(capacity) {}

  std::optional<QueryVector> get(const std::string& key) {
    std::lock_guard lock(mutex_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  void put(const std::string& key, QueryVector value) {
    if (capacity_ == 0) return;
    std::lock_guard lock(mutex_);
    if (auto it = map_.find(key); it != map_.end()) {
      it->second->second = std::move(value);
      order_.splice(order_.begin(), order_, it->second);
      return;
    }
    order_.emplace_front(key, std::move(value));
    map_[key] = order_.begin();
    if (order_.size() > capacity_) {
      map_.erase(order_.back().first);
      order_.pop_back();
    }
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return order_.size();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<std::pair<std::string, QueryVector>> order_;
  std::unordered_map<std::string, std::list<std::pair<std::string, QueryVector>>::iterator> map_;
};

inline int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage:
      return 400;
    case ErrorKind::zero_query:
      return 422;
    case ErrorKind::provider:
    case ErrorKind::capability:
      return 502;
    case ErrorKind::not_found:
      return 404;
    case ErrorKind::data:
      return 500;
  }
  return 500;
}

/// Read-only retrieval service over one immutable index. Handlers are plain
/// functions of the request and can be called without a socket.
class Service {
 public:
  Service(CorpusIndex index, std::shared_ptr<const EmbeddingProvider> provider, PromptSet prompts,
          ServiceConfig config)
      : index_(std::move(index)),
        provider_(std::move(provider)),
        prompts_(std::move(prompts)),
        config_(std::move(config)),
        cache_(config_.query_cache_size) {
    config_.defaults.validate();
    validate(index_);
    if (index_.id.empty()) index_.id = index_id(index_);
    screening_ = screening_report(index_, config_.strength_split, config_.consistency_split, config_.defaults);
  }

  [[nodiscard]] const CorpusIndex& index() const noexcept { return index_; }
  [[nodiscard]] std::size_t cached_queries() const { return cache_.size(); }

  /// POST /v1/query {text, top_k?, tau_s?, tau_c?, variant?, include_failed?}
  HttpResponse query(const std::string& body) const {
    const auto start = std::chrono::steady_clock::now();
    return guarded([&] {
      nlohmann::json req;
      try {
        req = nlohmann::json::parse(body);
      } catch (const nlohmann::json::parse_error&) {
        throw usage_error("request body is not valid JSON");
      }
      if (!req.is_object()) throw usage_error("request body must be a JSON object");
      auto text = req.find("text");
      if (text == req.end() || !text->is_string() || text->get<std::string>().empty()) {
        throw usage_error("field text must be a non-empty string");
      }
      FilterConfig cfg = config_.defaults;
      if (auto it = req.find("top_k"); it != req.end()) {
        if (!it->is_number_unsigned() || it->get<std::size_t>() < 1) throw usage_error("top_k must be a positive integer");
        cfg.top_k = it->get<std::size_t>();
      }
      if (auto it = req.find("tau_s"); it != req.end()) cfg.tau_s = number_field(*it, "tau_s");
      if (auto it = req.find("tau_c"); it != req.end()) cfg.tau_c = number_field(*it, "tau_c");
      if (auto it = req.find("include_failed"); it != req.end()) {
        if (!it->is_boolean()) throw usage_error("include_failed must be a boolean");
        cfg.include_failed = it->get<bool>();
      }
      QueryVariant variant = config_.default_variant;
      if (auto it = req.find("variant"); it != req.end()) {
        if (!it->is_string()) throw usage_error("variant must be a string");
        variant = parse_variant(it->get<std::string>());
      }
      cfg.validate();
      const auto qv = query_vector(text->get<std::string>(), variant);
      auto doc = json::to_json(retrieve(index_, qv, cfg));
      const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
      doc["timing_ms"] = elapsed.count();
      return HttpResponse{200, doc.dump()};
    });
  }

  /// GET /v1/adapters?offset=&limit=
  HttpResponse adapters(std::size_t offset, std::optional<std::size_t> limit) const {
    return guarded([&] {
      const std::size_t lim = std::min(limit.value_or(config_.page_limit), config_.page_limit);
      json::Json items = json::Json::array();
      std::size_t i = 0;
      for (const auto& [id, sig] : index_.signatures) {
        if (i >= offset && items.size() < lim) items.push_back(json::to_json(sig, false));
        ++i;
      }
      json::Json doc{{"total", index_.signatures.size()}, {"offset", offset}, {"limit", lim}, {"items", items}};
      return HttpResponse{200, doc.dump()};
    });
  }

  /// GET /v1/adapters/{id}
  HttpResponse adapter(const std::string& id) const {
    return guarded([&] { return HttpResponse{200, json::to_json(index_.at(id)).dump()}; });
  }

  /// GET /v1/scatter: per-adapter percentile ranks and flags for plotting.
  HttpResponse scatter() const {
    return guarded([&] {
      json::Json points = json::Json::array();
      for (const auto& e : screening_.entries) {
        points.push_back({{"adapter_id", e.adapter_id},
                          {"strength_rank", e.strength_rank},
                          {"consistency_rank", e.consistency_rank},
                          {"strength", e.strength},
                          {"consistency", e.consistency},
                          {"flag", e.flag},
                          {"passes_filter", e.passes_filter.value_or(false)}});
      }
      json::Json doc{{"index_id", index_.id},
                     {"tau_s", json::number_or_null(config_.defaults.tau_s)},
                     {"tau_c", json::number_or_null(config_.defaults.tau_c)},
                     {"points", points}};
      return HttpResponse{200, doc.dump()};
    });
  }

  /// GET /v1/screening
  HttpResponse screening() const {
    return guarded([&] {
      auto doc = json::to_json(screening_);
      doc["index_id"] = index_.id;
      return HttpResponse{200, doc.dump()};
    });
  }

  /// GET /v1/health
  HttpResponse health() const {
    json::Json doc{{"status", "ok"},
                   {"index_id", index_.id},
                   {"encoder_tag", index_.encoder_tag},
                   {"dim", index_.dim},
                   {"adapters", index_.signatures.size()},
                   {"created_at", index_.created_at},
                   {"manifest", json::to_json(index_.manifest)},
                   {"prompt_set_id", prompts_.id},
                   {"defaults", json::to_json(config_.defaults)}};
    return {200, doc.dump()};
  }

  /// Registers the endpoints on an httplib server.
  void mount(httplib::Server& server) const {
    auto reply = [this](const httplib::Request& req, httplib::Response& res, const HttpResponse& out) {
      res.status = out.status;
      res.set_content(out.body, "application/json");
      apply_cors(req, res);
    };
    server.Post("/v1/query", [=, this](const httplib::Request& req, httplib::Response& res) { reply(req, res, query(req.body)); });
    server.Get("/v1/adapters", [=, this](const httplib::Request& req, httplib::Response& res) {
      auto param = [&](const char* name) -> std::optional<std::size_t> {
        if (!req.has_param(name)) return std::nullopt;
        try {
          return static_cast<std::size_t>(std::stoull(req.get_param_value(name)));
        } catch (const std::exception&) {
          return std::nullopt;
        }
      };
      reply(req, res, adapters(param("offset").value_or(0), param("limit")));
    });
    server.Get(R"(/v1/adapters/(.+))", [=, this](const httplib::Request& req, httplib::Response& res) {
      reply(req, res, adapter(req.matches[1]));
    });
    server.Get("/v1/scatter", [=, this](const httplib::Request& req, httplib::Response& res) { reply(req, res, scatter()); });
    server.Get("/v1/screening",
               [=, this](const httplib::Request& req, httplib::Response& res) { reply(req, res, screening()); });
    server.Get("/v1/health", [=, this](const httplib::Request& req, httplib::Response& res) { reply(req, res, health()); });
    server.Options(R"(/v1/.*)", [=, this](const httplib::Request& req, httplib::Response& res) {
      res.status = 204;
      apply_cors(req, res);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
  }

 private:
  template <class F>
  HttpResponse guarded(F&& f) const {
    try {
      return f();
    } catch (const Error& e) {
      return error_response(http_status(e.kind()), e.what());
    } catch (const std::exception& e) {
      return error_response(500, e.what());
    }
  }

  static HttpResponse error_response(int status, const std::string& message) {
    json::Json doc{{"status", status}, {"error", message}};
    return {status, doc.dump()};
  }

  static double number_field(const nlohmann::json& j, const char* name) {
    if (!j.is_number()) throw usage_error(std::string(name) + " must be a number");
    return j.get<double>();
  }

  QueryVector query_vector(const std::string& text, QueryVariant variant) const {
    const std::string set_id = variant == QueryVariant::query_only ? std::string() : prompts_.id;
    std::string key = text;
    key += '\0';
    key += to_string(variant);
    key += '\0';
    key += set_id;
    if (auto hit = cache_.get(key)) return *hit;
    auto qv = build_query_vector(text, prompts_, *provider_, variant, config_.separator);
    cache_.put(key, qv);
    return qv;
  }

  void apply_cors(const httplib::Request& req, httplib::Response& res) const {
    if (!req.has_header("Origin")) return;
    const auto origin = req.get_header_value("Origin");
    for (const auto& allowed : config_.cors_allowlist) {
      if (allowed == "*" || allowed == origin) {
        res.set_header("Access-Control-Allow-Origin", allowed == "*" ? "*" : origin);
        return;
      }
    }
  }

  CorpusIndex index_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  PromptSet prompts_;
  ServiceConfig config_;
  ScreeningReport screening_;
  mutable QueryVectorCache cache_;
};

}  // namespace loradex

#endif  // LORADEX_SERVICE_HPP
