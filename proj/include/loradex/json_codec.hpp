#ifndef LORADEX_JSON_CODEC_HPP
#define LORADEX_JSON_CODEC_HPP

#include <cmath>
#include <string>

#include <json.hpp>

#include "loradex/analytics/diversity.hpp"
#include "loradex/analytics/screening.hpp"
#include "loradex/error.hpp"
#include "loradex/index.hpp"
#include "loradex/query.hpp"

// Stable-field-name JSON documents for results and reports. Field order is
// fixed (ordered_json) so that identical inputs serialize byte-identically.

namespace loradex::json {

using Json = nlohmann::ordered_json;

inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const FilterConfig& c) {
  return {{"tau_s", number_or_null(c.tau_s)}, {"tau_c", number_or_null(c.tau_c)}, {"top_k", c.top_k},
          {"include_failed", c.include_failed}};
}

inline Json to_json(const QueryProvenance& p) {
  return {{"query_text", p.query_text},   {"variant", p.variant},         {"prompt_set_id", p.prompt_set_id},
          {"encoder_tag", p.encoder_tag}, {"index_id", p.index_id},       {"corpus_size", p.corpus_size}};
}

inline Json to_json(const RetrievalResult& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"adapter_id", e.adapter_id},
                       {"score", number_or_null(e.score)},
                       {"strength", e.strength},
                       {"consistency", e.consistency},
                       {"passed", e.passed},
                       {"reason", e.reason}});
  }
  return {{"entries", std::move(entries)},
          {"config", to_json(r.config)},
          {"provenance", to_json(r.provenance)},
          {"warnings", r.warnings}};
}

namespace detail {
inline double number_or(const nlohmann::json& j, double fallback) {
  return j.is_number() ? j.get<double>() : fallback;
}
}  // namespace detail

inline RetrievalResult retrieval_result_from_json(const nlohmann::json& j) {
  try {
    RetrievalResult r;
    for (const auto& e : j.at("entries")) {
      r.entries.push_back({e.at("adapter_id").get<std::string>(),
                           detail::number_or(e.at("score"), -std::numeric_limits<double>::infinity()),
                           e.at("strength").get<double>(), e.at("consistency").get<double>(),
                           e.at("passed").get<bool>(), e.value("reason", std::string())});
    }
    const auto& c = j.at("config");
    r.config.tau_s = detail::number_or(c.at("tau_s"), std::numeric_limits<double>::infinity());
    r.config.tau_c = detail::number_or(c.at("tau_c"), -std::numeric_limits<double>::infinity());
    r.config.top_k = c.at("top_k").get<std::size_t>();
    r.config.include_failed = c.value("include_failed", false);
    const auto& p = j.at("provenance");
    r.provenance.query_text = p.at("query_text").get<std::string>();
    r.provenance.variant = p.at("variant").get<std::string>();
    r.provenance.prompt_set_id = p.at("prompt_set_id").get<std::string>();
    r.provenance.encoder_tag = p.at("encoder_tag").get<std::string>();
    r.provenance.index_id = p.at("index_id").get<std::string>();
    r.provenance.corpus_size = p.at("corpus_size").get<std::size_t>();
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed retrieval result: ") + e.what());
  }
}

inline Json to_json(const LoraSignature& s, bool with_direction = true) {
  Json j{{"adapter_id", s.adapter_id}, {"strength", s.strength},   {"consistency", s.consistency},
         {"sample_count", s.sample_count}, {"dim", s.dim}, {"encoder_tag", s.encoder_tag}};
  if (with_direction) j["direction"] = s.direction;
  return j;
}

inline Json to_json(const CorpusManifest& m) {
  return {{"adapters", m.adapters},
          {"prompts", m.prompts},
          {"seeds", m.seeds},
          {"records", m.records},
          {"text_records", m.text_records}};
}

inline Json to_json(const ScreeningReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json j{{"adapter_id", e.adapter_id},
           {"strength", e.strength},
           {"consistency", e.consistency},
           {"strength_rank", e.strength_rank},
           {"consistency_rank", e.consistency_rank},
           {"quadrant", to_string(e.quadrant)},
           {"flag", e.flag}};
    if (e.passes_filter) j["passes_filter"] = *e.passes_filter;
    entries.push_back(std::move(j));
  }
  Json j{{"disclaimer", r.disclaimer},
         {"strength_split", r.strength_split},
         {"consistency_split", r.consistency_split}};
  if (r.tau_s) j["tau_s"] = number_or_null(*r.tau_s);
  if (r.tau_c) j["tau_c"] = number_or_null(*r.tau_c);
  j["entries"] = std::move(entries);
  return j;
}

inline Json to_json(const DiversityMetrics& m) {
  return {{"normalized_entropy", m.normalized_entropy}, {"gini", m.gini}, {"effective_count", m.effective_count}};
}

}  // namespace loradex::json

#endif  // LORADEX_JSON_CODEC_HPP
