#ifndef LORADEX_INDEX_HPP
#define LORADEX_INDEX_HPP

#include <bit>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "loradex/checksum.hpp"
#include "loradex/corpus.hpp"
#include "loradex/error.hpp"
#include "loradex/vector_math.hpp"

namespace loradex {

/// Three-part characterization of one adapter's measured effect.
struct LoraSignature {
  std::string adapter_id;
  Vector direction;          ///< mean diff, not re-normalized
  double strength = 0.0;     ///< mean diff norm
  double consistency = 0.0;  ///< mean pairwise cosine of diffs
  std::size_t sample_count = 0;
  std::size_t dim = 0;
  std::string encoder_tag;

  friend bool operator==(const LoraSignature& a, const LoraSignature& b) {
    auto same = [](double x, double y) { return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y); };
    return a.adapter_id == b.adapter_id && a.direction.size() == b.direction.size() &&
           std::equal(a.direction.begin(), a.direction.end(), b.direction.begin(), same) &&
           same(a.strength, b.strength) && same(a.consistency, b.consistency) && a.sample_count == b.sample_count &&
           a.dim == b.dim && a.encoder_tag == b.encoder_tag;
  }
};

/// Immutable collection of signatures built from one corpus and encoder.
struct CorpusIndex {
  std::map<std::string, LoraSignature> signatures;
  std::size_t dim = kDefaultDim;
  std::string encoder_tag = kDefaultEncoderTag;
  std::string created_at;
  double strength_scale = 1.0;  ///< LoRA scale the embeddings were generated at
  CorpusManifest manifest;
  std::string id;  ///< content id, see index_id(); empty until computed

  /// Compares content; the cached id is derived and not compared.
  friend bool operator==(const CorpusIndex& a, const CorpusIndex& b) {
    return a.signatures == b.signatures && a.dim == b.dim && a.encoder_tag == b.encoder_tag &&
           a.created_at == b.created_at && std::bit_cast<std::uint64_t>(a.strength_scale) ==
                                               std::bit_cast<std::uint64_t>(b.strength_scale) &&
           a.manifest == b.manifest;
  }

  [[nodiscard]] const LoraSignature& at(const std::string& id) const {
    auto it = signatures.find(id);
    if (it == signatures.end()) throw Error(ErrorKind::not_found, "unknown adapter id '" + id + "'");
    return it->second;
  }
};

inline constexpr const char* kIndexMagic = "LORADEX-INDEX";
inline constexpr int kIndexVersion = 1;

/// Throws unless every signature agrees with the index dim and encoder tag
/// and satisfies the metric bounds.
inline void validate(const CorpusIndex& index) {
  for (const auto& [id, sig] : index.signatures) {
    if (id != sig.adapter_id) throw data_error("index key '" + id + "' does not match signature id");
    if (sig.dim != index.dim || sig.direction.size() != index.dim) {
      throw data_error("signature '" + id + "' has dim " + std::to_string(sig.direction.size()) +
                       ", index dim is " + std::to_string(index.dim));
    }
    if (sig.encoder_tag != index.encoder_tag) {
      throw data_error("signature '" + id + "' has encoder_tag '" + sig.encoder_tag + "', index has '" +
                       index.encoder_tag + "'");
    }
    if (!all_finite(std::span<const double>(sig.direction)) || !std::isfinite(sig.strength) ||
        !std::isfinite(sig.consistency)) {
      throw data_error("signature '" + id + "' has non-finite values");
    }
    if (sig.strength < 0.0 || sig.consistency < -1.0 || sig.consistency > 1.0) {
      throw data_error("signature '" + id + "' has out-of-range strength or consistency");
    }
  }
}

namespace detail {

inline nlohmann::ordered_json manifest_json(const CorpusManifest& m) {
  return {{"adapters", m.adapters},
          {"prompts", m.prompts},
          {"seeds", m.seeds},
          {"records", m.records},
          {"text_records", m.text_records}};
}

inline CorpusManifest manifest_from_json(const nlohmann::json& j) {
  CorpusManifest m;
  m.adapters = j.at("adapters").get<std::size_t>();
  m.prompts = j.at("prompts").get<std::size_t>();
  m.seeds = j.at("seeds").get<std::size_t>();
  m.records = j.at("records").get<std::size_t>();
  m.text_records = j.value("text_records", std::size_t{0});
  return m;
}

inline nlohmann::ordered_json signatures_json(const CorpusIndex& index) {
  auto sigs = nlohmann::ordered_json::array();
  for (const auto& [id, s] : index.signatures) {
    sigs.push_back({{"adapter_id", s.adapter_id},
                    {"strength", s.strength},
                    {"consistency", s.consistency},
                    {"sample_count", s.sample_count},
                    {"dim", s.dim},
                    {"encoder_tag", s.encoder_tag},
                    {"direction", s.direction}});
  }
  return sigs;
}

}  // namespace detail

/// Content-derived id: changes iff signatures, dim, encoder tag or scale change.
inline std::string index_id(const CorpusIndex& index) {
  nlohmann::ordered_json j;
  j["dim"] = index.dim;
  j["encoder_tag"] = index.encoder_tag;
  j["strength_scale"] = index.strength_scale;
  j["signatures"] = detail::signatures_json(index);
  return "idx-" + to_hex(fnv1a64(j.dump())).substr(0, 12);
}

/// Cached id if present, else computed.
inline std::string id_of(const CorpusIndex& index) { return index.id.empty() ? index_id(index) : index.id; }

/// Serialized form: a header line "LORADEX-INDEX <version> <body bytes> <fnv64>"
/// followed by a JSON body. Doubles round-trip exactly.
inline std::string serialize_index(const CorpusIndex& index) {
  validate(index);
  nlohmann::ordered_json j;
  j["format"] = "loradex-index";
  j["encoder_tag"] = index.encoder_tag;
  j["dim"] = index.dim;
  j["created_at"] = index.created_at;
  j["strength_scale"] = index.strength_scale;
  j["manifest"] = detail::manifest_json(index.manifest);
  j["signatures"] = detail::signatures_json(index);
  const std::string body = j.dump() + "\n";
  std::ostringstream out;
  out << kIndexMagic << ' ' << kIndexVersion << ' ' << body.size() << ' ' << to_hex(fnv1a64(body)) << '\n' << body;
  return std::move(out).str();
}

inline CorpusIndex deserialize_index(std::string_view bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string_view::npos) throw data_error("checksum failure: index header truncated");
  std::istringstream header{std::string(bytes.substr(0, eol))};
  std::string magic, digest;
  int version = 0;
  std::size_t length = 0;
  header >> magic >> version >> length >> digest;
  if (magic != kIndexMagic) throw data_error("not an index file (bad magic)");
  if (version != kIndexVersion) {
    throw data_error("index version mismatch: file has " + std::to_string(version) + ", supported " +
                     std::to_string(kIndexVersion));
  }
  const auto body = bytes.substr(eol + 1);
  if (body.size() != length || to_hex(fnv1a64(body)) != digest) throw data_error("checksum failure in index file");

  CorpusIndex index;
  try {
    const auto j = nlohmann::json::parse(body);
    index.encoder_tag = j.at("encoder_tag").get<std::string>();
    index.dim = j.at("dim").get<std::size_t>();
    index.created_at = j.at("created_at").get<std::string>();
    index.strength_scale = j.at("strength_scale").get<double>();
    index.manifest = detail::manifest_from_json(j.at("manifest"));
    for (const auto& s : j.at("signatures")) {
      LoraSignature sig;
      sig.adapter_id = s.at("adapter_id").get<std::string>();
      sig.strength = s.at("strength").get<double>();
      sig.consistency = s.at("consistency").get<double>();
      sig.sample_count = s.at("sample_count").get<std::size_t>();
      sig.dim = s.at("dim").get<std::size_t>();
      sig.encoder_tag = s.at("encoder_tag").get<std::string>();
      sig.direction = s.at("direction").get<Vector>();
      const std::string id = sig.adapter_id;
      if (!index.signatures.emplace(id, std::move(sig)).second) {
        throw data_error("duplicate adapter id '" + id + "' in index");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed index body: ") + e.what());
  }
  validate(index);
  index.id = index_id(index);
  return index;
}

inline void save_index(const CorpusIndex& index, const std::filesystem::path& path) {
  const auto bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write index " + path.string());
  out << bytes;
}

inline CorpusIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open index " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_index(ss.str());
}

}  // namespace loradex

#endif  // LORADEX_INDEX_HPP
