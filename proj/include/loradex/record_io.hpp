#ifndef LORADEX_RECORD_IO_HPP
#define LORADEX_RECORD_IO_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "loradex/checksum.hpp"
#include "loradex/corpus.hpp"
#include "loradex/error.hpp"

namespace loradex {

// ---------------------------------------------------------------------------
// Canonical text format: one JSON object per line.
//
//   {"kind":"image","adapter_id":"a1"|null,"prompt_id":"p","seed":42,"vector":[...]}
//   {"kind":"text","adapter_id":null,"prompt_id":null,"seed":null,"text":"...","vector":[...]}
// ---------------------------------------------------------------------------

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw data_error(std::string("missing required field ") + field);
  return *it;
}

inline EmbeddingVector parse_vector(const nlohmann::json& arr) {
  if (!arr.is_array()) throw data_error("field vector must be an array");
  EmbeddingVector v;
  v.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& x = arr[i];
    // Non-numbers (null) stand in for NaN/Inf, which JSON cannot carry.
    v.push_back(x.is_number() ? static_cast<float>(x.get<double>()) : std::numeric_limits<float>::quiet_NaN());
  }
  return v;
}

inline nlohmann::json vector_json(std::span<const float> v) {
  auto arr = nlohmann::json::array();
  for (float x : v) arr.push_back(static_cast<double>(x));
  return arr;
}

}  // namespace detail

inline Record parse_record(std::string_view line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error(std::string("malformed record: ") + e.what());
  }
  if (!obj.is_object()) throw data_error("malformed record: expected an object");
  const auto& kind = detail::require(obj, "kind");
  if (kind == "text") {
    const auto& text = detail::require(obj, "text");
    if (!text.is_string()) throw data_error("field text must be a string");
    return TextRecord{text.get<std::string>(), detail::parse_vector(detail::require(obj, "vector"))};
  }
  if (kind != "image") throw data_error("unknown record kind " + kind.dump());
  GenerationRecord r;
  const auto& adapter = detail::require(obj, "adapter_id");
  if (!adapter.is_null()) {
    if (!adapter.is_string()) throw data_error("field adapter_id must be a string or null");
    r.adapter_id = adapter.get<std::string>();
  }
  const auto& prompt = detail::require(obj, "prompt_id");
  if (!prompt.is_string()) throw data_error("field prompt_id must be a string");
  r.prompt_id = prompt.get<std::string>();
  const auto& seed = detail::require(obj, "seed");
  if (!seed.is_number_unsigned()) throw data_error("field seed must be a non-negative integer");
  r.seed = seed.get<std::uint64_t>();
  try {
    r.vector = detail::parse_vector(detail::require(obj, "vector"));
  } catch (const Error& e) {
    throw data_error("record " + format_key(r.adapter_id, r.prompt_id, r.seed) + ": " + e.what());
  }
  return r;
}

inline std::string format_record(const GenerationRecord& r) {
  nlohmann::ordered_json obj;
  obj["kind"] = "image";
  obj["adapter_id"] = r.adapter_id ? nlohmann::ordered_json(*r.adapter_id) : nlohmann::ordered_json(nullptr);
  obj["prompt_id"] = r.prompt_id;
  obj["seed"] = r.seed;
  obj["vector"] = detail::vector_json(r.vector);
  return obj.dump();
}

inline std::string format_record(const TextRecord& r) {
  nlohmann::ordered_json obj;
  obj["kind"] = "text";
  obj["adapter_id"] = nullptr;
  obj["prompt_id"] = nullptr;
  obj["seed"] = nullptr;
  obj["text"] = r.text;
  obj["vector"] = detail::vector_json(r.vector);
  return obj.dump();
}

struct IngestResult {
  Corpus corpus;
  IngestReport report;
};

/// Reads JSON-lines records. Blank lines are skipped.
inline IngestResult ingest_records(std::istream& in, std::size_t expected_dim, bool strict = true) {
  CorpusBuilder builder(expected_dim, strict);
  std::string line;
  std::size_t lineno = 0;
  std::vector<IngestIssue> parse_issues;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Record rec;
    try {
      rec = parse_record(line);
    } catch (const Error& e) {
      if (strict) throw data_error("line " + std::to_string(lineno) + ": " + e.what());
      parse_issues.push_back({lineno, "", e.what()});
      continue;
    }
    builder.add(std::move(rec), lineno);
  }
  IngestResult result;
  result.corpus = std::move(builder).finish();
  result.report = builder.report();
  result.report.rejected.insert(result.report.rejected.end(), parse_issues.begin(), parse_issues.end());
  std::sort(result.report.rejected.begin(), result.report.rejected.end(),
            [](const IngestIssue& a, const IngestIssue& b) { return a.position < b.position; });
  return result;
}

/// Writes the corpus in canonical order: generation records sorted by key
/// (BASE last), then text records sorted by text.
inline void write_records(std::ostream& out, const Corpus& corpus) {
  for (std::size_t i = 0; i < corpus.size(); ++i) out << format_record(corpus.record(i)) << '\n';
  for (const auto& [text, vec] : corpus.texts()) out << format_record(TextRecord{text, vec}) << '\n';
}

// ---------------------------------------------------------------------------
// Binary sidecar. All integers little-endian.
//
//   magic "CRLS" | version u32 | dim u32 | count u64
//   string table: n u32, then n x (len u32, bytes)
//   count x record: kind u8 (0 image, 1 text) | adapter u32 (0xffffffff = BASE)
//                   | prompt-or-text u32 | seed u64 (all ones for text) | dim x f32
//   footer: FNV-1a 64 of every preceding byte, u64
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kBinaryMagic = {'C', 'R', 'L', 'S'};
inline constexpr std::uint32_t kBinaryVersion = 1;

namespace detail {

class LeWriter {
 public:
  explicit LeWriter(std::ostream& out) : out_(out) {}
  template <class T>
  void put(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    raw(std::string_view(bytes, sizeof(T)));
  }
  void put_f32(float f) { put(std::bit_cast<std::uint32_t>(f)); }
  void raw(std::string_view bytes) {
    hash_.update(bytes);
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  void finish() {
    const auto digest = hash_.digest();
    put(digest);
  }

 private:
  std::ostream& out_;
  Fnv1a64 hash_;
};

class LeReader {
 public:
  explicit LeReader(std::string_view bytes) : bytes_(bytes) {}
  template <class T>
  T get() {
    auto chunk = take(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(chunk[i])) << (8 * i);
    }
    return static_cast<T>(u);
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw data_error("binary record file truncated");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  [[nodiscard]] std::size_t position() const noexcept { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void write_binary(std::ostream& out, const Corpus& corpus) {
  detail::LeWriter w(out);
  w.raw(std::string_view(kBinaryMagic.data(), kBinaryMagic.size()));
  w.put(kBinaryVersion);
  w.put(static_cast<std::uint32_t>(corpus.dim()));
  w.put(static_cast<std::uint64_t>(corpus.size() + corpus.texts().size()));
  // String table: adapters, then prompts, then texts.
  const auto& adapters = corpus.adapter_ids();
  const auto& prompts = corpus.prompt_ids();
  w.put(static_cast<std::uint32_t>(adapters.size() + prompts.size() + corpus.texts().size()));
  auto put_string = [&](const std::string& s) {
    w.put(static_cast<std::uint32_t>(s.size()));
    w.raw(s);
  };
  for (const auto& s : adapters) put_string(s);
  for (const auto& s : prompts) put_string(s);
  for (const auto& [text, vec] : corpus.texts()) put_string(text);
  const auto prompt_base = static_cast<std::uint32_t>(adapters.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& e = corpus.entries()[i];
    w.put(std::uint8_t{0});
    w.put(e.adapter);
    w.put(prompt_base + e.prompt);
    w.put(e.seed);
    for (float f : corpus.vector(i)) w.put_f32(f);
  }
  auto text_index = static_cast<std::uint32_t>(adapters.size() + prompts.size());
  for (const auto& [text, vec] : corpus.texts()) {
    w.put(std::uint8_t{1});
    w.put(Corpus::kBase);
    w.put(text_index++);
    w.put(std::numeric_limits<std::uint64_t>::max());
    for (float f : vec) w.put_f32(f);
  }
  w.finish();
}

inline IngestResult read_binary(std::string_view bytes, std::size_t expected_dim = 0) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != std::string_view(kBinaryMagic.data(), 4)) {
    throw data_error("not a binary record file (bad magic)");
  }
  if (bytes.size() < 8 + 4) throw data_error("checksum failure: binary record file truncated");
  const auto body = bytes.substr(0, bytes.size() - 8);
  detail::LeReader footer(bytes.substr(bytes.size() - 8));
  if (footer.get<std::uint64_t>() != fnv1a64(body)) throw data_error("checksum failure in binary record file");

  detail::LeReader r(body);
  r.take(4);
  if (auto v = r.get<std::uint32_t>(); v != kBinaryVersion) {
    throw data_error("unsupported binary record version " + std::to_string(v));
  }
  const auto dim = r.get<std::uint32_t>();
  if (expected_dim != 0 && dim != expected_dim) {
    throw data_error("dimension mismatch: file has " + std::to_string(dim) + ", expected " +
                     std::to_string(expected_dim));
  }
  const auto count = r.get<std::uint64_t>();
  const auto nstrings = r.get<std::uint32_t>();
  std::vector<std::string> strings;
  strings.reserve(nstrings);
  for (std::uint32_t i = 0; i < nstrings; ++i) strings.emplace_back(r.take(r.get<std::uint32_t>()));
  auto string_at = [&](std::uint32_t idx) -> const std::string& {
    if (idx >= strings.size()) throw data_error("string index out of range in binary record file");
    return strings[idx];
  };

  CorpusBuilder builder(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto kind = r.get<std::uint8_t>();
    const auto adapter = r.get<std::uint32_t>();
    const auto ref = r.get<std::uint32_t>();
    const auto seed = r.get<std::uint64_t>();
    EmbeddingVector v(dim);
    for (auto& f : v) f = r.get_f32();
    if (kind == 0) {
      GenerationRecord g;
      if (adapter != Corpus::kBase) g.adapter_id = string_at(adapter);
      g.prompt_id = string_at(ref);
      g.seed = seed;
      g.vector = std::move(v);
      builder.add(std::move(g));
    } else if (kind == 1) {
      builder.add(TextRecord{string_at(ref), std::move(v)});
    } else {
      throw data_error("unknown record kind " + std::to_string(kind) + " in binary record file");
    }
  }
  if (r.position() != body.size()) throw data_error("trailing bytes in binary record file");
  IngestResult result;
  result.corpus = std::move(builder).finish();
  result.report = builder.report();
  return result;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

/// Loads either format, detected by the binary magic.
inline IngestResult load_records(const std::filesystem::path& path, std::size_t expected_dim, bool strict = true) {
  const std::string bytes = read_file(path);
  if (bytes.starts_with(std::string_view(kBinaryMagic.data(), 4))) return read_binary(bytes, expected_dim);
  std::istringstream in(bytes);
  return ingest_records(in, expected_dim, strict);
}

}  // namespace loradex

#endif  // LORADEX_RECORD_IO_HPP
