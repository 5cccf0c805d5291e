#ifndef LORADEX_PROMPTS_HPP
#define LORADEX_PROMPTS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "loradex/checksum.hpp"
#include "loradex/error.hpp"

namespace loradex {

enum class PromptRole { indexing, retrieval };

inline const char* to_string(PromptRole role) { return role == PromptRole::indexing ? "indexing" : "retrieval"; }

inline PromptRole parse_role(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "indexing") return PromptRole::indexing;
  if (s == "retrieval") return PromptRole::retrieval;
  throw usage_error("unknown prompt role '" + s + "' (expected indexing or retrieval)");
}

struct Prompt {
  std::string id;
  std::string category;
  std::string subcategory;
  std::string text;
};

struct PromptSet {
  std::string id;  ///< content-derived, stable across loads of the same rows
  PromptRole role = PromptRole::indexing;
  std::vector<Prompt> prompts;

  [[nodiscard]] std::size_t size() const noexcept { return prompts.size(); }
  [[nodiscard]] std::size_t category_count() const {
    std::set<std::string> cats;
    for (const auto& p : prompts) cats.insert(p.category);
    return cats.size();
  }
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

}  // namespace detail

/// Sets the content-derived id from the role, prompt ids and texts.
inline void assign_id(PromptSet& set) {
  Fnv1a64 h;
  for (const auto& p : set.prompts) {
    h.update(p.id);
    h.update(std::string_view("\0", 1));
    h.update(p.text);
    h.update(std::string_view("\0", 1));
  }
  set.id = std::string(to_string(set.role)) + "-" + to_hex(h.digest()).substr(0, 12);
}

/// Throws if the two sets share a prompt id or a prompt text.
inline void check_disjoint(const PromptSet& a, const PromptSet& b) {
  std::set<std::string> ids;
  std::set<std::string> texts;
  for (const auto& p : a.prompts) {
    ids.insert(p.id);
    texts.insert(p.text);
  }
  for (const auto& p : b.prompts) {
    if (ids.contains(p.id)) throw data_error("prompt role overlap: id '" + p.id + "' is in both prompt sets");
    if (texts.contains(p.text)) throw data_error("prompt role overlap: text '" + p.text + "' is in both prompt sets");
  }
}

/// Parses a tab-separated prompt table with a header row naming the columns
/// prompt_id, category, subcategory, text and (optionally) role. Empty
/// prompt ids are minted as category/subcategory/ordinal.
inline PromptSet parse_prompt_set(std::istream& in, PromptRole role) {
  std::string line;
  if (!std::getline(in, line)) throw data_error("prompt set is empty");
  const auto header = detail::split_tabs(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"prompt_id", "category", "subcategory", "text"}) {
    if (!col.contains(required)) throw data_error(std::string("prompt set header lacks column ") + required);
  }
  PromptSet set;
  set.role = role;
  std::map<std::pair<std::string, std::string>, std::size_t> ordinals;
  std::set<std::string> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_tabs(line);
    auto cell = [&](const std::string& name) -> std::string {
      auto i = col.at(name);
      return i < cells.size() ? cells[i] : std::string();
    };
    Prompt p{cell("prompt_id"), cell("category"), cell("subcategory"), cell("text")};
    if (p.text.empty()) throw data_error("prompt set line " + std::to_string(lineno) + ": empty text");
    if (col.contains("role")) {
      const auto r = cell("role");
      if (!r.empty() && parse_role(r) != role) {
        throw data_error("prompt set line " + std::to_string(lineno) + ": row role '" + r +
                         "' does not match requested role " + to_string(role));
      }
    }
    const auto ordinal = ++ordinals[{p.category, p.subcategory}];
    if (p.id.empty()) p.id = p.category + "/" + p.subcategory + "/" + std::to_string(ordinal);
    if (!seen.insert(p.id).second) throw data_error("duplicate prompt_id '" + p.id + "' in prompt set");
    set.prompts.push_back(std::move(p));
  }
  if (set.prompts.empty()) throw data_error("prompt set is empty");
  assign_id(set);
  return set;
}

/// Loads a prompt set; when `other` is given it must have the opposite role
/// and be disjoint from the new set.
inline PromptSet load_prompt_set(const std::filesystem::path& path, PromptRole role,
                                 const PromptSet* other = nullptr) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open prompt set " + path.string());
  auto set = parse_prompt_set(in, role);
  if (other != nullptr) {
    if (other->role == role) throw usage_error("disjointness check needs a prompt set of the other role");
    check_disjoint(*other, set);
  }
  return set;
}

}  // namespace loradex

#endif  // LORADEX_PROMPTS_HPP
