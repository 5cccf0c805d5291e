#ifndef LORADEX_ANALYTICS_EVALUATION_HPP
#define LORADEX_ANALYTICS_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "loradex/error.hpp"
#include "loradex/prompts.hpp"

namespace loradex {

/// One judge score for the image generated with the adapter at `rank` of a
/// retriever's answer to a query.
struct EvalScoreRecord {
  std::string query_id;
  std::string retriever_id;
  std::string evaluator_id;
  std::size_t rank = 1;
  double score = 0.0;
};

/// Reads tab-separated rows: query_id, retriever_id, evaluator_id, rank, raw_score.
/// A first row whose rank column is not numeric is treated as a header.
inline std::vector<EvalScoreRecord> parse_eval_scores(std::istream& in) {
  std::vector<EvalScoreRecord> out;
  std::string line;
  std::size_t lineno = 0;
  std::set<std::tuple<std::string, std::string, std::string, std::size_t>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_tabs(line);
    if (cells.size() != 5) {
      throw data_error("evaluation scores line " + std::to_string(lineno) + ": expected 5 columns, got " +
                       std::to_string(cells.size()));
    }
    EvalScoreRecord r{cells[0], cells[1], cells[2], 0, 0.0};
    try {
      std::size_t used = 0;
      const long long rank = std::stoll(cells[3], &used);
      if (used != cells[3].size() || rank < 1) throw std::invalid_argument("rank");
      r.rank = static_cast<std::size_t>(rank);
      r.score = std::stod(cells[4], &used);
      if (used != cells[4].size() || !std::isfinite(r.score)) throw std::invalid_argument("score");
    } catch (const std::exception&) {
      if (lineno == 1 && out.empty()) continue;
      throw data_error("evaluation scores line " + std::to_string(lineno) + ": bad rank or score");
    }
    if (!seen.emplace(r.query_id, r.retriever_id, r.evaluator_id, r.rank).second) {
      throw data_error("evaluation scores line " + std::to_string(lineno) + ": duplicate (query, retriever, evaluator, rank)");
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Min-max normalization per evaluator over all of its scores, jointly
/// across queries, retrievers and ranks.
inline std::vector<EvalScoreRecord> normalize_scores(std::vector<EvalScoreRecord> records) {
  std::map<std::string, std::pair<double, double>> range;
  for (const auto& r : records) {
    auto [it, inserted] = range.try_emplace(r.evaluator_id, r.score, r.score);
    if (!inserted) {
      it->second.first = std::min(it->second.first, r.score);
      it->second.second = std::max(it->second.second, r.score);
    }
  }
  for (const auto& [evaluator, mm] : range) {
    if (!(mm.first < mm.second)) {
      throw data_error("evaluator '" + evaluator + "' has constant scores; cannot normalize");
    }
  }
  for (auto& r : records) {
    const auto [lo, hi] = range.at(r.evaluator_id);
    r.score = (r.score - lo) / (hi - lo);
  }
  return records;
}

struct TopkCell {
  std::optional<double> mean;
  std::string missing;  ///< why the cell is empty
};

/// retriever x evaluator x k table of mean normalized scores.
struct TopkTable {
  std::vector<std::string> retrievers;
  std::vector<std::string> evaluators;
  std::size_t k_max = 0;
  std::map<std::tuple<std::string, std::string, std::size_t>, TopkCell> cells;

  [[nodiscard]] const TopkCell& cell(const std::string& retriever, const std::string& evaluator, std::size_t k) const {
    return cells.at({retriever, evaluator, k});
  }
};

/// cell(r, e, k) = mean of scores over every query and ranks 1..k.
inline TopkTable topk_table(const std::vector<EvalScoreRecord>& records, std::size_t k_max) {
  if (k_max < 1) throw usage_error("k_max must be at least 1");
  TopkTable table;
  table.k_max = k_max;
  // (retriever, evaluator) -> query -> rank -> score
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::map<std::size_t, double>>> grouped;
  std::set<std::string> retrievers, evaluators;
  for (const auto& r : records) {
    grouped[{r.retriever_id, r.evaluator_id}][r.query_id][r.rank] = r.score;
    retrievers.insert(r.retriever_id);
    evaluators.insert(r.evaluator_id);
  }
  table.retrievers.assign(retrievers.begin(), retrievers.end());
  table.evaluators.assign(evaluators.begin(), evaluators.end());
  for (const auto& ret : table.retrievers) {
    for (const auto& ev : table.evaluators) {
      auto g = grouped.find({ret, ev});
      for (std::size_t k = 1; k <= k_max; ++k) {
        TopkCell cell;
        if (g == grouped.end()) {
          cell.missing = "no scores";
        } else {
          double sum = 0.0;
          std::size_t count = 0;
          for (const auto& [query, ranks] : g->second) {
            for (std::size_t rk = 1; rk <= k; ++rk) {
              auto it = ranks.find(rk);
              if (it == ranks.end()) {
                if (cell.missing.empty()) cell.missing = "query " + query + " lacks rank " + std::to_string(rk);
                continue;
              }
              sum += it->second;
              ++count;
            }
          }
          if (cell.missing.empty()) cell.mean = sum / static_cast<double>(count);
        }
        table.cells.emplace(std::make_tuple(ret, ev, k), std::move(cell));
      }
    }
  }
  return table;
}

/// One block per k: retriever rows, evaluator columns; "NA" for missing cells.
inline void write_topk_table(std::ostream& out, const TopkTable& table) {
  for (std::size_t k = 1; k <= table.k_max; ++k) {
    out << "top-" << k;
    for (const auto& e : table.evaluators) out << '\t' << e;
    out << '\n';
    for (const auto& r : table.retrievers) {
      out << r;
      for (const auto& e : table.evaluators) {
        const auto& c = table.cell(r, e, k);
        if (c.mean) {
          std::ostringstream num;
          num.precision(6);
          num << std::fixed << *c.mean;
          out << '\t' << num.str();
        } else {
          out << "\tNA";
        }
      }
      out << '\n';
    }
  }
}

}  // namespace loradex

#endif  // LORADEX_ANALYTICS_EVALUATION_HPP
