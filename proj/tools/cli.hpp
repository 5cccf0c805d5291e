#ifndef LORADEX_TOOLS_CLI_HPP
#define LORADEX_TOOLS_CLI_HPP

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loradex/loradex.hpp"
#include "loradex/remote_provider.hpp"
#include "loradex/service.hpp"
#include "loradex/synthetic.hpp"

namespace loradex::cli {

namespace fs = std::filesystem;

inline std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

inline std::string fixed(double x, int digits = 6) {
  if (!std::isfinite(x)) return x < 0 ? "-inf" : (x > 0 ? "inf" : "nan");
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

inline std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::stoll(epoch));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec, std::size_t dim,
                                                        const std::string& encoder_tag) {
  if (spec.empty()) throw usage_error("no embedding provider given (--provider or LORADEX_PROVIDER)");
  if (spec.starts_with("http://") || spec.starts_with("https://")) {
    return std::make_unique<RemoteProvider>(RemoteProviderConfig{spec});
  }
  return std::make_unique<FileProvider>(FileProvider::from_file(spec, dim, encoder_tag));
}

/// Feeds record files (either format) through one builder.
inline IngestResult ingest_files(const std::vector<std::string>& paths, std::size_t dim, bool strict) {
  CorpusBuilder builder(dim, strict);
  std::vector<IngestIssue> parse_issues;
  std::size_t position = 0;
  for (const auto& path : paths) {
    const auto bytes = read_file(path);
    if (bytes.starts_with(std::string_view(kBinaryMagic.data(), 4))) {
      auto loaded = read_binary(bytes, dim);
      for (std::size_t i = 0; i < loaded.corpus.size(); ++i) builder.add(loaded.corpus.record(i), ++position);
      for (const auto& [text, v] : loaded.corpus.texts()) builder.add(TextRecord{text, v}, ++position);
      continue;
    }
    std::istringstream in(bytes);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      ++position;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        builder.add(parse_record(line), position);
      } catch (const Error& e) {
        const std::string where = path + ":" + std::to_string(lineno);
        if (strict) throw data_error(where + ": " + e.what());
        parse_issues.push_back({position, where, e.what()});
      }
    }
  }
  IngestResult result;
  result.corpus = std::move(builder).finish();
  result.report = builder.report();
  result.report.rejected.insert(result.report.rejected.end(), parse_issues.begin(), parse_issues.end());
  return result;
}

struct Options {
  // shared
  std::string format = "table";
  std::string index_path = env_or("LORADEX_INDEX", "");
  std::string provider = env_or("LORADEX_PROVIDER", "");
  std::string prompts_path = env_or("LORADEX_PROMPTS", "");
  std::string encoder_tag;
  std::size_t dim = kDefaultDim;
  // ingest / index
  std::vector<std::string> records;
  std::string out;
  bool binary = false;
  bool lenient = false;
  std::size_t min_samples = 2;
  std::size_t jobs = 0;
  double scale = 1.0;
  std::string report_path;
  std::string created_at;
  // query
  std::string query_text;
  std::string queries_file;
  std::size_t top_k = FilterConfig{}.top_k;
  double tau_s = FilterConfig{}.tau_s;
  double tau_c = FilterConfig{}.tau_c;
  std::string variant = "suffix";
  std::string separator = kDefaultSeparator;
  bool verbose = false;
  // analytics
  std::string scores_path;
  std::size_t k_max = 7;
  std::string results_path;
  std::size_t k = 3;
  double strength_split = 0.5;
  double consistency_split = 0.5;
  bool with_thresholds = false;
  std::vector<std::string> scaled_indices;
  std::string adapter;
  // serve
  std::string listen = env_or("LORADEX_LISTEN", "127.0.0.1:8080");
  std::vector<std::string> cors;
  std::size_t cache_size = 1024;
  // synth
  synthetic::SynthConfig synth;
  std::vector<std::string> synth_queries;
};

inline void print_manifest(std::ostream& out, const CorpusManifest& m, const std::string& format) {
  if (format == "records") {
    out << json::to_json(m).dump() << '\n';
    return;
  }
  out << "adapters\tprompts\tseeds\trecords\ttext_records\n"
      << m.adapters << '\t' << m.prompts << '\t' << m.seeds << '\t' << m.records << '\t' << m.text_records << '\n';
}

inline int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  auto result = ingest_files(o.records, o.dim, !o.lenient);
  for (const auto& issue : result.report.rejected) {
    err << "rejected " << issue.key << " (position " << issue.position << "): " << issue.reason << '\n';
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
    if (!f) throw data_error("cannot write " + o.out);
    if (o.binary) {
      write_binary(f, result.corpus);
    } else {
      write_records(f, result.corpus);
    }
  }
  print_manifest(out, result.corpus.manifest(), o.format);
  return 0;
}

inline int cmd_index(const Options& o, std::ostream& out, std::ostream&) {
  if (o.out.empty()) throw usage_error("index needs --out");
  auto result = ingest_files(o.records, o.dim, !o.lenient);
  const auto& corpus = result.corpus;
  if (auto missing = corpus.missing_base_keys(); !missing.empty()) {
    throw data_error("missing BASE record for " + missing.front() + " (" + std::to_string(missing.size()) +
                     " keys missing)");
  }
  IndexBuildConfig cfg;
  cfg.min_samples = o.min_samples;
  cfg.parallelism = o.jobs;
  cfg.strength_scale = o.scale;
  cfg.encoder_tag = o.encoder_tag.empty() ? kDefaultEncoderTag : o.encoder_tag;
  cfg.created_at = o.created_at.empty() ? iso_timestamp() : o.created_at;
  auto outcome = build_index(corpus, cfg);
  save_index(outcome.index, o.out);
  if (!o.report_path.empty()) {
    std::ofstream f(o.report_path);
    write_build_report(f, outcome.report);
  }
  if (o.format == "records") {
    json::Json doc{{"index", o.out},
                   {"index_id", outcome.index.id},
                   {"indexed", outcome.report.indexed_count()},
                   {"adapters", outcome.report.adapters.size()},
                   {"manifest", json::to_json(outcome.index.manifest)}};
    out << doc.dump() << '\n';
  } else {
    out << "indexed " << outcome.report.indexed_count() << " of " << outcome.report.adapters.size()
        << " adapters -> " << o.out << " (" << outcome.index.id << ")\n";
  }
  return 0;
}

inline void print_result_table(std::ostream& out, const RetrievalResult& r, bool verbose) {
  out << "# query=\"" << r.provenance.query_text << "\" variant=" << r.provenance.variant
      << " tau_s=" << r.config.tau_s << " tau_c=" << r.config.tau_c << " top_k=" << r.config.top_k
      << " index=" << r.provenance.index_id << " prompt_set=" << r.provenance.prompt_set_id << '\n';
  for (const auto& w : r.warnings) out << "# warning: " << w << '\n';
  out << "rank\tadapter\tscore\tstrength\tconsistency" << (verbose ? "\tstatus" : "") << '\n';
  std::size_t rank = 0;
  for (const auto& e : r.entries) {
    out << (e.passed ? std::to_string(++rank) : std::string("-")) << '\t' << e.adapter_id << '\t' << fixed(e.score)
        << '\t' << fixed(e.strength) << '\t' << fixed(e.consistency);
    if (verbose) out << '\t' << (e.passed ? "passed" : "filtered: " + e.reason);
    out << '\n';
  }
}

inline int cmd_query(const Options& o, std::ostream& out, std::ostream&) {
  if (o.index_path.empty()) throw usage_error("query needs --index (or LORADEX_INDEX)");
  const auto index = load_index(o.index_path);
  const auto variant = parse_variant(o.variant);
  const auto provider = make_provider(o.provider, index.dim, o.encoder_tag.empty() ? index.encoder_tag : o.encoder_tag);
  check_compatible(provider->probe(), index);
  PromptSet prompts;
  prompts.role = PromptRole::retrieval;
  if (variant != QueryVariant::query_only) {
    if (o.prompts_path.empty()) throw usage_error("query needs --prompts (or LORADEX_PROMPTS)");
    prompts = load_prompt_set(o.prompts_path, PromptRole::retrieval);
  }
  FilterConfig cfg{o.tau_s, o.tau_c, o.top_k, o.verbose};
  cfg.validate();

  std::vector<std::string> queries;
  if (!o.query_text.empty()) queries.push_back(o.query_text);
  if (!o.queries_file.empty()) {
    std::ifstream f(o.queries_file);
    if (!f) throw data_error("cannot open " + o.queries_file);
    for (std::string line; std::getline(f, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) queries.push_back(line);
    }
  }
  if (queries.empty()) throw usage_error("query needs query text or --queries-file");
  for (const auto& q : queries) {
    const auto result = retrieve(index, q, prompts, *provider, cfg, variant, o.separator);
    if (o.format == "records") {
      out << json::to_json(result).dump() << '\n';
    } else {
      print_result_table(out, result, o.verbose);
    }
  }
  return 0;
}

inline int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  std::ifstream f(o.scores_path);
  if (!f) throw data_error("cannot open " + o.scores_path);
  const auto table = topk_table(normalize_scores(parse_eval_scores(f)), o.k_max);
  for (const auto& [key, cell] : table.cells) {
    if (!cell.missing.empty()) {
      err << "missing " << std::get<0>(key) << " / " << std::get<1>(key) << " top-" << std::get<2>(key) << ": "
          << cell.missing << '\n';
    }
  }
  if (o.format == "records") {
    for (const auto& [key, cell] : table.cells) {
      json::Json row{{"retriever", std::get<0>(key)},
                     {"evaluator", std::get<1>(key)},
                     {"k", std::get<2>(key)},
                     {"mean", cell.mean ? json::Json(*cell.mean) : json::Json(nullptr)}};
      out << row.dump() << '\n';
    }
  } else {
    write_topk_table(out, table);
  }
  return 0;
}

inline int cmd_diversity(const Options& o, std::ostream& out, std::ostream&) {
  std::ifstream f(o.results_path);
  if (!f) throw data_error("cannot open " + o.results_path);
  std::vector<RetrievalResult> results;
  for (std::string line; std::getline(f, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw data_error(std::string("malformed results line: ") + e.what());
    }
    results.push_back(json::retrieval_result_from_json(j));
  }
  const auto dist = o.index_path.empty() ? retrieval_counts(results, o.k)
                                         : retrieval_counts(results, o.k, load_index(o.index_path));
  const auto m = diversity_metrics(dist);
  if (o.format == "records") {
    auto doc = json::to_json(m);
    doc["k"] = o.k;
    doc["support_size"] = dist.support_size;
    doc["total"] = dist.total();
    out << doc.dump() << '\n';
  } else {
    out << "normalized_entropy\tgini\teffective_count\n"
        << fixed(m.normalized_entropy) << '\t' << fixed(m.gini) << '\t' << fixed(m.effective_count, 3) << '\n';
  }
  return 0;
}

inline int cmd_screen(const Options& o, std::ostream& out, std::ostream&) {
  if (o.index_path.empty()) throw usage_error("screen needs --index (or LORADEX_INDEX)");
  const auto index = load_index(o.index_path);
  std::optional<FilterConfig> thresholds;
  if (o.with_thresholds) thresholds = FilterConfig{o.tau_s, o.tau_c, 1, false};
  const auto report = screening_report(index, o.strength_split, o.consistency_split, thresholds);
  if (o.format == "records") {
    out << json::to_json(report).dump() << '\n';
    return 0;
  }
  out << "# " << report.disclaimer << '\n';
  out << "adapter\tstrength\tconsistency\tstrength_rank\tconsistency_rank\tquadrant\tflag"
      << (thresholds ? "\tpasses_filter" : "") << '\n';
  for (const auto& e : report.entries) {
    out << e.adapter_id << '\t' << fixed(e.strength) << '\t' << fixed(e.consistency) << '\t' << fixed(e.strength_rank)
        << '\t' << fixed(e.consistency_rank) << '\t' << to_string(e.quadrant) << '\t' << (e.flag ? "review" : "-");
    if (e.passes_filter) out << '\t' << (*e.passes_filter ? "yes" : "no");
    out << '\n';
  }
  return 0;
}

inline int cmd_scale_curve(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<CorpusIndex> loaded;
  std::vector<double> scales;
  loaded.reserve(o.scaled_indices.size());
  for (const auto& spec : o.scaled_indices) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw usage_error("--index expects SCALE=PATH, got '" + spec + "'");
    double scale = 0.0;
    try {
      scale = std::stod(spec.substr(0, eq));
    } catch (const std::exception&) {
      throw usage_error("bad scale in '" + spec + "'");
    }
    scales.push_back(scale);
    loaded.push_back(load_index(spec.substr(eq + 1)));
  }
  std::map<double, const CorpusIndex*> indices;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (!indices.emplace(scales[i], &loaded[i]).second) {
      throw usage_error("scale " + std::to_string(scales[i]) + " given twice");
    }
  }
  const auto curve = scale_curve(indices, o.adapter);
  for (const auto& note : curve.notes) err << "note: " << note << '\n';
  if (o.format == "records") {
    for (const auto& p : curve.points) {
      out << json::Json{{"adapter_id", curve.adapter_id}, {"scale", p.scale}, {"strength", p.strength}}.dump() << '\n';
    }
  } else {
    write_scale_curve(out, curve);
  }
  return 0;
}

inline int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.index_path.empty()) throw usage_error("serve needs --index (or LORADEX_INDEX)");
  ServiceConfig cfg;
  cfg.index_path = o.index_path;
  const auto colon = o.listen.rfind(':');
  if (colon == std::string::npos) throw usage_error("--listen expects HOST:PORT");
  cfg.host = o.listen.substr(0, colon);
  try {
    cfg.port = std::stoi(o.listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw usage_error("bad port in --listen '" + o.listen + "'");
  }
  cfg.provider = o.provider;
  cfg.prompts_path = o.prompts_path;
  cfg.defaults = FilterConfig{o.tau_s, o.tau_c, o.top_k, false};
  cfg.default_variant = parse_variant(o.variant);
  cfg.separator = o.separator;
  cfg.cors_allowlist = o.cors;
  cfg.query_cache_size = o.cache_size;

  auto index = load_index(cfg.index_path);
  std::shared_ptr<const EmbeddingProvider> provider =
      make_provider(cfg.provider, index.dim, o.encoder_tag.empty() ? index.encoder_tag : o.encoder_tag);
  try {
    check_compatible(provider->probe(), index);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::provider) throw;
    err << "warning: " << e.what() << " (queries will fail until it is reachable)\n";
  }
  if (cfg.prompts_path.empty()) throw usage_error("serve needs --prompts (or LORADEX_PROMPTS)");
  auto prompts = load_prompt_set(cfg.prompts_path, PromptRole::retrieval);
  Service service(std::move(index), provider, std::move(prompts), cfg);
  httplib::Server server;
  service.mount(server);
  out << "serving " << service.index().signatures.size() << " adapters on " << cfg.host << ':' << cfg.port << std::endl;
  if (!server.listen(cfg.host, cfg.port)) throw usage_error("cannot listen on " + o.listen);
  return 0;
}

inline int cmd_synth(const Options& o, std::ostream& out, std::ostream&) {
  if (o.out.empty()) throw usage_error("synth needs --out DIR");
  fs::create_directories(o.out);
  auto cfg = o.synth;
  cfg.queries = o.synth_queries;
  synthetic::HashTextEncoder encoder(cfg.dim);
  const auto data = synthetic::generate(cfg, encoder);
  CorpusBuilder builder(cfg.dim);
  for (const auto& r : data.records) builder.add(r);
  const auto corpus = std::move(builder).finish();
  {
    std::ofstream f(fs::path(o.out) / "records.jsonl");
    write_records(f, corpus);
  }
  {
    std::ofstream f(fs::path(o.out) / "indexing_prompts.tsv");
    synthetic::write_prompt_set(f, data.indexing);
  }
  {
    std::ofstream f(fs::path(o.out) / "retrieval_prompts.tsv");
    synthetic::write_prompt_set(f, data.retrieval);
  }
  print_manifest(out, corpus.manifest(), o.format);
  return 0;
}

/// Runs the CLI; returns the process exit code (0 ok, 1 usage, 2 data, 3 provider).
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Index and retrieve LoRA adapters by their measured effect in embedding space"};
  app.require_subcommand(1);
  Options o;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"table", "records"}));
  };
  auto add_filter = [&](CLI::App* sub) {
    sub->add_option("--tau-s", o.tau_s, "Strength upper bound (strict)");
    sub->add_option("--tau-c", o.tau_c, "Consistency lower bound (strict)");
  };

  auto* ingest = app.add_subcommand("ingest", "Validate and deduplicate embedding records");
  ingest->add_option("--records", o.records, "Record files (JSON lines or binary)")->required();
  ingest->add_option("--dim", o.dim, "Expected embedding dimension");
  ingest->add_option("--out", o.out, "Write the canonical corpus here");
  ingest->add_flag("--binary", o.binary, "Write the binary sidecar format");
  ingest->add_flag("--lenient", o.lenient, "Reject invalid records instead of failing");
  add_format(ingest);

  auto* index = app.add_subcommand("index", "Build adapter signatures from a corpus");
  index->add_option("--records", o.records, "Record files")->required();
  index->add_option("--out", o.out, "Index file to write")->required();
  index->add_option("--dim", o.dim, "Expected embedding dimension");
  index->add_option("--encoder-tag", o.encoder_tag, "Encoder identifier stored in the index");
  index->add_option("--min-samples", o.min_samples, "Minimum diffs per adapter")->check(CLI::Range(2, 1 << 30));
  index->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
  index->add_option("--scale", o.scale, "LoRA scale the embeddings were generated at");
  index->add_option("--report", o.report_path, "Write the per-adapter build report here");
  index->add_option("--created-at", o.created_at, "Creation timestamp stored in the index");
  index->add_flag("--lenient", o.lenient, "Reject invalid records instead of failing");
  add_format(index);

  auto* query = app.add_subcommand("query", "Retrieve adapters for a text query");
  query->add_option("text", o.query_text, "Query text");
  query->add_option("--queries-file", o.queries_file, "One query per line");
  query->add_option("--index", o.index_path, "Index file")->envname("LORADEX_INDEX");
  query->add_option("--prompts", o.prompts_path, "Retrieval prompt set")->envname("LORADEX_PROMPTS");
  query->add_option("--provider", o.provider, "Sidecar URL or text-record cache file")->envname("LORADEX_PROVIDER");
  query->add_option("--encoder-tag", o.encoder_tag, "Encoder tag of a file-backed cache (default: the index's)");
  query->add_option("--top-k", o.top_k, "Number of passed adapters to return")->check(CLI::PositiveNumber);
  query->add_option("--variant", o.variant, "suffix, prefix, prefix_and_suffix or query_only");
  query->add_option("--separator", o.separator, "Text joining prompt and query");
  query->add_flag("--verbose", o.verbose, "Also list filtered adapters with reasons");
  add_filter(query);
  add_format(query);

  auto* eval = app.add_subcommand("eval", "Normalize judge scores and tabulate top-k means");
  eval->add_option("--scores", o.scores_path, "TSV: query_id retriever_id evaluator_id rank raw_score")->required();
  eval->add_option("--k-max", o.k_max, "Largest k")->check(CLI::PositiveNumber);
  add_format(eval);

  auto* diversity = app.add_subcommand("diversity", "Diversity of top-k retrievals");
  diversity->add_option("--results", o.results_path, "Query results in records format")->required();
  diversity->add_option("--k", o.k, "Top-k span")->check(CLI::PositiveNumber);
  diversity->add_option("--index", o.index_path, "Check results against this index");
  add_format(diversity);

  auto* screen = app.add_subcommand("screen", "Strength/consistency quadrant screening report");
  screen->add_option("--index", o.index_path, "Index file")->envname("LORADEX_INDEX");
  screen->add_option("--strength-split", o.strength_split, "Strength percentile split")->check(CLI::Range(0.0, 1.0));
  screen->add_option("--consistency-split", o.consistency_split, "Consistency percentile split")
      ->check(CLI::Range(0.0, 1.0));
  screen->add_flag("--with-thresholds", o.with_thresholds, "Also report the tau_s/tau_c filter verdict");
  add_filter(screen);
  add_format(screen);

  auto* scale = app.add_subcommand("scale-curve", "Strength of one adapter across LoRA scales");
  scale->add_option("--index", o.scaled_indices, "SCALE=PATH, repeatable")->required();
  scale->add_option("--adapter", o.adapter, "Adapter id")->required();
  add_format(scale);

  auto* serve = app.add_subcommand("serve", "Run the read-only HTTP retrieval service");
  serve->add_option("--index", o.index_path, "Index file")->envname("LORADEX_INDEX");
  serve->add_option("--prompts", o.prompts_path, "Retrieval prompt set")->envname("LORADEX_PROMPTS");
  serve->add_option("--provider", o.provider, "Sidecar URL or text-record cache file")->envname("LORADEX_PROVIDER");
  serve->add_option("--encoder-tag", o.encoder_tag, "Encoder tag of a file-backed cache");
  serve->add_option("--listen", o.listen, "HOST:PORT")->envname("LORADEX_LISTEN");
  serve->add_option("--cors", o.cors, "Allowed browser origins ('*' for any)");
  serve->add_option("--cache-size", o.cache_size, "Query-vector LRU capacity");
  serve->add_option("--top-k", o.top_k, "Default top-k")->check(CLI::PositiveNumber);
  serve->add_option("--variant", o.variant, "Default query variant");
  serve->add_option("--separator", o.separator, "Text joining prompt and query");
  add_filter(serve);

  auto* synth = app.add_subcommand("synth", "Write a small synthetic corpus for trying the tools");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--dim", o.synth.dim, "Embedding dimension");
  synth->add_option("--adapters", o.synth.adapters, "Random adapters");
  synth->add_option("--prompts", o.synth.prompts, "Prompts per role");
  synth->add_option("--seeds", o.synth.seeds, "Seeds per prompt");
  synth->add_option("--query", o.synth_queries, "Plant an adapter along this query (repeatable)");
  add_format(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return 0;
    }
    err << "loradex: usage error: " << e.what() << '\n';
    return exit_code(ErrorKind::usage);
  }

  try {
    if (*ingest) return cmd_ingest(o, out, err);
    if (*index) return cmd_index(o, out, err);
    if (*query) return cmd_query(o, out, err);
    if (*eval) return cmd_eval(o, out, err);
    if (*diversity) return cmd_diversity(o, out, err);
    if (*screen) return cmd_screen(o, out, err);
    if (*scale) return cmd_scale_curve(o, out, err);
    if (*serve) return cmd_serve(o, out, err);
    if (*synth) return cmd_synth(o, out, err);
  } catch (const Error& e) {
    err << "loradex: error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "loradex: error: " << e.what() << '\n';
    return exit_code(ErrorKind::data);
  }
  return exit_code(ErrorKind::usage);
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"loradex"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace loradex::cli

#endif  // LORADEX_TOOLS_CLI_HPP
