#include "btk/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace btk::pipeline {

namespace {

using nlohmann::ordered_json;

std::atomic<int> g_log_level{static_cast<int>(LogLevel::info)};
std::mutex g_log_mutex;

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
  }
  return "?";
}

std::vector<std::string> read_lines(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot open " + what + " " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path);
  out << j.dump(2) << '\n';
}

ordered_json breakdown_to_json(const BleuBreakdown& b) {
  ordered_json j;
  j["score"] = b.score;
  j["precisions"] = b.precisions;
  j["brevity_penalty"] = b.brevity_penalty;
  j["hyp_len"] = b.hyp_len;
  j["ref_len"] = b.ref_len;
  return j;
}

Corpus load_jsonl(const std::string& path, const std::string& stage) {
  IngestReport report;
  Corpus corpus = ingest(path, CorpusFormat::jsonl, DomainTag(), 1, &report);
  if (report.dropped_blank > 0) {
    log(LogLevel::warn, stage,
        "dropped " + std::to_string(report.dropped_blank) + " blank record(s) from " + path);
  }
  return corpus;
}

std::string default_cache_path(const GlobalOptions& global) {
  if (!global.cache_path.empty()) return global.cache_path;
  if (const char* env = std::getenv("BITEXTKIT_CACHE")) return env;
  return {};
}

struct SessionTranslator {
  std::shared_ptr<TranslationCache> cache = std::make_shared<TranslationCache>();
  std::shared_ptr<CachedTranslator> translator;
  std::string persist_path;

  SessionTranslator(const BackendArgs& backend, const GlobalOptions& global) {
    persist_path = default_cache_path(global);
    if (!persist_path.empty()) cache->load_jsonl(persist_path);
    translator = std::make_shared<CachedTranslator>(
        std::shared_ptr<Translator>(make_translator(backend.to_spec())), cache);
  }

  void flush() {
    if (!persist_path.empty()) cache->flush_jsonl(persist_path);
  }
};

std::string shell_quote(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

double worst_admitted_score(const Corpus& selected, bool higher_is_better) {
  double worst = *selected.pairs[0].score;
  for (const SentencePair& pair : selected.pairs) {
    const double s = *pair.score;
    if (higher_is_better ? s < worst : s > worst) worst = s;
  }
  return worst;
}

}  // namespace

void set_log_level(LogLevel level) { g_log_level = static_cast<int>(level); }

LogLevel parse_log_level(std::string_view name) {
  if (name == "debug") return LogLevel::debug;
  if (name == "info") return LogLevel::info;
  if (name == "warn") return LogLevel::warn;
  if (name == "error") return LogLevel::error;
  throw PipelineError("unknown log level '" + std::string(name) + "'");
}

void log(LogLevel level, std::string_view stage, std::string_view message) {
  if (static_cast<int>(level) < g_log_level.load()) return;
  ordered_json j;
  j["level"] = level_name(level);
  j["stage"] = std::string(stage);
  j["msg"] = std::string(message);
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << j.dump() << '\n';
}

int GlobalOptions::effective_workers() const {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

BackendSpec BackendArgs::to_spec() const {
  if (kind == "lexicon") {
    if (lexicon.empty()) throw PipelineError("lexicon backend requires a lexicon file");
    return LexiconBackend{lexicon};
  }
  if (kind == "cache") {
    if (cache_file.empty()) throw PipelineError("cache backend requires a cache file");
    return CacheBackend{cache_file, strict};
  }
  if (kind == "remote") {
    if (endpoint.empty()) throw PipelineError("remote backend requires an endpoint");
    RemoteConfig config;
    config.endpoint = endpoint;
    config.max_batch = max_batch;
    config.timeout_s = timeout_s;
    config.retries = retries;
    return RemoteBackend{config};
  }
  throw PipelineError("unknown backend '" + kind + "' (expected lexicon, cache, or remote)");
}

Evaluator command_evaluator(const std::string& cmd) {
  return [cmd](const Corpus& corpus) -> double {
    const auto dir = std::filesystem::temp_directory_path();
    static std::atomic<std::uint64_t> counter{0};
    const std::string path =
        (dir / ("btk-tune-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)) + ".jsonl"))
            .string();
    export_corpus(corpus, path, CorpusFormat::jsonl);
    const std::string full = cmd + " " + shell_quote(path);
    FILE* proc = ::popen(full.c_str(), "r");
    if (!proc) {
      std::filesystem::remove(path);
      throw PipelineError("cannot run evaluator: " + cmd);
    }
    std::string output;
    char buf[256];
    while (std::fgets(buf, sizeof(buf), proc)) output += buf;
    const int status = ::pclose(proc);
    std::filesystem::remove(path);
    if (status != 0) {
      throw PipelineError("evaluator exited with status " + std::to_string(status));
    }
    const std::string text = trim(output);
    try {
      std::size_t consumed = 0;
      const double metric = std::stod(text, &consumed);
      if (consumed != text.size()) throw std::invalid_argument("trailing text");
      return metric;
    } catch (const std::exception&) {
      throw PipelineError("evaluator must print a single real number, got: \"" + text + "\"");
    }
  };
}

int run_ingest(const IngestArgs& args, const GlobalOptions&) {
  IngestReport report;
  const Corpus corpus =
      ingest(args.in, args.format, DomainTag::parse(args.domain), args.tier, &report);
  if (report.dropped_blank > 0) {
    log(LogLevel::warn, "ingest",
        "dropped " + std::to_string(report.dropped_blank) + " blank record(s)");
  }
  export_corpus(corpus, args.out, CorpusFormat::jsonl);
  log(LogLevel::info, "ingest",
      "ingested " + std::to_string(corpus.size()) + " pairs from " + args.in);
  return 0;
}

int run_merge(const MergeArgs& args, const GlobalOptions&) {
  std::vector<Corpus> corpora;
  corpora.reserve(args.inputs.size());
  for (const std::string& path : args.inputs) corpora.push_back(load_jsonl(path, "merge"));
  const Corpus merged = merge(corpora);
  export_corpus(merged, args.out, CorpusFormat::jsonl);
  log(LogLevel::info, "merge",
      "merged " + std::to_string(args.inputs.size()) + " corpora into " +
          std::to_string(merged.size()) + " pairs");
  return 0;
}

int run_stats(const StatsArgs& args, const GlobalOptions&) {
  const Corpus corpus = load_jsonl(args.in, "stats");
  const ordered_json j = stats(corpus).to_json();
  std::cout << j.dump(2) << '\n';
  if (args.out) write_json(*args.out, j);
  return 0;
}

int run_sample(const SampleArgs& args, const GlobalOptions& global) {
  const Corpus corpus = load_jsonl(args.in, "sample-test");
  std::map<DomainTag, std::size_t> per_domain;
  for (const auto& [domain, count] : args.per_domain) {
    per_domain[DomainTag::parse(domain)] = count;
  }
  const SampleSplit split = sample_test_set(corpus, per_domain, global.seed);
  export_corpus(split.test, args.test_out, CorpusFormat::jsonl);
  export_corpus(split.remainder, args.remainder_out, CorpusFormat::jsonl);
  log(LogLevel::info, "sample-test",
      "sampled " + std::to_string(split.test.size()) + " test pairs, " +
          std::to_string(split.remainder.size()) + " remain");
  return 0;
}

int run_bleu(const BleuArgs& args, const GlobalOptions&) {
  const auto hyps = read_lines(args.hyp, "hypothesis file");
  const auto refs = read_lines(args.ref, "reference file");
  const BleuBreakdown breakdown = corpus_bleu(hyps, refs, args.config);
  const ordered_json j = breakdown_to_json(breakdown);
  std::cout << j.dump(2) << '\n';
  if (args.out) write_json(*args.out, j);
  return 0;
}

int run_align(const AlignArgs& args, const GlobalOptions& global) {
  SessionTranslator session(args.backend, global);

  const DomainTag domain = DomainTag::parse(args.domain);
  std::vector<DocumentPair> pairs;
  const auto manifest_lines = read_lines(args.pairs_manifest, "align manifest");
  for (std::size_t i = 0; i < manifest_lines.size(); ++i) {
    if (is_blank(manifest_lines[i])) continue;
    const auto fields = split(manifest_lines[i], '\t');
    if (fields.size() < 2) {
      throw PipelineError(args.pairs_manifest + " line " + std::to_string(i + 1) +
                          ": expected en-doc-path<TAB>vi-doc-path");
    }
    Document en = load_document(trim(fields[0]), Lang::en, domain);
    Document vi = load_document(trim(fields[1]), Lang::vi, domain);
    const std::string pair_id =
        std::to_string(pairs.size()) + ":" + std::filesystem::path(trim(fields[0])).stem().string();
    pairs.emplace_back(std::move(en), std::move(vi), pair_id);
  }

  AlignConfig config;
  config.bleu = args.bleu;
  config.min_pair_score = args.min_pair_score;
  config.band_width = args.band_width;
  config.max_sentences = args.max_sentences;

  BatchResult batch;
  try {
    batch = align_batch(pairs, *session.translator, config, global.effective_workers());
  } catch (...) {
    session.flush();
    throw;
  }
  session.flush();

  Corpus aligned;
  aligned.name = "aligned";
  for (std::size_t i = 0; i < batch.outcomes.size(); ++i) {
    if (!batch.outcomes[i].result) {
      log(LogLevel::warn, "align",
          "document pair " + batch.outcomes[i].pair_id + " failed: " + batch.outcomes[i].error);
      continue;
    }
    const Corpus doc_corpus = matches_to_corpus(pairs[i], *batch.outcomes[i].result);
    aligned.pairs.insert(aligned.pairs.end(), doc_corpus.pairs.begin(), doc_corpus.pairs.end());
  }
  export_corpus(aligned, args.out, CorpusFormat::jsonl);
  if (args.report) write_json(*args.report, batch.report.to_json(batch.outcomes));
  log(LogLevel::info, "align",
      "aligned " + std::to_string(batch.report.total_matches) + " pairs from " +
          std::to_string(batch.report.documents) + " documents (" +
          std::to_string(batch.report.failed) + " failed)");
  return batch.ok() ? 0 : 1;
}

namespace {

ScorerSpec build_scorer(const ScoreArgs& args, const GlobalOptions& global,
                        std::unique_ptr<SessionTranslator>& session) {
  if (args.scorer == "remote") {
    if (args.endpoint.empty()) throw PipelineError("remote scorer requires an endpoint");
    RemoteLossScorer scorer;
    scorer.endpoint = args.endpoint;
    scorer.batch = args.batch;
    scorer.timeout_s = args.timeout_s;
    scorer.retries = args.retries;
    return ScorerSpec::remote_loss(scorer);
  }
  if (args.scorer == "roundtrip") {
    session = std::make_unique<SessionTranslator>(args.backend, global);
    RoundtripScorer scorer;
    scorer.translator = session->translator;
    return ScorerSpec::roundtrip_bleu(scorer);
  }
  throw PipelineError("unknown scorer '" + args.scorer + "' (expected roundtrip or remote)");
}

Corpus score_with_args(const Corpus& corpus, const ScoreArgs& args, const GlobalOptions& global) {
  std::unique_ptr<SessionTranslator> session;
  const ScorerSpec spec = build_scorer(args, global, session);
  ScoreOptions options;
  options.checkpoint_path = args.checkpoint;
  options.workers = global.effective_workers();
  Corpus scored;
  try {
    scored = score_corpus(corpus, spec, options);
  } catch (...) {
    if (session) session->flush();
    throw;
  }
  if (session) session->flush();
  return scored;
}

}  // namespace

int run_score(const ScoreArgs& args, const GlobalOptions& global) {
  const Corpus corpus = load_jsonl(args.in, "score");
  const Corpus scored = score_with_args(corpus, args, global);
  export_corpus(scored, args.out, CorpusFormat::jsonl);
  log(LogLevel::info, "score", "scored " + std::to_string(scored.size()) + " pairs");
  return 0;
}

int run_filter(const FilterArgs& args, const GlobalOptions& global) {
  Corpus corpus = load_jsonl(args.in, "filter");
  const bool unscored = std::any_of(corpus.pairs.begin(), corpus.pairs.end(),
                                    [](const SentencePair& p) { return !p.score.has_value(); });
  bool higher_is_better = args.higher_is_better;
  if (args.score) {
    // the scorer defines the ordering even when stored scores make
    // re-scoring unnecessary (remote losses rank low-first)
    higher_is_better = args.score->scorer != "remote";
  }
  if (unscored) {
    if (!args.score) {
      throw PipelineError("input has unscored pairs; run `score` first or pass a scorer");
    }
    ScoreArgs score_args = *args.score;
    score_args.in = args.in;
    std::unique_ptr<SessionTranslator> session;
    const ScorerSpec spec = build_scorer(score_args, global, session);
    higher_is_better = spec.higher_is_better;
    ScoreOptions options;
    options.checkpoint_path = score_args.checkpoint;
    options.workers = global.effective_workers();
    corpus = score_corpus(corpus, spec, options);
    if (session) session->flush();
  }

  if (args.k && !args.tune_k.empty()) {
    throw PipelineError("pass either --k or --tune-k, not both");
  }

  if (!args.tune_k.empty()) {
    if (args.evaluator_cmd.empty()) throw PipelineError("--tune-k requires --evaluator");
    FilterReport report;
    try {
      report = tune_k(corpus, args.tune_k, command_evaluator(args.evaluator_cmd),
                      higher_is_better);
    } catch (const TuneError& e) {
      if (args.report) write_json(*args.report, e.partial.to_json());
      throw;
    }
    const Corpus selected = select_top_k(corpus, report.chosen_k, higher_is_better);
    export_corpus(selected, args.out, CorpusFormat::jsonl);
    if (args.report) write_json(*args.report, report.to_json());
    log(LogLevel::info, "filter",
        "tuned k = " + std::to_string(report.chosen_k) + ", kept " +
            std::to_string(selected.size()) + " pairs");
    return 0;
  }

  if (!args.k) throw PipelineError("filter requires --k or --tune-k");
  const Corpus selected = select_top_k(corpus, *args.k, higher_is_better);
  export_corpus(selected, args.out, CorpusFormat::jsonl);
  if (args.report) {
    ordered_json j;
    j["k"] = *args.k;
    j["selected"] = selected.size();
    j["higher_is_better"] = higher_is_better;
    if (!selected.empty()) {
      j["threshold_score"] = worst_admitted_score(selected, higher_is_better);
    } else {
      j["threshold_score"] = nullptr;
    }
    write_json(*args.report, j);
  }
  log(LogLevel::info, "filter", "kept " + std::to_string(selected.size()) + " pairs");
  return 0;
}

int run_dedup(const DedupArgs& args, const GlobalOptions& global) {
  const Corpus corpus = load_jsonl(args.in, "dedup");
  DedupOptions options;
  options.paranoid = args.paranoid;
  options.workers = global.effective_workers();
  std::pair<Corpus, DedupReport> result;
  if (args.against) {
    const Corpus reference = load_jsonl(*args.against, "dedup");
    result = dedup_against(corpus, reference, args.policy, options);
  } else {
    result = dedup_within(corpus, args.policy, options);
  }
  export_corpus(result.first, args.out, CorpusFormat::jsonl);
  if (args.report) write_json(*args.report, result.second.to_json());
  log(LogLevel::info, "dedup",
      "kept " + std::to_string(result.second.kept) + " of " + std::to_string(result.second.input) +
          " pairs");
  return 0;
}

int run_eval_matrix(const EvalMatrixArgs& args, const GlobalOptions& global) {
  const MatrixSpec spec = MatrixSpec::load(args.manifest);
  const EvalMatrix matrix = evaluate_matrix(spec, args.bleu, global.effective_workers());
  std::cout << matrix.render_text();
  if (args.out) write_json(*args.out, matrix.to_json());
  return 0;
}

int run_budget(const BudgetArgs& args, const GlobalOptions&) {
  ordered_json out = ordered_json::object();
  if (args.supervised_csv && args.pretraining_csv) {
    const BudgetCurve supervised = BudgetCurve::load_csv(*args.supervised_csv, "supervised");
    const BudgetCurve pretraining = BudgetCurve::load_csv(*args.pretraining_csv, "pretraining");
    const BudgetReport report = budget_ratio(supervised, pretraining, args.target_bleu);
    out["budget"] = report.to_json();
    char buf[64];
    std::ostringstream table;
    table << "target BLEU " << args.target_bleu << "\n";
    const auto emit_curve = [&](const char* label, const CurveCrossing& crossing) {
      std::snprintf(buf, sizeof(buf), "%.6g", crossing.data_amount);
      table << "  " << label << ": data " << buf
            << (crossing.reachable ? "" : " (never reaches target; curve maximum)") << "\n";
    };
    emit_curve("supervised ", report.supervised);
    emit_curve("pretraining", report.pretraining);
    std::snprintf(buf, sizeof(buf), "%.6g", report.data_ratio);
    table << "data ratio (pretraining / supervised): " << buf
          << (report.ratio_exact ? "" : " (bound)") << "\n";
    if (report.wall_time_ratio) {
      std::snprintf(buf, sizeof(buf), "%.6g", *report.wall_time_ratio);
      table << "wall-time ratio: " << buf << "\n";
    }
    std::cout << table.str();
  } else if (args.supervised_csv || args.pretraining_csv) {
    throw PipelineError("budget requires both --supervised and --pretraining curves");
  }

  if (args.time_csv) {
    const TimeReport report = time_report(load_tier_records_csv(*args.time_csv));
    std::cout << report.render_text();
    out["time"] = report.to_json();
  }
  if (!args.supervised_csv && !args.time_csv) {
    throw PipelineError("budget needs curve files and/or --time-csv");
  }
  if (args.out) write_json(*args.out, out);
  return 0;
}

namespace {

template <typename T>
T get_or(const ordered_json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<T>();
}

std::string require_string(const ordered_json& j, const std::string& key,
                           const std::string& stage) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw PipelineError("pipeline stage '" + stage + "' needs string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

BackendArgs backend_from_json(const ordered_json& stage) {
  BackendArgs backend;
  if (!stage.contains("backend")) return backend;
  const auto& b = stage["backend"];
  backend.kind = get_or<std::string>(b, "kind", backend.kind);
  backend.lexicon = get_or<std::string>(b, "lexicon", backend.lexicon);
  backend.cache_file = get_or<std::string>(b, "cache", backend.cache_file);
  backend.strict = get_or<bool>(b, "strict", backend.strict);
  backend.endpoint = get_or<std::string>(b, "endpoint", backend.endpoint);
  backend.max_batch = get_or<int>(b, "max_batch", backend.max_batch);
  backend.timeout_s = get_or<double>(b, "timeout_s", backend.timeout_s);
  backend.retries = get_or<int>(b, "retries", backend.retries);
  return backend;
}

ScoreArgs score_args_from_json(const ordered_json& stage, const std::string& name) {
  ScoreArgs args;
  args.in = get_or<std::string>(stage, "in", "");
  args.scorer = get_or<std::string>(stage, "scorer", args.scorer);
  args.backend = backend_from_json(stage);
  args.endpoint = get_or<std::string>(stage, "endpoint", args.endpoint);
  args.batch = get_or<int>(stage, "batch", args.batch);
  if (stage.contains("checkpoint")) args.checkpoint = stage["checkpoint"].get<std::string>();
  if (stage.contains("out")) args.out = stage["out"].get<std::string>();
  (void)name;
  return args;
}

// Input paths a stage reads; used for upfront validation.
std::vector<std::string> stage_inputs(const std::string& name, const ordered_json& stage) {
  std::vector<std::string> inputs;
  const auto add = [&](const char* key) {
    if (stage.contains(key) && stage[key].is_string()) {
      inputs.push_back(stage[key].get<std::string>());
    }
  };
  if (name == "merge" && stage.contains("in") && stage["in"].is_array()) {
    for (const auto& path : stage["in"]) inputs.push_back(path.get<std::string>());
  } else {
    add("in");
  }
  add("against");
  add("pairs");
  add("hyp");
  add("ref");
  add("manifest");
  add("supervised");
  add("pretraining");
  add("time");
  if (stage.contains("backend") && stage["backend"].is_object()) {
    const auto& b = stage["backend"];
    if (b.contains("lexicon")) inputs.push_back(b["lexicon"].get<std::string>());
    if (b.contains("cache")) inputs.push_back(b["cache"].get<std::string>());
  }
  return inputs;
}

std::vector<std::string> stage_outputs(const ordered_json& stage) {
  std::vector<std::string> outputs;
  for (const char* key : {"out", "report", "test", "remainder", "checkpoint"}) {
    if (stage.contains(key) && stage[key].is_string()) {
      outputs.push_back(stage[key].get<std::string>());
    }
  }
  return outputs;
}

int dispatch_stage(const std::string& name, const ordered_json& stage,
                   const GlobalOptions& global) {
  if (name == "ingest") {
    IngestArgs args;
    args.in = require_string(stage, "in", name);
    args.format = parse_format(get_or<std::string>(stage, "format", "jsonl"));
    args.domain = get_or<std::string>(stage, "domain", args.domain);
    args.tier = get_or<int>(stage, "tier", args.tier);
    args.out = require_string(stage, "out", name);
    return run_ingest(args, global);
  }
  if (name == "merge") {
    MergeArgs args;
    if (!stage.contains("in") || !stage["in"].is_array()) {
      throw PipelineError("merge stage needs an array field 'in'");
    }
    for (const auto& path : stage["in"]) args.inputs.push_back(path.get<std::string>());
    args.out = require_string(stage, "out", name);
    return run_merge(args, global);
  }
  if (name == "stats") {
    StatsArgs args;
    args.in = require_string(stage, "in", name);
    if (stage.contains("out")) args.out = stage["out"].get<std::string>();
    return run_stats(args, global);
  }
  if (name == "sample-test") {
    SampleArgs args;
    args.in = require_string(stage, "in", name);
    if (!stage.contains("per_domain") || !stage["per_domain"].is_object()) {
      throw PipelineError("sample-test stage needs object field 'per_domain'");
    }
    for (const auto& [domain, count] : stage["per_domain"].items()) {
      args.per_domain[domain] = count.get<std::size_t>();
    }
    args.test_out = require_string(stage, "test", name);
    args.remainder_out = require_string(stage, "remainder", name);
    return run_sample(args, global);
  }
  if (name == "bleu") {
    BleuArgs args;
    args.hyp = require_string(stage, "hyp", name);
    args.ref = require_string(stage, "ref", name);
    args.config.max_n = get_or<int>(stage, "max_n", args.config.max_n);
    args.config.case_sensitive = !get_or<bool>(stage, "lc", false);
    if (stage.contains("tokenizer")) {
      args.config.tokenizer = parse_tokenizer(stage["tokenizer"].get<std::string>());
    }
    if (stage.contains("smoothing")) {
      args.config.smoothing = parse_smoothing(stage["smoothing"].get<std::string>());
    }
    if (stage.contains("out")) args.out = stage["out"].get<std::string>();
    return run_bleu(args, global);
  }
  if (name == "align") {
    AlignArgs args;
    args.pairs_manifest = require_string(stage, "pairs", name);
    args.backend = backend_from_json(stage);
    args.domain = get_or<std::string>(stage, "domain", args.domain);
    args.min_pair_score = get_or<double>(stage, "min_pair_score", args.min_pair_score);
    if (stage.contains("band")) args.band_width = stage["band"].get<std::size_t>();
    args.max_sentences = get_or<std::size_t>(stage, "max_sentences", args.max_sentences);
    args.bleu.max_n = get_or<int>(stage, "max_n", args.bleu.max_n);
    args.out = require_string(stage, "out", name);
    if (stage.contains("report")) args.report = stage["report"].get<std::string>();
    return run_align(args, global);
  }
  if (name == "score") {
    ScoreArgs args = score_args_from_json(stage, name);
    if (args.in.empty()) throw PipelineError("score stage needs 'in'");
    if (args.out.empty()) throw PipelineError("score stage needs 'out'");
    return run_score(args, global);
  }
  if (name == "filter") {
    FilterArgs args;
    args.in = require_string(stage, "in", name);
    if (stage.contains("k")) args.k = stage["k"].get<std::size_t>();
    if (stage.contains("tune_k")) args.tune_k = stage["tune_k"].get<std::vector<std::size_t>>();
    args.evaluator_cmd = get_or<std::string>(stage, "evaluator", args.evaluator_cmd);
    const std::string order = get_or<std::string>(stage, "order", "higher");
    if (order != "higher" && order != "lower") {
      throw PipelineError("filter order must be 'higher' or 'lower'");
    }
    args.higher_is_better = order == "higher";
    if (stage.contains("scorer")) args.score = score_args_from_json(stage, name);
    args.out = require_string(stage, "out", name);
    if (stage.contains("report")) args.report = stage["report"].get<std::string>();
    return run_filter(args, global);
  }
  if (name == "dedup") {
    DedupArgs args;
    args.in = require_string(stage, "in", name);
    if (stage.contains("against")) args.against = stage["against"].get<std::string>();
    if (stage.contains("policy") && stage["policy"].is_object()) {
      const auto& p = stage["policy"];
      args.policy.unicode_canonical = get_or<bool>(p, "unicode_canonical", true);
      args.policy.casefold = get_or<bool>(p, "casefold", true);
      args.policy.collapse_whitespace = get_or<bool>(p, "collapse_whitespace", true);
      args.policy.strip_punct = get_or<bool>(p, "strip_punct", false);
    }
    args.paranoid = get_or<bool>(stage, "paranoid", false);
    args.out = require_string(stage, "out", name);
    if (stage.contains("report")) args.report = stage["report"].get<std::string>();
    return run_dedup(args, global);
  }
  if (name == "eval-matrix") {
    EvalMatrixArgs args;
    args.manifest = require_string(stage, "manifest", name);
    args.bleu.max_n = get_or<int>(stage, "max_n", args.bleu.max_n);
    if (stage.contains("out")) args.out = stage["out"].get<std::string>();
    return run_eval_matrix(args, global);
  }
  if (name == "budget") {
    BudgetArgs args;
    if (stage.contains("supervised")) args.supervised_csv = stage["supervised"].get<std::string>();
    if (stage.contains("pretraining")) {
      args.pretraining_csv = stage["pretraining"].get<std::string>();
    }
    args.target_bleu = get_or<double>(stage, "target", 0.0);
    if (stage.contains("time")) args.time_csv = stage["time"].get<std::string>();
    if (stage.contains("out")) args.out = stage["out"].get<std::string>();
    return run_budget(args, global);
  }
  throw PipelineError("unknown pipeline stage '" + name + "'");
}

}  // namespace

int run_pipeline(const std::string& config_path, const GlobalOptions& overrides) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw PipelineError("cannot open pipeline config " + config_path);
  ordered_json config;
  try {
    in >> config;
  } catch (const ordered_json::parse_error& e) {
    throw PipelineError("pipeline config " + config_path + ": " + e.what());
  }
  if (!config.contains("stages") || !config["stages"].is_array()) {
    throw PipelineError("pipeline config needs a 'stages' array");
  }

  GlobalOptions global;
  global.workers = get_or<int>(config, "workers", 0);
  global.seed = get_or<std::uint64_t>(config, "seed", 0);
  global.cache_path = get_or<std::string>(config, "cache", "");
  if (config.contains("log_level")) {
    set_log_level(parse_log_level(config["log_level"].get<std::string>()));
  }
  if (overrides.workers > 0) global.workers = overrides.workers;
  if (overrides.seed != 0) global.seed = overrides.seed;
  if (!overrides.cache_path.empty()) global.cache_path = overrides.cache_path;

  // Validate referenced input paths before running anything; outputs of
  // earlier stages count as available.
  std::unordered_set<std::string> produced;
  for (const auto& stage : config["stages"]) {
    if (!stage.is_object() || !stage.contains("stage")) {
      throw PipelineError("every pipeline stage needs a 'stage' name");
    }
    const std::string name = stage["stage"].get<std::string>();
    for (const std::string& input : stage_inputs(name, stage)) {
      if (produced.count(input)) continue;
      if (!std::filesystem::exists(input)) {
        throw PipelineError("stage '" + name + "': input path does not exist: " + input);
      }
    }
    for (const std::string& output : stage_outputs(stage)) produced.insert(output);
  }

  for (const auto& stage : config["stages"]) {
    const std::string name = stage["stage"].get<std::string>();
    log(LogLevel::info, "pipeline", "running stage " + name);
    const int status = dispatch_stage(name, stage, global);
    if (status != 0) {
      log(LogLevel::error, "pipeline", "stage " + name + " failed with status " +
                                           std::to_string(status));
      return status;
    }
  }
  return 0;
}

}  // namespace btk::pipeline
