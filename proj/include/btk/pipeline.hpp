#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "btk/aligner.hpp"
#include "btk/bleu.hpp"
#include "btk/corpus.hpp"
#include "btk/dedup.hpp"
#include "btk/filter.hpp"
#include "btk/report.hpp"
#include "btk/translator.hpp"

namespace btk::pipeline {

class PipelineError : public Error {
 public:
  using Error::Error;
};

// Structured stderr logging: one JSON object per line (level, stage, msg).
enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };
void set_log_level(LogLevel level);
LogLevel parse_log_level(std::string_view name);
void log(LogLevel level, std::string_view stage, std::string_view message);

struct GlobalOptions {
  int workers = 0;  // 0: use hardware concurrency
  std::uint64_t seed = 0;
  std::string cache_path;  // empty: no persisted translation cache

  int effective_workers() const;
};

struct IngestArgs {
  std::string in;
  CorpusFormat format = CorpusFormat::jsonl;
  std::string domain = "other";
  int tier = 1;
  std::string out;
};

struct MergeArgs {
  std::vector<std::string> inputs;
  std::string out;
};

struct StatsArgs {
  std::string in;
  std::optional<std::string> out;
};

struct SampleArgs {
  std::string in;
  std::map<std::string, std::size_t> per_domain;
  std::string test_out;
  std::string remainder_out;
};

struct BleuArgs {
  std::string hyp;
  std::string ref;
  BleuConfig config;
  std::optional<std::string> out;
};

struct BackendArgs {
  std::string kind = "lexicon";  // lexicon | cache | remote
  std::string lexicon;
  std::string cache_file;
  bool strict = true;
  std::string endpoint;
  int max_batch = 64;
  double timeout_s = 30.0;
  int retries = 3;

  BackendSpec to_spec() const;
};

struct AlignArgs {
  std::string pairs_manifest;  // TSV: en-doc-path \t vi-doc-path
  BackendArgs backend;
  std::string domain = "other";
  double min_pair_score = 10.0;
  BleuConfig bleu;
  std::optional<std::size_t> band_width;
  std::size_t max_sentences = 20000;
  std::string out;
  std::optional<std::string> report;
};

struct ScoreArgs {
  std::string in;
  std::string scorer = "roundtrip";  // roundtrip | remote
  BackendArgs backend;               // roundtrip translation backend
  std::string endpoint;              // remote loss endpoint
  int batch = 64;
  double timeout_s = 30.0;
  int retries = 3;
  std::optional<std::string> checkpoint;
  std::string out;
};

struct FilterArgs {
  std::string in;
  std::optional<ScoreArgs> score;  // score first when the input is unscored
  std::optional<std::size_t> k;
  std::vector<std::size_t> tune_k;
  std::string evaluator_cmd;
  bool higher_is_better = true;
  std::string out;
  std::optional<std::string> report;
};

struct DedupArgs {
  std::string in;
  std::optional<std::string> against;
  NormalizationPolicy policy;
  bool paranoid = false;
  std::string out;
  std::optional<std::string> report;
};

struct EvalMatrixArgs {
  std::string manifest;
  BleuConfig bleu;
  std::optional<std::string> out;
};

struct BudgetArgs {
  std::optional<std::string> supervised_csv;
  std::optional<std::string> pretraining_csv;
  double target_bleu = 0.0;
  std::optional<std::string> time_csv;
  std::optional<std::string> out;
};

int run_ingest(const IngestArgs& args, const GlobalOptions& global);
int run_merge(const MergeArgs& args, const GlobalOptions& global);
int run_stats(const StatsArgs& args, const GlobalOptions& global);
int run_sample(const SampleArgs& args, const GlobalOptions& global);
int run_bleu(const BleuArgs& args, const GlobalOptions& global);
int run_align(const AlignArgs& args, const GlobalOptions& global);
int run_score(const ScoreArgs& args, const GlobalOptions& global);
int run_filter(const FilterArgs& args, const GlobalOptions& global);
int run_dedup(const DedupArgs& args, const GlobalOptions& global);
int run_eval_matrix(const EvalMatrixArgs& args, const GlobalOptions& global);
int run_budget(const BudgetArgs& args, const GlobalOptions& global);

// Config-driven sequence; each stage object carries the same keys as the
// corresponding subcommand flags. Stops at the first failing stage.
int run_pipeline(const std::string& config_path, const GlobalOptions& overrides);

// Shells out to `cmd <corpus-file>` and parses a single real from stdout.
Evaluator command_evaluator(const std::string& cmd);

}  // namespace btk::pipeline
