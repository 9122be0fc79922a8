#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "btk/pipeline.hpp"

namespace {

using namespace btk;
using namespace btk::pipeline;

constexpr const char* kVersion = "bitextkit 0.1.0";

std::map<std::string, std::size_t> parse_per_domain(const std::vector<std::string>& specs) {
  std::map<std::string, std::size_t> out;
  for (const std::string& spec : specs) {
    for (const std::string& item : split(spec, ',')) {
      if (trim(item).empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw PipelineError("--per-domain expects domain=count, got '" + item + "'");
      }
      out[trim(item.substr(0, eq))] =
          static_cast<std::size_t>(std::stoull(trim(item.substr(eq + 1))));
    }
  }
  return out;
}

NormalizationPolicy parse_policy(const std::string& flags) {
  NormalizationPolicy policy;
  policy.unicode_canonical = false;
  policy.casefold = false;
  policy.collapse_whitespace = false;
  policy.strip_punct = false;
  for (const std::string& raw : split(flags, ',')) {
    const std::string flag = trim(raw);
    if (flag.empty()) continue;
    if (flag == "nfc") {
      policy.unicode_canonical = true;
    } else if (flag == "casefold") {
      policy.casefold = true;
    } else if (flag == "ws") {
      policy.collapse_whitespace = true;
    } else if (flag == "punct") {
      policy.strip_punct = true;
    } else {
      throw PipelineError("unknown policy flag '" + flag + "' (expected nfc,casefold,ws,punct)");
    }
  }
  return policy;
}

std::vector<std::size_t> parse_k_list(const std::string& list) {
  std::vector<std::size_t> out;
  for (const std::string& item : split(list, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(trim(item))));
  }
  return out;
}

void add_backend_flags(CLI::App* cmd, BackendArgs& backend) {
  cmd->add_option("--backend", backend.kind, "translation backend: lexicon, cache, or remote")
      ->check(CLI::IsMember({"lexicon", "cache", "remote"}));
  cmd->add_option("--lexicon", backend.lexicon, "lexicon TSV (en<TAB>vi) for the lexicon backend");
  cmd->add_option("--cache-file", backend.cache_file, "cache JSONL for the cache backend");
  cmd->add_flag("--strict,!--no-strict", backend.strict,
                "fail on cache miss (cache backend only)");
  cmd->add_option("--endpoint", backend.endpoint, "HTTP endpoint for the remote backend");
  cmd->add_option("--max-batch", backend.max_batch, "max sentences per remote request");
  cmd->add_option("--timeout", backend.timeout_s, "remote timeout in seconds");
  cmd->add_option("--retries", backend.retries, "remote retry budget");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel corpus construction, alignment, filtering and evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GlobalOptions global;
  std::string log_level = "info";
  app.add_option("--workers", global.workers, "worker threads for parallel stages (0 = all cores)");
  app.add_option("--seed", global.seed, "seed for randomized operations");
  app.add_option("--cache", global.cache_path,
                 "translation cache JSONL (also via BITEXTKIT_CACHE)");
  app.add_option("--log-level", log_level, "debug, info, warn, or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  // ingest
  IngestArgs ingest_args;
  std::string ingest_format = "jsonl";
  auto* ingest_cmd = app.add_subcommand("ingest", "read a corpus file into canonical JSONL");
  ingest_cmd->add_option("--in", ingest_args.in, "input path")->required();
  ingest_cmd->add_option("--format", ingest_format, "line-pair, tsv, or jsonl")
      ->check(CLI::IsMember({"line-pair", "tsv", "jsonl"}));
  ingest_cmd->add_option("--domain", ingest_args.domain, "default domain tag");
  ingest_cmd->add_option("--tier", ingest_args.tier, "default tier (1..4)");
  ingest_cmd->add_option("--out", ingest_args.out, "output JSONL")->required();

  // merge
  MergeArgs merge_args;
  auto* merge_cmd = app.add_subcommand("merge", "concatenate corpora in argument order");
  merge_cmd->add_option("--in", merge_args.inputs, "input JSONL (repeatable)")->required();
  merge_cmd->add_option("--out", merge_args.out, "output JSONL")->required();

  // stats
  StatsArgs stats_args;
  std::string stats_out;
  auto* stats_cmd = app.add_subcommand("stats", "per-domain/tier counts and token histograms");
  stats_cmd->add_option("--in", stats_args.in, "input JSONL")->required();
  stats_cmd->add_option("--out", stats_out, "also write the JSON report here");

  // sample-test
  SampleArgs sample_args;
  std::vector<std::string> per_domain_specs;
  std::string sample_test_out, sample_rem_out;
  long long sample_seed = -1;
  auto* sample_cmd = app.add_subcommand("sample-test", "split off a per-domain test set");
  sample_cmd->add_option("--in", sample_args.in, "input JSONL")->required();
  sample_cmd->add_option("--seed", sample_seed, "seed for this sampling run");
  sample_cmd->add_option("--per-domain", per_domain_specs, "domain=count[,domain=count...]")
      ->required();
  sample_cmd->add_option("--test", sample_test_out, "test output JSONL")->required();
  sample_cmd->add_option("--remainder", sample_rem_out, "remainder output JSONL")->required();

  // bleu
  BleuArgs bleu_args;
  bool bleu_lc = false;
  std::string bleu_tokenizer, bleu_smoothing, bleu_out;
  auto* bleu_cmd = app.add_subcommand("bleu", "corpus BLEU of a hypothesis file vs a reference");
  bleu_cmd->add_option("--hyp", bleu_args.hyp, "hypothesis file, one sentence per line")
      ->required();
  bleu_cmd->add_option("--ref", bleu_args.ref, "reference file, one sentence per line")
      ->required();
  bleu_cmd->add_option("--max-n", bleu_args.config.max_n, "highest n-gram order");
  bleu_cmd->add_flag("--lc,!--no-lc", bleu_lc, "lowercase before scoring");
  bleu_cmd->add_option("--tokenizer", bleu_tokenizer, "whitespace or intl");
  bleu_cmd->add_option("--smoothing", bleu_smoothing, "none, add_k, or add_k:<k>");
  bleu_cmd->add_option("--out", bleu_out, "also write the JSON breakdown here");

  // align
  AlignArgs align_args;
  std::string align_report;
  long long align_band = -1;
  int align_workers = 0;
  auto* align_cmd = app.add_subcommand("align", "DP-align weakly-aligned document pairs");
  align_cmd->add_option("--pairs", align_args.pairs_manifest,
                        "manifest TSV: en-doc-path<TAB>vi-doc-path")
      ->required();
  align_cmd->add_option("--workers", align_workers, "worker threads for this run");
  add_backend_flags(align_cmd, align_args.backend);
  align_cmd->add_option("--domain", align_args.domain, "domain tag for emitted pairs");
  align_cmd->add_option("--min-pair-score", align_args.min_pair_score,
                        "minimum s(e,v) for a match (0..200)");
  align_cmd->add_option("--band", align_band, "restrict matches to |m-n| <= band");
  align_cmd->add_option("--max-sentences", align_args.max_sentences,
                        "reject documents longer than this");
  align_cmd->add_option("--max-n", align_args.bleu.max_n, "BLEU n-gram order for pair scores");
  align_cmd->add_option("--out", align_args.out, "matched pairs JSONL")->required();
  align_cmd->add_option("--report", align_report, "alignment report JSON");

  // score
  ScoreArgs score_args;
  std::string score_checkpoint, score_out;
  auto* score_cmd = app.add_subcommand("score", "attach a quality score to every pair");
  score_cmd->add_option("--in", score_args.in, "input JSONL")->required();
  score_cmd->add_option("--scorer", score_args.scorer, "roundtrip or remote")
      ->check(CLI::IsMember({"roundtrip", "remote"}));
  add_backend_flags(score_cmd, score_args.backend);
  score_cmd->add_option("--batch", score_args.batch, "pairs per remote scoring request");
  score_cmd->add_option("--checkpoint", score_checkpoint, "resumable score checkpoint JSONL");
  score_cmd->add_option("--out", score_out, "scored output JSONL")->required();

  // filter
  FilterArgs filter_args;
  ScoreArgs filter_score_args;
  bool filter_has_scorer = false;
  long long filter_k = -1;
  std::string filter_tune, filter_order = "higher", filter_report;
  auto* filter_cmd = app.add_subcommand("filter", "keep the best K pairs (or tune K)");
  filter_cmd->add_option("--in", filter_args.in, "scored input JSONL")->required();
  filter_cmd->add_option("--k", filter_k, "number of pairs to keep");
  filter_cmd->add_option("--tune-k", filter_tune, "comma-separated candidate K values");
  filter_cmd->add_option("--evaluator", filter_args.evaluator_cmd,
                         "command run as `CMD corpus.jsonl`, prints one real number");
  filter_cmd->add_option("--order", filter_order, "higher or lower scores are better")
      ->check(CLI::IsMember({"higher", "lower"}));
  auto* filter_scorer_opt =
      filter_cmd->add_option("--scorer", filter_score_args.scorer,
                             "score unscored input first: roundtrip or remote")
          ->check(CLI::IsMember({"roundtrip", "remote"}));
  add_backend_flags(filter_cmd, filter_score_args.backend);
  filter_cmd->add_option("--batch", filter_score_args.batch, "pairs per remote scoring request");
  std::string filter_checkpoint;
  filter_cmd->add_option("--checkpoint", filter_checkpoint, "resumable score checkpoint JSONL");
  filter_cmd->add_option("--out", filter_args.out, "filtered output JSONL")->required();
  filter_cmd->add_option("--report", filter_report, "filter report JSON");

  // dedup
  DedupArgs dedup_args;
  std::string dedup_against_path, dedup_policy, dedup_report;
  auto* dedup_cmd = app.add_subcommand("dedup", "remove duplicate pairs");
  dedup_cmd->add_option("--in", dedup_args.in, "input JSONL")->required();
  dedup_cmd->add_option("--against", dedup_against_path,
                        "also drop pairs whose key occurs in this corpus");
  dedup_cmd->add_option("--policy", dedup_policy,
                        "normalization flags, default nfc,casefold,ws (punct available)");
  dedup_cmd->add_flag("--paranoid", dedup_args.paranoid,
                      "compare full keys instead of fingerprints");
  dedup_cmd->add_option("--out", dedup_args.out, "deduplicated output JSONL")->required();
  dedup_cmd->add_option("--report", dedup_report, "dedup report JSON");

  // eval-matrix
  EvalMatrixArgs eval_args;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval-matrix", "multi-domain BLEU matrix");
  eval_cmd->add_option("--manifest", eval_args.manifest, "matrix manifest JSON")->required();
  eval_cmd->add_option("--max-n", eval_args.bleu.max_n, "BLEU n-gram order");
  eval_cmd->add_option("--out", eval_out, "matrix JSON output");

  // budget
  BudgetArgs budget_args;
  std::string budget_supervised, budget_pretraining, budget_time, budget_out;
  auto* budget_cmd = app.add_subcommand("budget", "data-budget ratio and tier time reports");
  budget_cmd->add_option("--supervised", budget_supervised, "supervised curve CSV");
  budget_cmd->add_option("--pretraining", budget_pretraining, "pretraining curve CSV");
  budget_cmd->add_option("--target", budget_args.target_bleu, "target BLEU");
  budget_cmd->add_option("--time-csv", budget_time, "tier,human_hours,machine_hours,pairs CSV");
  budget_cmd->add_option("--out", budget_out, "JSON output");

  // pipeline
  std::string pipeline_config;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "run a config-driven stage sequence");
  pipeline_cmd->add_option("--config", pipeline_config, "pipeline config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  set_log_level(parse_log_level(log_level));

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (ingest_cmd->parsed()) {
      ingest_args.format = parse_format(ingest_format);
      return run_ingest(ingest_args, global);
    }
    if (merge_cmd->parsed()) return run_merge(merge_args, global);
    if (stats_cmd->parsed()) {
      if (!stats_out.empty()) stats_args.out = stats_out;
      return run_stats(stats_args, global);
    }
    if (sample_cmd->parsed()) {
      sample_args.per_domain = parse_per_domain(per_domain_specs);
      sample_args.test_out = sample_test_out;
      sample_args.remainder_out = sample_rem_out;
      if (sample_seed >= 0) global.seed = static_cast<std::uint64_t>(sample_seed);
      return run_sample(sample_args, global);
    }
    if (bleu_cmd->parsed()) {
      bleu_args.config.case_sensitive = !bleu_lc;
      if (!bleu_tokenizer.empty()) bleu_args.config.tokenizer = parse_tokenizer(bleu_tokenizer);
      if (!bleu_smoothing.empty()) bleu_args.config.smoothing = parse_smoothing(bleu_smoothing);
      if (!bleu_out.empty()) bleu_args.out = bleu_out;
      return run_bleu(bleu_args, global);
    }
    if (align_cmd->parsed()) {
      if (align_band >= 0) align_args.band_width = static_cast<std::size_t>(align_band);
      if (!align_report.empty()) align_args.report = align_report;
      if (align_workers > 0) global.workers = align_workers;
      return run_align(align_args, global);
    }
    if (score_cmd->parsed()) {
      if (!score_checkpoint.empty()) score_args.checkpoint = score_checkpoint;
      score_args.out = score_out;
      return run_score(score_args, global);
    }
    if (filter_cmd->parsed()) {
      filter_has_scorer = filter_scorer_opt->count() > 0;
      if (filter_has_scorer) {
        if (!filter_checkpoint.empty()) filter_score_args.checkpoint = filter_checkpoint;
        filter_args.score = filter_score_args;
      }
      if (filter_k >= 0) filter_args.k = static_cast<std::size_t>(filter_k);
      if (!filter_tune.empty()) filter_args.tune_k = parse_k_list(filter_tune);
      filter_args.higher_is_better = filter_order == "higher";
      if (!filter_report.empty()) filter_args.report = filter_report;
      return run_filter(filter_args, global);
    }
    if (dedup_cmd->parsed()) {
      if (!dedup_against_path.empty()) dedup_args.against = dedup_against_path;
      if (!dedup_policy.empty()) dedup_args.policy = parse_policy(dedup_policy);
      if (!dedup_report.empty()) dedup_args.report = dedup_report;
      return run_dedup(dedup_args, global);
    }
    if (eval_cmd->parsed()) {
      if (!eval_out.empty()) eval_args.out = eval_out;
      return run_eval_matrix(eval_args, global);
    }
    if (budget_cmd->parsed()) {
      if (!budget_supervised.empty()) budget_args.supervised_csv = budget_supervised;
      if (!budget_pretraining.empty()) budget_args.pretraining_csv = budget_pretraining;
      if (!budget_time.empty()) budget_args.time_csv = budget_time;
      if (!budget_out.empty()) budget_args.out = budget_out;
      return run_budget(budget_args, global);
    }
    if (pipeline_cmd->parsed()) return run_pipeline(pipeline_config, global);
  } catch (const std::exception& e) {
    log(LogLevel::error, stage, e.what());
    return 1;
  }
  return 0;
}
