#include <doctest.h>

#include <json.hpp>

#include "helpers.hpp"

using namespace btk::testing;
using nlohmann::json;

namespace {

const std::string kFixtureJsonl =
    "{\"en\":\"one two\",\"vi\":\"một hai\",\"domain\":\"law\",\"tier\":1}\n"
    "{\"en\":\"three\",\"vi\":\"ba\",\"domain\":\"law\",\"tier\":2}\n"
    "{\"en\":\"four\",\"vi\":\"bốn\",\"domain\":\"news\",\"tier\":1}\n"
    "{\"en\":\"five\",\"vi\":\"năm\",\"domain\":\"news\",\"tier\":3}\n"
    "{\"en\":\"six\",\"vi\":\"sáu\",\"domain\":\"medical\",\"tier\":4}\n";

std::string q(const std::string& s) { return "'" + s + "'"; }

}  // namespace

TEST_CASE("stats subcommand prints a JSON report") {
  TempDir dir;
  write_file(dir.file("c.jsonl"), kFixtureJsonl);
  const auto result = run_command(cli_path() + " stats --in " + q(dir.file("c.jsonl")));
  REQUIRE(result.status == 0);
  const json j = json::parse(result.out);
  CHECK(j["total"] == 5);
  CHECK(j["per_domain"]["law"] == 2);
  CHECK(j["per_tier"]["1"] == 2);
}

TEST_CASE("unknown subcommands exit nonzero with usage text") {
  TempDir dir;
  const auto result =
      run_command(cli_path() + " frobnicate", dir.file("err.txt"));
  CHECK(result.status != 0);
  const std::string err = read_file(dir.file("err.txt"));
  CHECK(err.find("--help") != std::string::npos);
}

TEST_CASE("--version prints the tool name") {
  const auto result = run_command(cli_path() + " --version");
  CHECK(result.status == 0);
  CHECK(result.out.find("bitextkit") != std::string::npos);
}

TEST_CASE("errors are logged as JSON lines on stderr") {
  TempDir dir;
  const auto result = run_command(
      cli_path() + " stats --in " + q(dir.file("missing.jsonl")), dir.file("err.txt"));
  CHECK(result.status == 1);
  const std::string err = read_file(dir.file("err.txt"));
  const json line = json::parse(err.substr(0, err.find('\n')));
  CHECK(line["level"] == "error");
  CHECK(line["stage"] == "stats");
  CHECK(line["msg"].get<std::string>().find("missing.jsonl") != std::string::npos);
}

TEST_CASE("bleu subcommand reports a breakdown") {
  TempDir dir;
  write_file(dir.file("hyp.txt"), "xin chào thế giới\nmột hai ba\n");
  write_file(dir.file("ref.txt"), "xin chào thế giới\nmột hai ba\n");
  const auto result = run_command(cli_path() + " bleu --hyp " + q(dir.file("hyp.txt")) +
                                  " --ref " + q(dir.file("ref.txt")));
  REQUIRE(result.status == 0);
  const json j = json::parse(result.out);
  CHECK(j["score"].get<double>() == doctest::Approx(100.0));
  CHECK(j["precisions"].size() == 4);
  CHECK(j["brevity_penalty"] == 1.0);

  const auto lc = run_command(cli_path() + " bleu --hyp " + q(dir.file("hyp.txt")) + " --ref " +
                              q(dir.file("ref.txt")) + " --max-n 2 --lc --smoothing none");
  REQUIRE(lc.status == 0);
  CHECK(json::parse(lc.out)["precisions"].size() == 2);
}

TEST_CASE("ingest, dedup, score and filter subcommands compose like the pipeline") {
  TempDir dir;
  // raw TSV with one duplicate pair
  write_file(dir.file("raw.tsv"),
             "en\tvi\nalpha beta\tmột hai\nalpha beta\tmột hai\ngamma\tba\ndelta\tbốn\n");
  write_file(dir.file("lex.tsv"),
             "alpha\tmột\nbeta\thai\ngamma\tba\ndelta\tkhác\n");

  const std::string manual = dir.file("manual");
  const std::string piped = dir.file("piped");
  std::filesystem::create_directories(manual);
  std::filesystem::create_directories(piped);

  // manual stage-by-stage run
  auto run_ok = [&](const std::string& cmd) {
    const auto result = run_command(cmd);
    CAPTURE(cmd);
    REQUIRE(result.status == 0);
  };
  run_ok(cli_path() + " ingest --in " + q(dir.file("raw.tsv")) + " --format tsv --domain wiki" +
         " --tier 2 --out " + q(manual + "/a.jsonl"));
  run_ok(cli_path() + " dedup --in " + q(manual + "/a.jsonl") + " --out " + q(manual + "/b.jsonl") +
         " --report " + q(manual + "/dedup.json"));
  run_ok(cli_path() + " score --in " + q(manual + "/b.jsonl") + " --scorer roundtrip" +
         " --backend lexicon --lexicon " + q(dir.file("lex.tsv")) + " --out " +
         q(manual + "/c.jsonl"));
  run_ok(cli_path() + " filter --in " + q(manual + "/c.jsonl") + " --k 2 --out " +
         q(manual + "/d.jsonl") + " --report " + q(manual + "/filter.json"));

  // the same chain through the pipeline subcommand
  json config;
  config["workers"] = 2;
  config["stages"] = json::array(
      {{{"stage", "ingest"},
        {"in", dir.file("raw.tsv")},
        {"format", "tsv"},
        {"domain", "wiki"},
        {"tier", 2},
        {"out", piped + "/a.jsonl"}},
       {{"stage", "dedup"}, {"in", piped + "/a.jsonl"}, {"out", piped + "/b.jsonl"},
        {"report", piped + "/dedup.json"}},
       {{"stage", "score"},
        {"in", piped + "/b.jsonl"},
        {"scorer", "roundtrip"},
        {"backend", {{"kind", "lexicon"}, {"lexicon", dir.file("lex.tsv")}}},
        {"out", piped + "/c.jsonl"}},
       {{"stage", "filter"}, {"in", piped + "/c.jsonl"}, {"k", 2}, {"out", piped + "/d.jsonl"},
        {"report", piped + "/filter.json"}}});
  write_file(dir.file("pipeline.json"), config.dump());
  run_ok(cli_path() + " pipeline --config " + q(dir.file("pipeline.json")));

  for (const std::string name : {"a.jsonl", "b.jsonl", "c.jsonl", "d.jsonl"}) {
    CAPTURE(name);
    CHECK(read_file(manual + "/" + name) == read_file(piped + "/" + name));
  }
  const json dedup_report = json::parse(read_file(manual + "/dedup.json"));
  CHECK(dedup_report["input"] == 4);
  CHECK(dedup_report["removed_duplicates"] == 1);
  const json filtered = json::parse(read_file(manual + "/filter.json"));
  CHECK(filtered["k"] == 2);

  // filter on unscored input without a scorer is a clear error
  const auto bad = run_command(cli_path() + " filter --in " + q(manual + "/b.jsonl") +
                               " --k 1 --out " + q(manual + "/x.jsonl"));
  CHECK(bad.status == 1);
}

TEST_CASE("filter can score inline and tune k via an external evaluator") {
  TempDir dir;
  write_file(dir.file("c.jsonl"),
             "{\"en\":\"cat sat\",\"vi\":\"mèo ngồi\"}\n"
             "{\"en\":\"cat cat\",\"vi\":\"xa la\"}\n"
             "{\"en\":\"sat sat\",\"vi\":\"ngồi ngồi\"}\n");
  write_file(dir.file("lex.tsv"), "cat\tmèo\nsat\tngồi\n");

  const auto inline_scored = run_command(
      cli_path() + " filter --in " + q(dir.file("c.jsonl")) +
      " --scorer roundtrip --backend lexicon --lexicon " + q(dir.file("lex.tsv")) +
      " --k 2 --out " + q(dir.file("best.jsonl")) + " --report " + q(dir.file("r.json")));
  REQUIRE(inline_scored.status == 0);
  const std::string best = read_file(dir.file("best.jsonl"));
  CHECK(best.find("mèo ngồi") != std::string::npos);
  CHECK(best.find("xa la") == std::string::npos);  // the unscorable pair loses
  CHECK(json::parse(read_file(dir.file("r.json")))["higher_is_better"] == true);

  // evaluator prints -(lines - 2)^2, so k = 2 must win the sweep
  write_file(dir.file("eval.sh"),
             "#!/bin/sh\nn=$(wc -l < \"$1\")\nd=$((n - 2))\necho $((-d * d))\n");
  std::filesystem::permissions(dir.file("eval.sh"), std::filesystem::perms::owner_all);
  const auto tuned = run_command(
      cli_path() + " filter --in " + q(dir.file("best.jsonl")) + " --tune-k 1,2 --evaluator " +
      q(dir.file("eval.sh")) + " --out " + q(dir.file("tuned.jsonl")) + " --report " +
      q(dir.file("tune.json")));
  REQUIRE(tuned.status == 0);
  const json report = json::parse(read_file(dir.file("tune.json")));
  CHECK(report["chosen_k"] == 2);
  CHECK(report["metric_per_k"][0] == -1);
  CHECK(report["metric_per_k"][1] == 0);

  // a remote scorer ranks losses low-first even when stored scores make
  // re-scoring unnecessary (no endpoint is contacted here)
  write_file(dir.file("scored.jsonl"),
             "{\"en\":\"a\",\"vi\":\"x\",\"score\":9.0}\n"
             "{\"en\":\"b\",\"vi\":\"y\",\"score\":1.0}\n");
  const auto loss_ordered = run_command(
      cli_path() + " filter --in " + q(dir.file("scored.jsonl")) +
      " --scorer remote --endpoint http://unused:1 --k 1 --out " + q(dir.file("low.jsonl")));
  REQUIRE(loss_ordered.status == 0);
  CHECK(read_file(dir.file("low.jsonl")).find("\"b\"") != std::string::npos);
}

TEST_CASE("align subcommand emits tier-3 pairs and a report, deterministically") {
  TempDir dir;
  write_file(dir.file("lex.tsv"), "one\tmột\ntwo\thai\nthree\tba\nfour\tbốn\n");
  write_file(dir.file("d0.en"), "one two\nzz qq ww\ntwo three\nthree four\n");
  write_file(dir.file("d0.vi"), "một hai\nhai ba\nba bốn\n");
  write_file(dir.file("d1.en"), "four four\none one\n");
  write_file(dir.file("d1.vi"), "bốn bốn\nmột một\n");
  write_file(dir.file("manifest.tsv"),
             dir.file("d0.en") + "\t" + dir.file("d0.vi") + "\n" + dir.file("d1.en") + "\t" +
                 dir.file("d1.vi") + "\n");

  auto align_cmd = [&](const std::string& suffix, int workers) {
    return cli_path() + " --workers " + std::to_string(workers) + " align --pairs " +
           q(dir.file("manifest.tsv")) + " --backend lexicon --lexicon " + q(dir.file("lex.tsv")) +
           " --domain news --out " + q(dir.file("out" + suffix + ".jsonl")) + " --report " +
           q(dir.file("report" + suffix + ".json"));
  };
  REQUIRE(run_command(align_cmd("_w1", 1)).status == 0);
  REQUIRE(run_command(align_cmd("_w4", 4)).status == 0);
  CHECK(read_file(dir.file("out_w1.jsonl")) == read_file(dir.file("out_w4.jsonl")));

  const std::string out = read_file(dir.file("out_w1.jsonl"));
  REQUIRE_FALSE(out.empty());
  std::size_t lines = 0;
  for (char c : out) lines += c == '\n';
  CHECK(lines == 5);  // noise line skipped
  const json first = json::parse(out.substr(0, out.find('\n')));
  CHECK(first["tier"] == 3);
  CHECK(first["domain"] == "news");
  CHECK(first["en"] == "one two");
  CHECK(first["vi"] == "một hai");
  CHECK(first["score"].get<double>() > 10.0);

  const json report = json::parse(read_file(dir.file("report_w1.json")));
  CHECK(report["documents"] == 2);
  CHECK(report["failed"] == 0);
  CHECK(report["per_document"].size() == 2);
  // pre-warmed translations: at most M + N backend sentences per document
  CHECK(report["backend_sentences"].get<int>() <= 4 + 3 + 2 + 2);
}

TEST_CASE("sample-test subcommand is seed-reproducible") {
  TempDir dir;
  write_file(dir.file("c.jsonl"), kFixtureJsonl);
  auto cmd = [&](const std::string& suffix, unsigned seed) {
    return cli_path() + " --seed " + std::to_string(seed) + " sample-test --in " +
           q(dir.file("c.jsonl")) + " --per-domain law=1,news=1 --test " +
           q(dir.file("test" + suffix + ".jsonl")) + " --remainder " +
           q(dir.file("rem" + suffix + ".jsonl"));
  };
  REQUIRE(run_command(cmd("_a", 7)).status == 0);
  REQUIRE(run_command(cmd("_b", 7)).status == 0);
  CHECK(read_file(dir.file("test_a.jsonl")) == read_file(dir.file("test_b.jsonl")));
  CHECK(read_file(dir.file("rem_a.jsonl")) == read_file(dir.file("rem_b.jsonl")));
  std::size_t lines = 0;
  for (char c : read_file(dir.file("test_a.jsonl"))) lines += c == '\n';
  CHECK(lines == 2);
}

TEST_CASE("eval-matrix and budget subcommands render and export") {
  TempDir dir;
  json manifest;
  manifest["columns"] =
      json::array({{{"direction", "en-vi"}, {"domain", "law"}},
                   {{"direction", "vi-en"}, {"domain", "law"}}});
  manifest["systems"]["Multi-domain"] = {{"en-vi/law", 22.07}, {"vi-en/law", 20.45}};
  write_file(dir.file("manifest.json"), manifest.dump());
  const auto result = run_command(cli_path() + " eval-matrix --manifest " +
                                  q(dir.file("manifest.json")) + " --out " +
                                  q(dir.file("matrix.json")));
  REQUIRE(result.status == 0);
  CHECK(result.out.find("22.07") != std::string::npos);
  CHECK(json::parse(read_file(dir.file("matrix.json")))["systems"]["Multi-domain"]["en-vi/law"]
            ["bleu"] == 22.07);

  write_file(dir.file("s.csv"), "1,20\n10,34\n");
  write_file(dir.file("p.csv"), "1,20\n10000,34\n");
  write_file(dir.file("t.csv"), "1,10,5,1000\n2,1,20,2000\n");
  const auto budget = run_command(cli_path() + " budget --supervised " + q(dir.file("s.csv")) +
                                  " --pretraining " + q(dir.file("p.csv")) +
                                  " --target 34 --time-csv " + q(dir.file("t.csv")) + " --out " +
                                  q(dir.file("budget.json")));
  REQUIRE(budget.status == 0);
  CHECK(budget.out.find("1000") != std::string::npos);
  const json out = json::parse(read_file(dir.file("budget.json")));
  CHECK(out["budget"]["data_ratio"].get<double>() == doctest::Approx(1000.0));
  CHECK(out["time"]["tiers"].size() == 2);
}

TEST_CASE("dedup --against and --policy flags work through the CLI") {
  TempDir dir;
  write_file(dir.file("a.jsonl"),
             "{\"en\":\"One\",\"vi\":\"Một\"}\n{\"en\":\"two\",\"vi\":\"hai\"}\n");
  write_file(dir.file("b.jsonl"), "{\"en\":\"one\",\"vi\":\"một\"}\n");
  const auto result = run_command(cli_path() + " dedup --in " + q(dir.file("a.jsonl")) +
                                  " --against " + q(dir.file("b.jsonl")) + " --out " +
                                  q(dir.file("out.jsonl")) + " --report " +
                                  q(dir.file("r.json")));
  REQUIRE(result.status == 0);
  const json report = json::parse(read_file(dir.file("r.json")));
  CHECK(report["removed_overlap"] == 1);
  CHECK(report["kept"] == 1);

  // without casefolding the overlap disappears
  const auto raw = run_command(cli_path() + " dedup --in " + q(dir.file("a.jsonl")) +
                               " --against " + q(dir.file("b.jsonl")) + " --policy nfc,ws" +
                               " --out " + q(dir.file("out2.jsonl")) + " --report " +
                               q(dir.file("r2.json")));
  REQUIRE(raw.status == 0);
  CHECK(json::parse(read_file(dir.file("r2.json")))["removed_overlap"] == 0);
}
