#include <doctest.h>

#include <cmath>

#include "btk/report.hpp"
#include "helpers.hpp"

using namespace btk;
using namespace btk::testing;

namespace {

nlohmann::ordered_json basic_columns(const std::string& law_ref, const std::string& rel_ref) {
  return nlohmann::ordered_json::array(
      {{{"direction", "en-vi"}, {"domain", "law"}, {"ref", law_ref}},
       {{"direction", "en-vi"}, {"domain", "religion"}, {"ref", rel_ref}}});
}

BudgetCurve curve(std::vector<CurvePoint> points, const std::string& label) {
  BudgetCurve c;
  c.points = std::move(points);
  c.label = label;
  c.validate();
  return c;
}

}  // namespace

TEST_CASE("identical hypothesis and reference files score 100 in every cell") {
  TempDir dir;
  write_file(dir.file("law.vi"), "một hai ba\nbốn năm\n");
  write_file(dir.file("rel.vi"), "kinh thánh\n");
  nlohmann::ordered_json manifest;
  manifest["columns"] = basic_columns(dir.file("law.vi"), dir.file("rel.vi"));
  manifest["systems"]["self"] = {{"en-vi/law", dir.file("law.vi")},
                                 {"en-vi/religion", dir.file("rel.vi")}};
  const EvalMatrix matrix = evaluate_matrix(MatrixSpec::from_json(manifest), {});
  REQUIRE(matrix.rows.size() == 1);
  REQUIRE(matrix.columns.size() == 2);
  CHECK(matrix.cells[0][0].value == doctest::Approx(100.0));
  CHECK(matrix.cells[0][1].value == doctest::Approx(100.0));
  CHECK(matrix.cells[0][0].display == "100.00");
}

TEST_CASE("precomputed cells render verbatim") {
  nlohmann::ordered_json manifest;
  manifest["columns"] = nlohmann::ordered_json::array(
      {{{"direction", "en-vi"}, {"domain", "law"}},
       {{"direction", "en-vi"}, {"domain", "religion"}},
       {{"direction", "vi-en"}, {"domain", "law"}},
       {{"direction", "en-vi"}, {"domain", "medical"}}});
  manifest["systems"]["Multi-domain"] = {{"en-vi/law", 22.07},
                                         {"en-vi/religion", 34.77},
                                         {"vi-en/law", 20.45},
                                         {"en-vi/medical", "14.035"}};
  const EvalMatrix matrix = evaluate_matrix(MatrixSpec::from_json(manifest), {});
  const std::string text = matrix.render_text();
  CHECK(text.find("22.07") != std::string::npos);
  CHECK(text.find("34.77") != std::string::npos);
  CHECK(text.find("20.45") != std::string::npos);
  CHECK(text.find("14.035") != std::string::npos);  // input precision preserved
  CHECK(matrix.cells[0][0].value == doctest::Approx(22.07));
  const auto j = matrix.to_json();
  CHECK(j["systems"]["Multi-domain"]["en-vi/law"]["bleu"] == 22.07);
  CHECK(j["systems"]["Multi-domain"]["en-vi/medical"]["display"] == "14.035");
}

TEST_CASE("changing one hypothesis file changes exactly one cell") {
  TempDir dir;
  write_file(dir.file("law.vi"), "một hai ba\n");
  write_file(dir.file("rel.vi"), "kinh thánh một\n");
  write_file(dir.file("hyp_law.vi"), "một hai ba\n");
  write_file(dir.file("hyp_rel.vi"), "kinh thánh một\n");
  nlohmann::ordered_json manifest;
  manifest["columns"] = basic_columns(dir.file("law.vi"), dir.file("rel.vi"));
  manifest["systems"]["sys"] = {{"en-vi/law", dir.file("hyp_law.vi")},
                                {"en-vi/religion", dir.file("hyp_rel.vi")}};
  const EvalMatrix before = evaluate_matrix(MatrixSpec::from_json(manifest), {});
  write_file(dir.file("hyp_rel.vi"), "hoàn toàn khác hẳn\n");
  const EvalMatrix after = evaluate_matrix(MatrixSpec::from_json(manifest), {});
  CHECK(after.cells[0][0].value == before.cells[0][0].value);
  CHECK(after.cells[0][1].value != before.cells[0][1].value);
  CHECK(after.cells[0][1].value == doctest::Approx(0.0));
}

TEST_CASE("matrix errors name the offending cell") {
  TempDir dir;
  write_file(dir.file("ref.vi"), "a\nb\n");
  write_file(dir.file("hyp.vi"), "a\n");
  nlohmann::ordered_json manifest;
  manifest["columns"] = nlohmann::ordered_json::array(
      {{{"direction", "en-vi"}, {"domain", "law"}, {"ref", dir.file("ref.vi")}}});
  manifest["systems"]["sys"] = {{"en-vi/law", dir.file("hyp.vi")}};
  try {
    evaluate_matrix(MatrixSpec::from_json(manifest), {});
    FAIL("expected ReportError");
  } catch (const ReportError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sys") != std::string::npos);
    CHECK(msg.find("en-vi/law") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }

  manifest["systems"]["sys"]["en-vi/law"] = dir.file("missing.vi");
  CHECK_THROWS_AS(evaluate_matrix(MatrixSpec::from_json(manifest), {}), ReportError);

  nlohmann::ordered_json incomplete;
  incomplete["columns"] = manifest["columns"];
  incomplete["systems"]["sys"] = nlohmann::ordered_json::object();
  CHECK_THROWS_AS(MatrixSpec::from_json(incomplete), ReportError);
}

TEST_CASE("budget ratio on curves crossing at 10 vs 10000 units is 1000") {
  const BudgetCurve supervised = curve({{1, 20}, {10, 34}}, "supervised");
  const BudgetCurve pretraining = curve({{1, 20}, {10000, 34}}, "pretraining");
  const BudgetReport report = budget_ratio(supervised, pretraining, 34.0);
  CHECK(report.supervised.reachable);
  CHECK(report.pretraining.reachable);
  CHECK(report.data_ratio == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(report.ratio_exact);
}

TEST_CASE("budget ratio of identical curves is exactly 1") {
  const BudgetCurve a = curve({{2, 10}, {20, 30}, {200, 40}}, "a");
  const BudgetCurve b = curve({{2, 10}, {20, 30}, {200, 40}}, "b");
  for (double target : {12.0, 30.0, 35.0}) {
    const BudgetReport report = budget_ratio(a, b, target);
    CHECK(report.data_ratio == 1.0);
  }
}

TEST_CASE("log-space interpolation lands between the bracketing points") {
  const BudgetCurve c = curve({{1, 30}, {100, 38}}, "c");
  const CurveCrossing crossing = find_crossing(c, 34.0);
  CHECK(crossing.reachable);
  // halfway in BLEU -> halfway in log-data: 10^1 = 10
  CHECK(crossing.data_amount == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(crossing.data_amount > 1.0);
  CHECK(crossing.data_amount < 100.0);
}

TEST_CASE("a plateauing curve reports a lower bound") {
  const BudgetCurve supervised = curve({{1, 20}, {10, 34}}, "supervised");
  const BudgetCurve plateau = curve({{1, 20}, {10000, 30}}, "pretraining");
  const BudgetReport report = budget_ratio(supervised, plateau, 34.0);
  CHECK_FALSE(report.pretraining.reachable);
  CHECK(report.pretraining.data_amount == 10000.0);  // curve maximum
  CHECK(report.data_ratio == doctest::Approx(1000.0));
  CHECK_FALSE(report.ratio_exact);
  CHECK(report.to_json()["data_ratio_is_bound"] == true);
}

TEST_CASE("budget ratio is scale-covariant") {
  const BudgetCurve supervised = curve({{1, 20}, {50, 40}}, "s");
  for (double c : {2.0, 10.0, 0.5}) {
    BudgetCurve scaled = supervised;
    scaled.label = "scaled";
    for (CurvePoint& p : scaled.points) p.data_amount *= c;
    const BudgetReport report = budget_ratio(supervised, scaled, 33.0);
    CHECK(report.data_ratio == doctest::Approx(c).epsilon(1e-9));
  }
}

TEST_CASE("non-monotone curves use the first crossing") {
  const BudgetCurve wiggly = curve({{1, 10}, {10, 35}, {100, 20}, {1000, 40}}, "w");
  const CurveCrossing crossing = find_crossing(wiggly, 30.0);
  CHECK(crossing.reachable);
  CHECK(crossing.data_amount == doctest::Approx(std::pow(10.0, 0.8)).epsilon(1e-9));
}

TEST_CASE("target below both first points is an error") {
  const BudgetCurve a = curve({{1, 20}, {10, 34}}, "a");
  const BudgetCurve b = curve({{1, 25}, {10, 30}}, "b");
  CHECK_THROWS_AS(budget_ratio(a, b, 15.0), ReportError);
  // below only one first point: the clamped curve uses its first amount
  const BudgetReport report = budget_ratio(a, b, 22.0);
  CHECK(report.pretraining.clamped_at_start);
  CHECK(report.pretraining.data_amount == 1.0);
}

TEST_CASE("wall-time ratio appears only when both curves carry times") {
  const BudgetCurve timed_s = curve({{1, 20, 1.0}, {10, 34, 5.0}}, "s");
  const BudgetCurve timed_p = curve({{1, 20, 2.0}, {10000, 34, 10000.0}}, "p");
  const BudgetReport with_time = budget_ratio(timed_s, timed_p, 34.0);
  REQUIRE(with_time.wall_time_ratio.has_value());
  CHECK(*with_time.wall_time_ratio == doctest::Approx(2000.0).epsilon(1e-9));

  const BudgetCurve untimed = curve({{1, 20}, {10000, 34}}, "p");
  const BudgetReport without = budget_ratio(timed_s, untimed, 34.0);
  CHECK_FALSE(without.wall_time_ratio.has_value());
}

TEST_CASE("curve validation rejects malformed input") {
  BudgetCurve c;
  c.label = "bad";
  c.points = {{1, 10}};
  CHECK_THROWS_AS(c.validate(), ReportError);
  c.points = {{1, 10}, {1, 20}};
  CHECK_THROWS_AS(c.validate(), ReportError);
  c.points = {{-1, 10}, {5, 20}};
  CHECK_THROWS_AS(c.validate(), ReportError);
}

TEST_CASE("curve CSV loads with or without a header") {
  TempDir dir;
  write_file(dir.file("c.csv"), "data_amount,bleu,wall_hours\n1,20,1.5\n10,34,6\n");
  const BudgetCurve c = BudgetCurve::load_csv(dir.file("c.csv"), "c");
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[1].data_amount == 10.0);
  CHECK(*c.points[1].wall_hours == 6.0);
  write_file(dir.file("n.csv"), "1,20\n10,34\n");
  CHECK(BudgetCurve::load_csv(dir.file("n.csv"), "n").points.size() == 2);
  CHECK_FALSE(BudgetCurve::load_csv(dir.file("n.csv"), "n").has_wall_hours());
}

TEST_CASE("time report aggregates per tier") {
  SUBCASE("one record per tier") {
    const TimeReport report = time_report({{1, 10, 5, 1000}, {2, 1, 20, 2000},
                                           {3, 2, 30, 3000}, {4, 100, 4, 4000}});
    REQUIRE(report.tiers.size() == 4);
    CHECK(report.tiers[0].tier == 1);
    CHECK(report.tiers[0].pairs == 1000);
    CHECK(report.tiers[0].pairs_per_hour == doctest::Approx(1000.0 / 15.0));
    CHECK(report.render_text().find("pairs_per_hour") != std::string::npos);
  }
  SUBCASE("empty input") {
    const TimeReport report = time_report({});
    CHECK(report.tiers.empty());
  }
  SUBCASE("same tier sums") {
    const TimeReport report = time_report({{2, 1, 2, 100}, {2, 3, 4, 200}});
    REQUIRE(report.tiers.size() == 1);
    CHECK(report.tiers[0].human_hours == 4.0);
    CHECK(report.tiers[0].machine_hours == 6.0);
    CHECK(report.tiers[0].pairs == 300);
  }
}

TEST_CASE("tier CSV parses with header sniffing") {
  TempDir dir;
  write_file(dir.file("t.csv"), "tier,human_hours,machine_hours,pairs\n1,10,5,1000\n2,0,1,50\n");
  const auto records = load_tier_records_csv(dir.file("t.csv"));
  REQUIRE(records.size() == 2);
  CHECK(records[0].tier == 1);
  CHECK(records[1].pairs_collected == 50);
}
