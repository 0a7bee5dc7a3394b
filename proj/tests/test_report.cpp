#include <doctest.h>

#include "ccs/report.hpp"

TEST_CASE("variance report nulls unavailable estimators") {
  ccs::VarianceEstimates v;
  v.ht = {1.5, 1.0, 0.75, 0.25};
  const auto j = ccs::to_json(v);
  CHECK(j["v_ht"].get<double>() == 1.5);
  CHECK(j["v_ht_3"].get<double>() == 0.25);
  CHECK(j["v_yg"].is_null());
  CHECK(j["v_simp3"].is_null());
  const auto row = ccs::variance_csv_row(v);
  CHECK(row.size() == ccs::variance_csv_header().size());
  CHECK(row[4] == "NA");
}

TEST_CASE("csv quoting and sentinels") {
  CHECK(ccs::csv_line({"a", "b,c", "d\"e"}) == "a,\"b,c\",\"d\"\"e\"");
  CHECK(ccs::csv_number(std::nullopt) == "NA");
  CHECK(std::stod(ccs::csv_number(0.1)) == 0.1);
}

TEST_CASE("summary json layout") {
  ccs::ExperimentSpec spec;
  spec.dm = ccs::Design::simple_random(10, 2);
  spec.dd = ccs::Design::stratified({{4, 2}, {6, 1}});
  spec.label = "cell";
  ccs::SimulationSummary s;
  s.rb_mc[0] = 1.25;
  s.elapsed_ms = 3.0;
  const auto echo = ccs::spec_echo(spec);
  CHECK(echo["dd"] == "stsi(4:2,6:1)");
  CHECK(echo["ci_level"].is_null());
  const auto with = ccs::to_json(s, echo, true);
  const auto without = ccs::to_json(s, echo, false);
  CHECK(with.contains("elapsed_ms"));
  CHECK(!without.contains("elapsed_ms"));
  CHECK(with["rb_mc"]["v_ht"].get<double>() == 1.25);
  CHECK(with["rb_mc"]["v_yg"].is_null());
  CHECK(with["spec_echo"]["label"] == "cell");

  s.rb_mc[1] = -0.04;
  const auto ok = ccs::table_csv_row({spec, s, ""});
  CHECK(ok[6] == "1.2");
  CHECK(ok[7] == "0.0");
  CHECK(ok[8] == "NA");

  ccs::TableRow failed{spec, std::nullopt, "boom"};
  const auto row = ccs::table_csv_row(failed);
  CHECK(row.size() == ccs::table_csv_header().size());
  CHECK(row.back() == "error: boom");
}
