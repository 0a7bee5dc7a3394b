#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "ccs/design.hpp"
#include "oracles.hpp"

using ccs::Design;

TEST_CASE("first-order inclusion probabilities") {
  CHECK(Design::simple_random(4, 2).pi1(3) == doctest::Approx(0.5));
  const Design stsi = Design::stratified({{108, 21}, {108, 41}, {109, 55}, {108, 80}, {111, 90}});
  CHECK(stsi.pi1(0) == doctest::Approx(21.0 / 108.0));
  CHECK(stsi.pi1(107) == doctest::Approx(21.0 / 108.0));
  CHECK(stsi.pi1(108) == doctest::Approx(41.0 / 108.0));
  const Design po = Design::poisson({0.1, 0.7, 0.4});
  CHECK(po.pi1(1) == 0.7);
  CHECK_THROWS_AS(po.pi1(3), std::out_of_range);
}

TEST_CASE("second-order probabilities match enumeration") {
  const Design si = Design::simple_random(4, 2);
  CHECK(oracle::joint_by_enumeration(si, 0, 1) == doctest::Approx(1.0 / 6.0));
  CHECK(si.pi2(0, 1) == doctest::Approx(1.0 / 6.0));
  CHECK(si.delta(0, 1) == doctest::Approx(-1.0 / 12.0));
  CHECK(si.pi2(2, 2) == si.pi1(2));

  const Design stsi = Design::stratified({{3, 2}, {2, 1}});
  const Design po = Design::poisson({0.2, 0.5, 0.9});
  for (const Design* d : {&si, &stsi, &po}) {
    for (std::size_t i = 0; i < d->population_size(); ++i)
      for (std::size_t j = 0; j < d->population_size(); ++j) {
        CHECK(d->pi2(i, j) == doctest::Approx(oracle::joint_by_enumeration(*d, i, j)).epsilon(1e-12));
        CHECK(d->pi2(i, j) == d->pi2(j, i));
      }
  }
  // Cross-stratum pairs are independent.
  CHECK(stsi.pi2(0, 4) == doctest::Approx(stsi.pi1(0) * stsi.pi1(4)));
  CHECK(po.delta(0, 2) == 0.0);
}

TEST_CASE("census design has zero covariance") {
  const Design census = Design::simple_random(5, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(census.delta(i, j) == 0.0);
}

TEST_CASE("classical fixed-size identities") {
  for (const Design& d : {Design::simple_random(7, 3), Design::stratified({{4, 2}, {3, 3}, {5, 1}})}) {
    const std::size_t n = d.population_size();
    double sum_pi = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum_pi += d.pi1(i);
    CHECK(sum_pi == doctest::Approx(d.expected_size()));
    for (std::size_t i = 0; i < n; ++i) {
      double off = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) off += d.delta(i, j);
      CHECK(off == doctest::Approx(-d.delta(i, i)).epsilon(1e-12));
    }
  }
  CHECK(Design::simple_random(7, 3).expected_size() == doctest::Approx(3.0));
}

TEST_CASE("enumeration") {
  const auto si = Design::simple_random(4, 2).enumerate();
  CHECK(si.size() == 6);
  for (const auto& s : si) CHECK(s.probability == doctest::Approx(1.0 / 6.0));

  const auto po = Design::poisson({0.5, 0.5, 0.5}).enumerate();
  CHECK(po.size() == 8);
  for (const auto& s : po) CHECK(s.probability == doctest::Approx(0.125));

  const auto st = Design::stratified({{2, 1}, {2, 1}}).enumerate();
  CHECK(st.size() == 4);
  double total = 0.0;
  for (const auto& s : st) {
    CHECK(s.probability == doctest::Approx(0.25));
    total += s.probability;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(Design::simple_random(60, 30).enumerate(), std::length_error);
  CHECK_THROWS_AS(Design::poisson(std::vector<double>(30, 0.5)).enumerate(), std::length_error);
}

TEST_CASE("draws") {
  ccs::RandomStream stream(11);
  const Design census = Design::simple_random(6, 6);
  CHECK(census.draw(stream) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(Design::poisson(std::vector<double>(10, 0.0)).draw(stream).empty());

  const Design stsi = Design::stratified({{5, 2}, {4, 3}});
  for (int t = 0; t < 100; ++t) {
    const auto s = stsi.draw(stream);
    REQUIRE(s.size() == 5);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::count_if(s.begin(), s.end(), [](std::size_t u) { return u < 5; }) == 2);
  }
}

TEST_CASE("SI draws are uniform over subsets") {
  const Design si = Design::simple_random(4, 2);
  ccs::RandomStream stream(2024);
  std::map<std::vector<std::size_t>, int> freq;
  const int draws = 60000;
  for (int t = 0; t < draws; ++t) ++freq[si.draw(stream)];
  REQUIRE(freq.size() == 6);
  double chi2 = 0.0;
  for (const auto& [sub, count] : freq) {
    CHECK(static_cast<double>(count) / draws == doctest::Approx(1.0 / 6.0).epsilon(0.06));
    const double expected = draws / 6.0;
    chi2 += (count - expected) * (count - expected) / expected;
  }
  // 5 degrees of freedom; 20.5 is the 0.999 quantile.
  CHECK(chi2 < 20.5);
}

TEST_CASE("Poisson draws follow the enumerated distribution") {
  const Design po = Design::poisson({0.2, 0.5, 0.9});
  ccs::RandomStream stream(5);
  std::map<std::vector<std::size_t>, int> freq;
  const int draws = 40000;
  for (int t = 0; t < draws; ++t) ++freq[po.draw(stream)];
  double chi2 = 0.0;
  for (const auto& s : po.enumerate()) {
    const double expected = draws * s.probability;
    const double observed = freq[s.units];
    chi2 += (observed - expected) * (observed - expected) / expected;
  }
  CHECK(chi2 < 24.3);  // 7 dof, 0.999 quantile
}

TEST_CASE("Sen-Yates-Grundy conditions") {
  CHECK(Design::simple_random(10, 3).syg_condition_holds());
  CHECK(Design::poisson({0.3, 0.6}).syg_condition_holds());
  const Design elfe_m = Design::stratified({{108, 21}, {108, 41}, {109, 55}, {108, 80}, {111, 90}});
  const Design elfe_d = Design::stratified({{91, 4}, {91, 6}, {91, 7}, {92, 8}});
  CHECK(elfe_m.syg_condition_holds());
  CHECK(elfe_d.syg_condition_holds());
  // Direct scan of every pair agrees with the per-stratum shortcut.
  for (const Design* d : {&elfe_m, &elfe_d}) {
    bool all = true;
    for (std::size_t i = 0; i < d->population_size(); ++i)
      for (std::size_t j = i + 1; j < d->population_size(); ++j) all &= d->delta(i, j) <= 0.0;
    CHECK(all);
  }
}

TEST_CASE("structured kernels equal the accessor matrices") {
  for (const Design& d : {Design::simple_random(5, 2), Design::stratified({{3, 2}, {1, 1}, {4, 1}}),
                          Design::poisson({0.1, 0.4, 0.8, 1.0})}) {
    const std::size_t n = d.population_size();
    const auto joint = d.joint_kernel(), delta = d.delta_kernel(), ratio = d.offdiagonal_joint_ratio_kernel();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(joint.at(i, j) == doctest::Approx(d.pi2(i, j)).epsilon(1e-12));
        CHECK(delta.at(i, j) == doctest::Approx(d.delta(i, j)).epsilon(1e-12));
        const double expected = i == j ? 0.0 : d.pi2(i, j) / (d.pi1(i) * d.pi1(j));
        CHECK(ratio.at(i, j) == doctest::Approx(expected).epsilon(1e-12));
      }
  }
}

TEST_CASE("design grammar") {
  CHECK(ccs::parse_design("si(n=25)", 100).describe() == "si(n=25)");
  CHECK(ccs::parse_design(" SI( n = 3 ) ", 5).pi1(0) == doctest::Approx(0.6));
  const Design st = ccs::parse_design("stsi(108:21,108:41,109:55,108:80,111:90)", 544);
  CHECK(st.kind() == ccs::DesignKind::kStratified);
  CHECK(st.expected_size() == doctest::Approx(287.0));
  CHECK(st.describe() == "stsi(108:21,108:41,109:55,108:80,111:90)");
  CHECK(ccs::parse_design("stsi(91:4,91:6,91:7,92:8)", 365).expected_size() == doctest::Approx(25.0));
  const Design po = ccs::parse_design("poisson(p=0.1)", 10);
  CHECK(!po.fixed_size());
  CHECK(po.expected_size() == doctest::Approx(1.0));

  const char* path = "design_test_probs.csv";
  {
    std::ofstream out(path);
    out << "0.1\n0.2,0.3\n";
  }
  const Design pf = ccs::parse_design(std::string("poisson(file=") + path + ")", 3);
  CHECK(pf.pi1(2) == doctest::Approx(0.3));
  CHECK_THROWS_AS(ccs::parse_design(std::string("poisson(file=") + path + ")", 4), ccs::DesignParseError);
  std::remove(path);

  try {
    ccs::parse_design("si(n=2000)", 1000);
    FAIL("expected a parse error");
  } catch (const ccs::DesignParseError& e) {
    CHECK(e.position() == 5);
  }
  try {
    ccs::parse_design("stsi(3:2;4:1)", 3);
    FAIL("expected a parse error");
  } catch (const ccs::DesignParseError& e) {
    CHECK(e.position() == 8);
  }
  CHECK_THROWS_AS(ccs::parse_design("stsi(3:2,4:1)", 8), ccs::DesignParseError);
  CHECK_THROWS_AS(ccs::parse_design("srs(n=2)", 8), ccs::DesignParseError);
  CHECK_THROWS_AS(ccs::parse_design("si(n=2) x", 8), ccs::DesignParseError);
  CHECK_THROWS_AS(ccs::parse_design("poisson(p=1.5)", 8), ccs::DesignParseError);
  CHECK_THROWS_AS(ccs::parse_design("stsi(3:4)", 3), ccs::DesignParseError);
}
