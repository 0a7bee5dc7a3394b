#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ccs/exact_variance.hpp"
#include "ccs/montecarlo.hpp"
#include "ccs/population_model.hpp"
#include "ccs/report.hpp"
#include "oracles.hpp"

using ccs::Design;

namespace {

std::shared_ptr<const ccs::PopulationGrid> shared(ccs::Grid g) {
  return std::make_shared<const ccs::PopulationGrid>(ccs::PopulationGrid{std::move(g), "test"});
}

std::shared_ptr<const ccs::PopulationGrid> model_pop(double sm, double sd, std::size_t n, std::uint64_t seed) {
  ccs::ModelParams p;
  p.mu = 200;
  p.sigma_m = sm;
  p.sigma_d = sd;
  p.sigma_e = 5;
  p.n_rows = p.n_cols = n;
  p.seed = seed;
  return std::make_shared<const ccs::PopulationGrid>(ccs::generate_grid(p));
}

ccs::ExperimentSpec basic_spec(std::shared_ptr<const ccs::PopulationGrid> y, std::size_t n, std::size_t reps) {
  ccs::ExperimentSpec spec;
  spec.y = y;
  spec.dm = Design::simple_random(y->n_rows(), n);
  spec.dd = Design::simple_random(y->n_cols(), n);
  spec.reps = reps;
  spec.truth_reps = 2000;
  spec.seed = 7;
  return spec;
}

}  // namespace

TEST_CASE("census with one replication") {
  std::mt19937_64 rng(61);
  auto spec = basic_spec(shared(oracle::random_grid(4, 5, rng)), 1, 1);
  spec.dm = Design::simple_random(4, 4);
  spec.dd = Design::simple_random(5, 5);
  spec.truth = ccs::TruthMode::kExact;
  const auto s = ccs::run_experiment(spec, {1});
  CHECK(s.mean_estimate == doctest::Approx(s.parameter).epsilon(1e-14));
  CHECK(s.true_variance == 0.0);
  for (std::size_t e = 0; e < ccs::kEstimatorCount; ++e) {
    REQUIRE(s.mean_variance[e].has_value());
    CHECK(std::fabs(*s.mean_variance[e]) < 1e-9);
    CHECK(!s.rb_mc[e].has_value());
  }
}

TEST_CASE("summaries are identical across thread counts") {
  auto spec = basic_spec(model_pop(5, 5, 40, 2), 5, 600);
  spec.ci_level = 0.95;
  const auto reference = ccs::to_json(ccs::run_experiment(spec, {1}), ccs::spec_echo(spec), false).dump();
  for (unsigned threads : {2u, 3u, 8u})
    CHECK(ccs::to_json(ccs::run_experiment(spec, {threads}), ccs::spec_echo(spec), false).dump() == reference);

  auto other = spec;
  other.seed = 8;
  CHECK(ccs::to_json(ccs::run_experiment(other, {2}), ccs::spec_echo(other), false).dump() != reference);
}

TEST_CASE("HT variance estimator is unbiased against the exact variance") {
  auto spec = basic_spec(model_pop(2, 2, 12, 3), 4, 20000);
  spec.truth = ccs::TruthMode::kExact;
  const auto s = ccs::run_experiment(spec);
  CHECK(s.true_variance == doctest::Approx(ccs::decompose(*spec.y, spec.dm, spec.dd).v_ccs));
  REQUIRE(s.rb_mc[0].has_value());
  CHECK(std::fabs(*s.rb_mc[0]) < 4.0 * *s.rb_mc_se[0]);
  CHECK(std::fabs(*s.rb_mc[1]) < 4.0 * *s.rb_mc_se[1]);
  CHECK(std::fabs(s.mean_estimate - s.parameter) < 4.0 * std::sqrt(s.true_variance / 20000.0));

  auto mc = spec;
  mc.truth = ccs::TruthMode::kMonteCarlo;
  mc.truth_reps = 20000;
  const auto m = ccs::run_experiment(mc);
  CHECK(std::fabs(m.true_variance - s.true_variance) < 4.0 * m.true_variance_se);
}

TEST_CASE("coverage") {
  auto flat = basic_spec(shared(ccs::Grid(30, 30, 5.0)), 6, 200);
  flat.truth = ccs::TruthMode::kExact;
  CHECK(ccs::coverage_study(flat, 0.95) == 1.0);

  auto half = basic_spec(model_pop(5, 5, 300, 4), 100, 3000);
  half.truth = ccs::TruthMode::kExact;
  const double c = ccs::coverage_study(half, 0.5);
  CHECK(std::fabs(c - 0.5) < 0.03);
  CHECK(ccs::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("ratio target counts skipped replications") {
  ccs::Grid x(3, 3, 0.0), y(3, 3, 1.0);
  x(0, 0) = 2.0;
  auto spec = basic_spec(shared(y), 1, 900);
  spec.x = shared(x);
  spec.target = ccs::Target::kRatio;
  const auto s = ccs::run_experiment(spec, {2});
  std::size_t expected = 0;
  for (std::size_t b = 0; b < spec.reps; ++b) {
    ccs::RandomStream stream(spec.seed, ccs::StreamFamily::kReplication, b);
    const auto cs = ccs::draw_cross_sample(spec.dm, spec.dd, stream);
    if (!(cs.rows[0] == 0 && cs.cols[0] == 0)) ++expected;
  }
  CHECK(s.skipped == expected);
  CHECK(s.skipped > 700);
  CHECK(s.truth_skipped > 0);
  CHECK(s.mean_estimate == doctest::Approx(0.5));
  CHECK(s.parameter == doctest::Approx(4.5));
}

TEST_CASE("ratio of proportional variables has zero variance estimates") {
  const auto x = model_pop(5, 5, 20, 9);
  auto spec = basic_spec(std::make_shared<const ccs::PopulationGrid>(ccs::PopulationGrid{x->values.scaled(0.3), "y"}), 5, 50);
  spec.x = x;
  spec.target = ccs::Target::kRatio;
  const auto s = ccs::run_experiment(spec, {1});
  CHECK(s.parameter == doctest::Approx(0.3));
  CHECK(s.mean_estimate == doctest::Approx(0.3));
  for (std::size_t e = 0; e < ccs::kEstimatorCount; ++e) CHECK(std::fabs(*s.mean_variance[e]) < 1e-20);
}

TEST_CASE("tables and validation") {
  CHECK(ccs::run_table({}).empty());

  auto good = basic_spec(model_pop(1, 1, 10, 5), 3, 50);
  auto bad = good;
  bad.reps = 0;
  const auto rows = ccs::run_table({good, bad}, {1});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].summary.has_value());
  CHECK(!rows[1].summary.has_value());
  CHECK(!rows[1].error.empty());

  auto ratio = good;
  ratio.target = ccs::Target::kRatio;
  CHECK_THROWS_AS(ccs::run_experiment(ratio), std::invalid_argument);
  ratio.x = good.y;
  ratio.truth = ccs::TruthMode::kExact;
  CHECK_THROWS_AS(ccs::run_experiment(ratio), std::invalid_argument);
  auto ci = good;
  ci.ci_level = 1.5;
  CHECK_THROWS_AS(ccs::run_experiment(ci), std::invalid_argument);
  auto shape = good;
  shape.dm = Design::simple_random(11, 3);
  CHECK_THROWS_AS(ccs::run_experiment(shape), std::invalid_argument);
}
