#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ccs/population_model.hpp"

namespace {

ccs::ModelParams params(double mu, double sm, double sd, double se, std::size_t nm, std::size_t nd,
                        std::uint64_t seed) {
  ccs::ModelParams p;
  p.mu = mu;
  p.sigma_m = sm;
  p.sigma_d = sd;
  p.sigma_e = se;
  p.n_rows = nm;
  p.n_cols = nd;
  p.seed = seed;
  return p;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("degenerate model is constant") {
  const auto pop = ccs::generate_grid(params(200, 0, 0, 0, 7, 9, 3));
  for (double v : pop.values.data()) CHECK(v == 200.0);
  CHECK(pop.n_rows() == 7);
  CHECK(pop.n_cols() == 9);
}

TEST_CASE("row-effect-only model has constant rows") {
  const auto pop = ccs::generate_grid(params(0, 1, 0, 0, 6, 5, 8));
  std::vector<double> means;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t k = 1; k < 5; ++k) CHECK(pop.values(i, k) == pop.values(i, 0));
    means.push_back(pop.values(i, 0));
  }
  const double m = mean_of(means);
  double var = 0.0;
  for (double x : means) var += (x - m) * (x - m);
  CHECK(var > 0.0);
}

TEST_CASE("large-grid moments") {
  const auto pop = ccs::generate_grid(params(200, 5, 5, 5, 1000, 1000, 1));
  const auto data = pop.values.data();
  const double m = mean_of(data);
  double var = 0.0;
  for (double x : data) var += (x - m) * (x - m);
  var /= static_cast<double>(data.size() - 1);
  CHECK(std::fabs(m - 200.0) < 1.0);
  CHECK(std::fabs(var - 75.0) < 10.0);

  // Row means: sigma_M^2 + sigma_E^2 / N_D around a common column effect.
  const auto rows = pop.values.row_sums();
  std::vector<double> row_means;
  for (double r : rows) row_means.push_back(r / 1000.0);
  const double rm = mean_of(row_means);
  double rvar = 0.0;
  for (double x : row_means) rvar += (x - rm) * (x - rm);
  rvar /= 999.0;
  CHECK(std::fabs(rvar - 25.025) < 4.0);
}

TEST_CASE("generation is reproducible and seed-sensitive") {
  const auto a = ccs::generate_grid(params(1, 2, 3, 4, 20, 30, 99));
  const auto b = ccs::generate_grid(params(1, 2, 3, 4, 20, 30, 99));
  const auto c = ccs::generate_grid(params(1, 2, 3, 4, 20, 30, 100));
  CHECK(a.values == b.values);
  CHECK(!(a.values == c.values));
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(ccs::generate_grid(params(0, -1, 0, 0, 2, 2, 1)), std::invalid_argument);
  CHECK_THROWS_AS(ccs::generate_grid(params(0, 1, 0, 0, 0, 2, 1)), std::invalid_argument);
  CHECK_THROWS_AS(ccs::generate_grid(params(NAN, 1, 0, 0, 2, 2, 1)), std::invalid_argument);
}

TEST_CASE("count pairs") {
  const auto all = ccs::generate_count_pair(params(200, 5, 5, 5, 30, 30, 4), ccs::ConstantProbability{1.0});
  CHECK(all.y.values == all.x.values);
  for (double v : all.x.values.data()) CHECK(v == std::floor(v));

  const auto thin = ccs::generate_count_pair(params(200, 5, 5, 5, 300, 300, 4), ccs::ConstantProbability{0.3});
  const double ratio = thin.y.total() / thin.x.total();
  CHECK(std::fabs(ratio - 0.3) < 0.01);
  for (std::size_t i = 0; i < thin.y.values.size(); ++i)
    CHECK(thin.y.values.data()[i] <= thin.x.values.data()[i]);

  const auto logit = ccs::generate_count_pair(params(200, 5, 5, 5, 100, 100, 4), ccs::LogitProbability{0.3});
  CHECK(std::fabs(logit.mean_probability - 0.3) < 0.02);
  CHECK(logit.beta < 0.0);

  CHECK_THROWS_AS(ccs::generate_count_pair(params(200, 5, 5, 5, 3, 3, 4), ccs::ConstantProbability{0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ccs::generate_count_pair(params(200, 5, 5, 5, 3, 3, 4), ccs::ConstantProbability{1.2}),
                  std::invalid_argument);
}

TEST_CASE("beta calibration") {
  CHECK(ccs::calibrate_beta(ccs::Grid(3, 3, 2.5), 0.5) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(ccs::calibrate_beta(ccs::Grid(3, 3, 1.0), 0.3) ==
        doctest::Approx(std::log(3.0 / 7.0)).epsilon(1e-6));

  const auto z = ccs::generate_grid(params(200, 5, 5, 5, 40, 40, 12)).values;
  const double beta = ccs::calibrate_beta(z, 0.3);
  double mean = 0.0;
  for (double v : z.data()) mean += ccs::logistic(beta * v);
  mean /= static_cast<double>(z.size());
  CHECK(std::fabs(mean - 0.3) < 1e-6);

  // All-zero Z pins the mean at 0.5.
  CHECK_THROWS_AS(ccs::calibrate_beta(ccs::Grid(2, 2, 0.0), 0.3), std::domain_error);
  CHECK_THROWS_AS(ccs::calibrate_beta(z, 1.0), std::invalid_argument);
}
