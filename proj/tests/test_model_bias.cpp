#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ccs/design.hpp"
#include "ccs/model_bias.hpp"

using ccs::BiasDirection;
using ccs::BiasEstimator;
using ccs::BiasInputs;

namespace {

// Model expectation of sum_ijkl A(i,j,k,l) Y_ik Y_jl / (pi_i pi_j pi_k pi_l)
// under Y = mu + s_M U_i + s_D V_k + s_E W_ik, for weights that vanish on
// constants. Literal quadruple loop over the design accessors.
template <typename Weight>
double model_expectation(const ccs::Design& dm, const ccs::Design& dd, double vm, double vd,
                         double ve, Weight weight) {
  double sum = 0.0;
  for (std::size_t i = 0; i < dm.population_size(); ++i)
    for (std::size_t j = 0; j < dm.population_size(); ++j)
      for (std::size_t k = 0; k < dd.population_size(); ++k)
        for (std::size_t l = 0; l < dd.population_size(); ++l) {
          const double cov = (i == j ? vm : 0.0) + (k == l ? vd : 0.0) + (i == j && k == l ? ve : 0.0);
          if (cov == 0.0) continue;
          sum += weight(i, j, k, l) * cov / (dm.pi1(i) * dm.pi1(j) * dd.pi1(k) * dd.pi1(l));
        }
  return sum;
}

}  // namespace

TEST_CASE("closed-form values") {
  const BiasInputs base{1.0, 1.0, 5, 1000, 5, 1000};
  const auto b = ccs::closed_form_rb(base);
  CHECK(b.a1 == doctest::Approx(6.0 / 5.005).epsilon(1e-12));
  CHECK(b.rb1 == doctest::Approx(-0.4548).epsilon(1e-4));
  CHECK(b.a3 == doctest::Approx(10.0603).epsilon(1e-5));
  CHECK(b.rb3 == doctest::Approx(0.0904).epsilon(1e-3));
  CHECK(b.a2 == doctest::Approx(b.a1));

  const auto strong = ccs::closed_form_rb({100.0, 1.0, 5, 1000, 5, 1000});
  CHECK(strong.rb2 == doctest::Approx(-0.988).epsilon(1e-3));

  const auto from = BiasInputs::from_sigmas(50.0, 5.0, 5.0, 5, 1000, 5, 1000);
  CHECK(from.r_m == doctest::Approx(100.0));
  CHECK(from.r_d == doctest::Approx(1.0));
}

TEST_CASE("closed form equals the brute-force model expectation") {
  for (const auto& [vm, vd, ve] : {std::tuple{1.0, 1.0, 1.0}, {4.0, 0.5, 2.0}, {0.0, 3.0, 1.0}}) {
    const std::size_t big_nm = 7, big_nd = 6, nm = 3, nd = 2;
    const auto dm = ccs::Design::simple_random(big_nm, nm);
    const auto dd = ccs::Design::simple_random(big_nd, nd);
    const double v = model_expectation(dm, dd, vm, vd, ve, [&](auto i, auto j, auto k, auto l) {
      return dm.pi2(i, j) * dd.pi2(k, l) - dm.pi1(i) * dm.pi1(j) * dd.pi1(k) * dd.pi1(l);
    });
    const double v1 = model_expectation(dm, dd, vm, vd, ve,
                                        [&](auto i, auto j, auto k, auto l) { return dm.delta(i, j) * dd.pi2(k, l); });
    const double v2 = model_expectation(dm, dd, vm, vd, ve,
                                        [&](auto i, auto j, auto k, auto l) { return dm.pi2(i, j) * dd.delta(k, l); });
    const auto b = ccs::closed_form_rb({vm / ve, vd / ve, nm, big_nm, nd, big_nd});
    CHECK(b.rb1 == doctest::Approx((v1 - v) / v).epsilon(1e-10));
    CHECK(b.rb2 == doctest::Approx((v2 - v) / v).epsilon(1e-10));
    CHECK(b.rb3 == doctest::Approx((v1 + v2 - v) / v).epsilon(1e-10));
  }
}

TEST_CASE("signs, symmetry and limits") {
  const BiasInputs in{2.0, 0.3, 4, 50, 9, 80};
  const auto b = ccs::closed_form_rb(in);
  CHECK(b.rb1 < 0.0);
  CHECK(b.rb2 < 0.0);
  CHECK(b.rb3 > 0.0);
  const auto swapped = ccs::closed_form_rb({0.3, 2.0, 9, 80, 4, 50});
  CHECK(swapped.a1 == doctest::Approx(b.a2));
  CHECK(swapped.rb2 == doctest::Approx(b.rb1));
  CHECK(swapped.a3 == doctest::Approx(b.a3));

  const auto big = ccs::closed_form_rb({1e12, 1.0, 5, 1000, 5, 1000});
  CHECK(std::fabs(big.rb1) < 1e-9);
  CHECK(big.rb2 == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::fabs(big.rb3) < 1e-9);

  CHECK_THROWS_AS(ccs::closed_form_rb({1.0, 1.0, 10, 10, 5, 100}), std::domain_error);
  CHECK_THROWS_AS(ccs::closed_form_rb({-1.0, 1.0, 5, 10, 5, 100}), std::invalid_argument);
  CHECK_THROWS_AS(ccs::closed_form_rb({1.0, 1.0, 0, 10, 5, 100}), std::invalid_argument);
  CHECK_THROWS_AS(BiasInputs::from_sigmas(1.0, 1.0, 0.0, 5, 10, 5, 10), std::invalid_argument);
}

TEST_CASE("monotone responses") {
  const BiasInputs base{1.0, 1.0, 5, 1000, 5, 1000};
  CHECK(ccs::monotonicity_check(base, BiasDirection::kColSampleSize, BiasEstimator::kSimp1, {5, 10, 100, 500}));
  CHECK(ccs::monotonicity_check(base, BiasDirection::kRowSampleSize, BiasEstimator::kSimp2, {5, 10, 100, 500}));
  CHECK(ccs::monotonicity_check(base, BiasDirection::kRowRatio, BiasEstimator::kSimp3, {0.5, 1, 10, 100}));
  CHECK(ccs::monotonicity_check(base, BiasDirection::kRowRatio, BiasEstimator::kSimp1, {0.5, 1, 10, 100}));
  CHECK(ccs::monotonicity_check(base, BiasDirection::kColRatio, BiasEstimator::kSimp1, {0.5, 1, 10, 100}, false));
  CHECK(!ccs::monotonicity_check(base, BiasDirection::kColRatio, BiasEstimator::kSimp1, {0.5, 1, 10, 100}));

  double previous = -1.0;
  for (double nd : {5.0, 10.0, 100.0, 500.0}) {
    BiasInputs in = base;
    in.n_d = static_cast<std::size_t>(nd);
    const double rb1 = ccs::closed_form_rb(in).rb1;
    CHECK(rb1 > previous);
    CHECK(rb1 < 0.0);
    previous = rb1;
  }
}
