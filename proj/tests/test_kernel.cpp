#include <doctest.h>

#include <random>

#include "ccs/design.hpp"
#include "ccs/kernel.hpp"
#include "oracles.hpp"

TEST_CASE("structured kernel entries and row sums") {
  auto u = ccs::make_shared_vector({1.0, 2.0, 3.0});
  const ccs::StructuredKernel k(3, ccs::make_shared_vector({0.5, 0.0, -1.0}), {{2.0, u}});
  CHECK(k.at(0, 0) == doctest::Approx(2.5));
  CHECK(k.at(1, 2) == doctest::Approx(12.0));
  CHECK(k.at(2, 2) == doctest::Approx(17.0));
  const auto dense = k.dense();
  const auto sums = k.row_sums();
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (double v : dense[i]) s += v;
    CHECK(sums[i] == doctest::Approx(s));
  }
  CHECK(ccs::StructuredKernel::ones(4).at(1, 3) == 1.0);
  CHECK(ccs::StructuredKernel::diagonal({1.0, 2.0}).at(0, 1) == 0.0);
  CHECK(ccs::StructuredKernel::outer({2.0, 3.0}).at(0, 1) == doctest::Approx(6.0));
}

TEST_CASE("factorized quadratic form equals the quadruple sum") {
  std::mt19937_64 rng(17);
  const std::vector<ccs::Design> rows = {ccs::Design::simple_random(5, 2),
                                         ccs::Design::stratified({{2, 1}, {3, 2}}),
                                         ccs::Design::poisson({0.2, 0.4, 0.6, 0.8, 1.0})};
  const std::vector<ccs::Design> cols = {ccs::Design::simple_random(4, 3),
                                         ccs::Design::stratified({{1, 1}, {3, 1}}),
                                         ccs::Design::poisson({0.3, 0.3, 0.9, 0.5})};
  for (const auto& dm : rows)
    for (const auto& dd : cols) {
      const ccs::Grid w = oracle::random_grid(5, 4, rng, -3.0, 7.0);
      ccs::QuadraticForms q(w);
      const std::vector<std::pair<ccs::StructuredKernel, ccs::StructuredKernel>> pairs = {
          {dm.joint_kernel(), dd.delta_kernel()},
          {dm.delta_kernel(), dd.outer_kernel()},
          {dm.inclusion_diagonal(), dd.offdiagonal_joint_ratio_kernel()},
          {ccs::StructuredKernel::ones(5), dd.joint_kernel()},
      };
      for (const auto& [a, b] : pairs) {
        const double fast = q.evaluate(a, b);
        const double slow = ccs::dense_quadratic_form(a.dense(), b.dense(), w);
        CHECK(oracle::rel_close(fast, slow, 1e-11));
      }
    }
}

TEST_CASE("projections and weighted squares") {
  const ccs::Grid w(2, 3, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  ccs::QuadraticForms q(w);
  const auto v = ccs::make_shared_vector({1.0, 0.0, -1.0});
  const auto& right = q.right_projection(v);
  CHECK(right[0] == doctest::Approx(-2.0));
  CHECK(right[1] == doctest::Approx(-2.0));
  const auto u = ccs::make_shared_vector({1.0, 2.0});
  const auto& left = q.left_projection(u);
  CHECK(left[2] == doctest::Approx(15.0));
  // 1*(1+0-9) + 2*(16+0-36)
  CHECK(q.weighted_squares({1.0, 2.0}, v) == doctest::Approx(-48.0));
}
