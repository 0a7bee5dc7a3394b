#pragma once

#include <cstddef>
#include <vector>

namespace ccs {

// Variance ratios r_M = sigma_M^2 / sigma_E^2, r_D = sigma_D^2 / sigma_E^2
// and SI x SI sample sizes.
struct BiasInputs {
  double r_m = 0.0;
  double r_d = 0.0;
  std::size_t n_m = 1;
  std::size_t big_n_m = 1;
  std::size_t n_d = 1;
  std::size_t big_n_d = 1;

  static BiasInputs from_sigmas(double sigma_m, double sigma_d, double sigma_e, std::size_t n_m,
                                std::size_t big_n_m, std::size_t n_d, std::size_t big_n_d);
  void validate() const;
  double f_m() const { return static_cast<double>(n_m) / static_cast<double>(big_n_m); }
  double f_d() const { return static_cast<double>(n_d) / static_cast<double>(big_n_d); }
};

// Model-design relative biases of the simplified estimators under the
// crossed random-effects model and SI x SI:
//   rb1 = -1/(1+A1), rb2 = -1/(1+A2), rb3 = 1/(1+A3).
struct ClosedFormBias {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double rb1 = 0.0;
  double rb2 = 0.0;
  double rb3 = 0.0;
};

// Throws std::domain_error for a census in either dimension.
ClosedFormBias closed_form_rb(const BiasInputs& in);

enum class BiasDirection { kRowRatio, kColRatio, kRowSampleSize, kColSampleSize };
enum class BiasEstimator { kSimp1, kSimp2, kSimp3 };

// Evaluates the chosen relative bias along `values` of the swept parameter
// (r_M, r_D, n_M or n_D) and checks the expected monotone response: SIMP1 and
// SIMP2 biases rising towards 0 and the SIMP3 bias falling towards 0 as the
// parameter grows. Parameter pairs with no effect on the chosen bias (SIMP1
// and r_D, say) must move it the other way; `expect_towards_zero` selects
// which response is checked.
bool monotonicity_check(const BiasInputs& base, BiasDirection direction,
                        BiasEstimator estimator, const std::vector<double>& values,
                        bool expect_towards_zero = true);

}  // namespace ccs
