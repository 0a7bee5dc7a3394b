#include "ccs/model_bias.hpp"

#include <cmath>
#include <stdexcept>

namespace ccs {

BiasInputs BiasInputs::from_sigmas(double sigma_m, double sigma_d, double sigma_e,
                                   std::size_t n_m, std::size_t big_n_m, std::size_t n_d,
                                   std::size_t big_n_d) {
  if (!(sigma_e > 0.0)) throw std::invalid_argument("sigma_e must be positive");
  const double e2 = sigma_e * sigma_e;
  return {sigma_m * sigma_m / e2, sigma_d * sigma_d / e2, n_m, big_n_m, n_d, big_n_d};
}

void BiasInputs::validate() const {
  if (!(r_m >= 0.0) || !(r_d >= 0.0) || !std::isfinite(r_m) || !std::isfinite(r_d)) {
    throw std::invalid_argument("variance ratios must be finite and non-negative");
  }
  if (n_m == 0 || n_d == 0 || n_m > big_n_m || n_d > big_n_d) {
    throw std::invalid_argument("sample sizes must satisfy 1 <= n <= N");
  }
}

ClosedFormBias closed_form_rb(const BiasInputs& in) {
  in.validate();
  const double fm = in.f_m(), fd = in.f_d();
  if (fm >= 1.0 || fd >= 1.0) {
    throw std::domain_error("closed-form bias is undefined for a census (f = 1)");
  }
  const double nm = static_cast<double>(in.n_m), nd = static_cast<double>(in.n_d);
  ClosedFormBias b;
  b.a1 = (1.0 - fm) / (1.0 - fd) * (nd * in.r_m + 1.0) / (nm * in.r_d + fm);
  b.a2 = (1.0 - fd) / (1.0 - fm) * (nm * in.r_d + 1.0) / (nd * in.r_m + fd);
  b.a3 = (nd * in.r_m + fd) / (1.0 - fd) + (nm * in.r_d + fm) / (1.0 - fm);
  b.rb1 = -1.0 / (1.0 + b.a1);
  b.rb2 = -1.0 / (1.0 + b.a2);
  b.rb3 = 1.0 / (1.0 + b.a3);
  return b;
}

bool monotonicity_check(const BiasInputs& base, BiasDirection direction,
                        BiasEstimator estimator, const std::vector<double>& values,
                        bool expect_towards_zero) {
  if (values.size() < 2) return true;
  double previous = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    BiasInputs in = base;
    switch (direction) {
      case BiasDirection::kRowRatio: in.r_m = values[t]; break;
      case BiasDirection::kColRatio: in.r_d = values[t]; break;
      case BiasDirection::kRowSampleSize: in.n_m = static_cast<std::size_t>(values[t]); break;
      case BiasDirection::kColSampleSize: in.n_d = static_cast<std::size_t>(values[t]); break;
    }
    const ClosedFormBias b = closed_form_rb(in);
    const double magnitude = std::fabs(estimator == BiasEstimator::kSimp1   ? b.rb1
                                       : estimator == BiasEstimator::kSimp2 ? b.rb2
                                                                            : b.rb3);
    if (t > 0) {
      const bool shrinking = magnitude < previous;
      if (shrinking != expect_towards_zero) return false;
    }
    previous = magnitude;
  }
  return true;
}

}  // namespace ccs
