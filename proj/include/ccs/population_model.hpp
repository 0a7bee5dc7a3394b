#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "ccs/grid.hpp"

namespace ccs {

// Two-way crossed random-effects model
//   Y_ik = mu + sigma_m U_i + sigma_d V_k + sigma_e W_ik,  U, V, W iid N(0, 1).
struct ModelParams {
  double mu = 0.0;
  double sigma_m = 0.0;
  double sigma_d = 0.0;
  double sigma_e = 0.0;
  std::size_t n_rows = 1;
  std::size_t n_cols = 1;
  std::uint64_t seed = 0;

  void validate() const;
  std::string describe() const;
};

// Draws U_1..U_NM, then V_1..V_ND, then W row-major, from one stream.
PopulationGrid generate_grid(const ModelParams& params);

struct ConstantProbability {
  double p = 0.3;
};
struct LogitProbability {
  double target_mean = 0.3;  // beta is calibrated on the realized Z grid
};
using ProbabilityMode = std::variant<ConstantProbability, LogitProbability>;

struct CountVariablePair {
  PopulationGrid x;  // X_ik ~ Poisson(Z_ik)
  PopulationGrid y;  // Y_ik ~ Binomial(X_ik, p_ik)
  ProbabilityMode mode;
  double beta = 0.0;  // logit mode only
  double mean_probability = 0.0;
};

// Smallest Poisson intensity used when a model draw of Z is not positive.
inline constexpr double kPoissonFloor = 1e-9;

CountVariablePair generate_count_pair(const ModelParams& params, const ProbabilityMode& mode);

// Returns beta with mean_ik logistic(beta Z_ik) within 1e-6 of target.
double calibrate_beta(const Grid& z, double target);

double logistic(double t);

}  // namespace ccs
