#pragma once

#include <cstdint>
#include <optional>

#include "ccs/design.hpp"
#include "ccs/grid.hpp"
#include "ccs/ht_estimation.hpp"
#include "ccs/population_model.hpp"

namespace ccs {

// total = c1 + c2 - c3
struct EstimatorComponents {
  double total = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

// SIMP1 = YG c1, SIMP2 = YG c2, SIMP3 = SIMP1 + SIMP2.
struct SimplifiedEstimates {
  double simp1 = 0.0;
  double simp2 = 0.0;
  double simp3 = 0.0;
};

// An estimate counts as negative below -kNegativeTolerance * that^2, so
// rounding noise on (near-)constant variables is not flagged.
inline constexpr double kNegativeTolerance = 1e-9;

struct VarianceEstimates {
  EstimatorComponents ht;
  std::optional<EstimatorComponents> yg;          // fixed-size designs only
  std::optional<SimplifiedEstimates> simplified;  // fixed-size designs only
  bool negative_ht = false;
  bool negative_yg = false;
};

// Structured O(|S_M| |S_D|) path. `sampled` holds the raw variable (or a
// linearized variable) on S_M x S_D.
VarianceEstimates estimate_variances(const Grid& sampled, const Design& dm, const Design& dd,
                                     const CrossSample& s);
VarianceEstimates estimate_variances(const PopulationGrid& y, const Design& dm, const Design& dd,
                                     const CrossSample& s);

// Literal double and quadruple sums over sampled pairs, from pi1/pi2.
VarianceEstimates estimate_variances_generic(const Grid& sampled, const Design& dm,
                                             const Design& dd, const CrossSample& s);

// Stratum-wise N_h^2 (1/n_h - 1/N_h) s_h^2 of the estimated sub-totals
// (one stratum for SI). Requires SI or STSI in both dimensions.
SimplifiedEstimates simplified_closed_form(const Grid& sampled, const Design& dm,
                                           const Design& dd, const CrossSample& s);

struct NegativeWitness {
  PopulationGrid grid;
  CrossSample sample;
  VarianceEstimates estimates;
  std::size_t trial = 0;
};

// Randomized search for a population and sample on which the HT or YG variance
// estimate is flagged negative. Each trial draws a fresh grid from `base` with
// a derived seed and one cross sample.
std::optional<NegativeWitness> find_negative_case(const ModelParams& base, const Design& dm,
                                                  const Design& dd, std::size_t budget,
                                                  std::uint64_t seed);

}  // namespace ccs
