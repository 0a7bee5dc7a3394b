#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ccs/design.hpp"
#include "ccs/grid.hpp"

namespace ccs {

// Population-level variance components of the HT total under cross-classified
// sampling (CCS) and the two two-stage alternatives: MD (rows are primary
// units) and DM (columns are primary units).
struct ExactVarianceReport {
  double v_ccs = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
  double v_md = 0.0;
  double v_md_psu = 0.0;
  double v_md_ssu = 0.0;
  double v_dm = 0.0;
  double v_dm_psu = 0.0;
  double v_dm_ssu = 0.0;
};

// Default term budget for the quadruple-sum reference paths.
inline constexpr double kGenericTermLimit = 1e8;

// Gamma_ijkl = pi_ij^M pi_kl^D - pi_i^M pi_j^M pi_k^D pi_l^D
double gamma(const Design& dm, const Design& dd, std::size_t i, std::size_t j, std::size_t k,
             std::size_t l);

// Y_ik / (pi_i^M pi_k^D) over the whole population.
Grid expanded_population(const PopulationGrid& y, const Design& dm, const Design& dd);

// Quadruple-sum reference paths built from the pi1/pi2 accessors.
double v_ccs_generic(const PopulationGrid& y, const Design& dm, const Design& dd,
                     double term_limit = kGenericTermLimit);
double v_ccs_syg(const PopulationGrid& y, const Design& dm, const Design& dd,
                 double term_limit = kGenericTermLimit);
ExactVarianceReport decompose_generic(const PopulationGrid& y, const Design& dm,
                                      const Design& dd, double term_limit = kGenericTermLimit);

// O(N_M N_D) structured path for SI, STSI and Poisson designs.
ExactVarianceReport decompose(const PopulationGrid& y, const Design& dm, const Design& dd);

struct DesignDifference {
  double ccs_minus_dm = 0.0;                  // sum-over-Delta^M form
  std::optional<double> fixed_size_form;      // pairwise-difference form (fixed-size rows)
};

// V_CCS - V_DM. The pairwise-difference form is evaluated when the row design
// is fixed-size and N_M^2 N_D stays under `pair_work_limit`.
DesignDifference ccs_vs_dm_difference(const PopulationGrid& y, const Design& dm,
                                      const Design& dd, double pair_work_limit = 2e9);
double ccs_vs_dm_difference_generic(const PopulationGrid& y, const Design& dm, const Design& dd,
                                    double term_limit = kGenericTermLimit);

struct SizeRatio {
  std::size_t n_m = 0;
  std::size_t n_d = 0;
  double v_ccs = 0.0;
  double v_md = 0.0;
  std::optional<double> ratio_pct;  // empty when V_CCS == 0
};

// V_MD / V_CCS in percent under SI x SI for each (n_M, n_D).
std::vector<SizeRatio> variance_ratio_sweep(
    const PopulationGrid& y, const std::vector<std::pair<std::size_t, std::size_t>>& sizes);

}  // namespace ccs
