#pragma once

#include <cstddef>
#include <vector>

#include "ccs/design.hpp"
#include "ccs/grid.hpp"

namespace ccs {

// Realized cross sample S_M x S_D; sorted, 0-based.
struct CrossSample {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;

  void validate(const Design& dm, const Design& dd) const;
};

CrossSample draw_cross_sample(const Design& dm, const Design& dd, RandomStream& stream);

struct SampleEstimate {
  double total = 0.0;
  std::vector<double> row_subtotals;  // Yhat_i. for i in S_M, in sample order
  std::vector<double> col_subtotals;  // Yhat_.k for k in S_D, in sample order
  bool degenerate = false;            // an empty sample in either dimension
};

// Y_ik / (pi_i pi_k) over the sampled cells. `sampled` is |S_M| x |S_D|.
Grid expanded_values(const Grid& sampled, const Design& dm, const Design& dd,
                     const CrossSample& s);

SampleEstimate ht_total(const PopulationGrid& y, const Design& dm, const Design& dd,
                        const CrossSample& s);
// Same estimator on values already restricted to the sample.
SampleEstimate ht_total_sampled(const Grid& sampled, const Design& dm, const Design& dd,
                                const CrossSample& s);

struct RatioEstimate {
  double ratio = 0.0;
  double total_y = 0.0;
  double total_x = 0.0;
  Grid linearized;  // u_ik on S_M x S_D
};

// Linearized variable of R = t_Y / t_X: u_ik = (Y_ik - Rhat X_ik) / that_X.
Grid linearize_sampled(const Grid& y_sampled, const Grid& x_sampled, double ratio,
                       double total_x);

// Throws std::domain_error when that_X == 0.
RatioEstimate ht_ratio_sampled(const Grid& y_sampled, const Grid& x_sampled, const Design& dm,
                               const Design& dd, const CrossSample& s);
RatioEstimate ht_ratio(const PopulationGrid& y, const PopulationGrid& x, const Design& dm,
                       const Design& dd, const CrossSample& s);
Grid linearize(const PopulationGrid& y, const PopulationGrid& x, const Design& dm,
               const Design& dd, const CrossSample& s);

}  // namespace ccs
