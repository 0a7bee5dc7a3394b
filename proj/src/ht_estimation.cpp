#include "ccs/ht_estimation.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ccs {

namespace {

void check_units(const std::vector<std::size_t>& units, const Design& d, const char* what) {
  for (std::size_t a = 0; a < units.size(); ++a) {
    if (units[a] >= d.population_size()) {
      throw std::out_of_range(std::string(what) + " index " + std::to_string(units[a] + 1) +
                              " exceeds population size " +
                              std::to_string(d.population_size()));
    }
    if (a > 0 && units[a] <= units[a - 1]) {
      throw std::invalid_argument(std::string(what) + " indices must be strictly increasing");
    }
  }
}

}  // namespace

void CrossSample::validate(const Design& dm, const Design& dd) const {
  check_units(rows, dm, "row");
  check_units(cols, dd, "column");
}

CrossSample draw_cross_sample(const Design& dm, const Design& dd, RandomStream& stream) {
  CrossSample s;
  s.rows = dm.draw(stream);
  s.cols = dd.draw(stream);
  return s;
}

Grid expanded_values(const Grid& sampled, const Design& dm, const Design& dd,
                     const CrossSample& s) {
  if (sampled.rows() != s.rows.size() || sampled.cols() != s.cols.size()) {
    throw std::invalid_argument("sampled values do not match the cross sample shape");
  }
  std::vector<double> inv_col(s.cols.size());
  for (std::size_t b = 0; b < s.cols.size(); ++b) {
    const double p = dd.pi1(s.cols[b]);
    if (p <= 0.0) {
      throw std::domain_error("zero inclusion probability for column " +
                              std::to_string(s.cols[b] + 1));
    }
    inv_col[b] = 1.0 / p;
  }
  Grid out(sampled.rows(), sampled.cols());
  for (std::size_t a = 0; a < s.rows.size(); ++a) {
    const double p = dm.pi1(s.rows[a]);
    if (p <= 0.0) {
      throw std::domain_error("zero inclusion probability for row " +
                              std::to_string(s.rows[a] + 1));
    }
    const auto src = sampled.row(a);
    auto dst = out.row(a);
    for (std::size_t b = 0; b < src.size(); ++b) dst[b] = src[b] * inv_col[b] / p;
  }
  return out;
}

SampleEstimate ht_total_sampled(const Grid& sampled, const Design& dm, const Design& dd,
                                const CrossSample& s) {
  SampleEstimate est;
  est.degenerate = s.rows.empty() || s.cols.empty();
  est.row_subtotals.assign(s.rows.size(), 0.0);
  est.col_subtotals.assign(s.cols.size(), 0.0);
  if (est.degenerate) return est;
  const Grid w = expanded_values(sampled, dm, dd, s);
  // Yhat_i. = sum_k Y_ik / pi_k = pi_i * sum_k Ycheck_ik, and symmetrically.
  const auto r = w.row_sums();
  const auto c = w.col_sums();
  for (std::size_t a = 0; a < r.size(); ++a) est.row_subtotals[a] = r[a] * dm.pi1(s.rows[a]);
  for (std::size_t b = 0; b < c.size(); ++b) est.col_subtotals[b] = c[b] * dd.pi1(s.cols[b]);
  for (double v : r) est.total += v;
  return est;
}

SampleEstimate ht_total(const PopulationGrid& y, const Design& dm, const Design& dd,
                        const CrossSample& s) {
  s.validate(dm, dd);
  if (dm.population_size() != y.n_rows() || dd.population_size() != y.n_cols()) {
    throw std::invalid_argument("design sizes do not match the population grid");
  }
  return ht_total_sampled(y.values.restricted(s.rows, s.cols), dm, dd, s);
}

Grid linearize_sampled(const Grid& y, const Grid& x, double ratio, double total_x) {
  if (total_x == 0.0) throw std::domain_error("ratio: estimated denominator total is zero");
  Grid u(y.rows(), y.cols());
  for (std::size_t a = 0; a < y.rows(); ++a)
    for (std::size_t b = 0; b < y.cols(); ++b) u(a, b) = (y(a, b) - ratio * x(a, b)) / total_x;
  return u;
}

RatioEstimate ht_ratio_sampled(const Grid& y, const Grid& x, const Design& dm, const Design& dd,
                               const CrossSample& s) {
  const double ty = ht_total_sampled(y, dm, dd, s).total;
  const double tx = ht_total_sampled(x, dm, dd, s).total;
  if (tx == 0.0) throw std::domain_error("ratio: estimated denominator total is zero");
  RatioEstimate r;
  r.total_y = ty;
  r.total_x = tx;
  r.ratio = ty / tx;
  r.linearized = linearize_sampled(y, x, r.ratio, tx);
  return r;
}

RatioEstimate ht_ratio(const PopulationGrid& y, const PopulationGrid& x, const Design& dm,
                       const Design& dd, const CrossSample& s) {
  s.validate(dm, dd);
  if (y.n_rows() != x.n_rows() || y.n_cols() != x.n_cols()) {
    throw std::invalid_argument("ratio: variables have different grid shapes");
  }
  return ht_ratio_sampled(y.values.restricted(s.rows, s.cols), x.values.restricted(s.rows, s.cols),
                          dm, dd, s);
}

Grid linearize(const PopulationGrid& y, const PopulationGrid& x, const Design& dm,
               const Design& dd, const CrossSample& s) {
  return ht_ratio(y, x, dm, dd, s).linearized;
}

}  // namespace ccs
