#include "ccs/variance_estimation.hpp"

#include <stdexcept>

#include "ccs/kernel.hpp"
#include "ccs/random.hpp"

namespace ccs {

namespace {

void finish_flags(VarianceEstimates& v, const Grid& expanded) {
  const double t = expanded.total();
  const double floor = -kNegativeTolerance * t * t;
  v.negative_ht = v.ht.total < floor;
  v.negative_yg = v.yg && v.yg->total < floor;
}

bool both_fixed(const Design& dm, const Design& dd) { return dm.fixed_size() && dd.fixed_size(); }

}  // namespace

VarianceEstimates estimate_variances(const Grid& sampled, const Design& dm, const Design& dd,
                                     const CrossSample& s) {
  VarianceEstimates out;
  const bool fixed = both_fixed(dm, dd);
  if (s.rows.empty() || s.cols.empty()) {
    if (fixed) {
      out.yg = EstimatorComponents{};
      out.simplified = SimplifiedEstimates{};
    }
    return out;
  }
  const Grid w = expanded_values(sampled, dm, dd, s);
  QuadraticForms q(w);
  const StructuredKernel gm = dm.sample_delta_ratio_kernel(s.rows);
  const StructuredKernel gd = dd.sample_delta_ratio_kernel(s.cols);
  const StructuredKernel jm = StructuredKernel::ones(s.rows.size());
  const StructuredKernel jd = StructuredKernel::ones(s.cols.size());

  auto& ht = out.ht;
  ht.c1 = q.evaluate(gm, jd);
  ht.c2 = q.evaluate(jm, gd);
  ht.c3 = q.evaluate(gm, gd);
  ht.total = ht.c1 + ht.c2 - ht.c3;

  if (fixed) {
    // -1/2 sum_{a != b} G_ab (x_a - x_b)^2 = x^T G x - sum_a r_a x_a^2, with r
    // the row sums of G; the same expansion gives the cell-level c3.
    const std::vector<double> rm = gm.row_sums();
    const std::vector<double> rd = gd.row_sums();
    const auto& row_totals = q.right_projection(jd.terms().front().vec);
    const auto& col_totals = q.left_projection(jm.terms().front().vec);
    double sm = 0.0, sd = 0.0;
    for (std::size_t a = 0; a < rm.size(); ++a) sm += rm[a] * row_totals[a] * row_totals[a];
    for (std::size_t b = 0; b < rd.size(); ++b) sd += rd[b] * col_totals[b] * col_totals[b];
    EstimatorComponents yg;
    yg.c1 = ht.c1 - sm;
    yg.c2 = ht.c2 - sd;
    yg.c3 = ht.c3 - q.weighted_squares(rm, make_shared_vector(rd));
    yg.total = yg.c1 + yg.c2 - yg.c3;
    out.yg = yg;
    out.simplified = SimplifiedEstimates{yg.c1, yg.c2, yg.c1 + yg.c2};
  }
  finish_flags(out, w);
  return out;
}

VarianceEstimates estimate_variances(const PopulationGrid& y, const Design& dm, const Design& dd,
                                     const CrossSample& s) {
  s.validate(dm, dd);
  return estimate_variances(y.values.restricted(s.rows, s.cols), dm, dd, s);
}

VarianceEstimates estimate_variances_generic(const Grid& sampled, const Design& dm,
                                             const Design& dd, const CrossSample& s) {
  VarianceEstimates out;
  const bool fixed = both_fixed(dm, dd);
  const std::size_t m = s.rows.size(), d = s.cols.size();
  if (m == 0 || d == 0) {
    if (fixed) {
      out.yg = EstimatorComponents{};
      out.simplified = SimplifiedEstimates{};
    }
    return out;
  }
  const Grid w = expanded_values(sampled, dm, dd, s);
  const auto gm = dm.dense_sample_delta_ratio(s.rows);
  const auto gd = dd.dense_sample_delta_ratio(s.cols);
  const std::vector<std::vector<double>> jm(m, std::vector<double>(m, 1.0));
  const std::vector<std::vector<double>> jd(d, std::vector<double>(d, 1.0));

  double v = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t e = 0; e < d; ++e) {
          const std::size_t i = s.rows[a], j = s.rows[b], k = s.cols[c], l = s.cols[e];
          const double gamma = dm.pi2(i, j) * dd.pi2(k, l) -
                               dm.pi1(i) * dm.pi1(j) * dd.pi1(k) * dd.pi1(l);
          v += gamma / (dm.pi2(i, j) * dd.pi2(k, l)) * w(a, c) * w(b, e);
        }
  out.ht.total = v;
  out.ht.c1 = dense_quadratic_form(gm, jd, w);
  out.ht.c2 = dense_quadratic_form(jm, gd, w);
  out.ht.c3 = dense_quadratic_form(gm, gd, w);

  if (fixed) {
    std::vector<double> row_sub(m, 0.0), col_sub(d, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t c = 0; c < d; ++c) {
        row_sub[a] += sampled(a, c) / dd.pi1(s.cols[c]);
        col_sub[c] += sampled(a, c) / dm.pi1(s.rows[a]);
      }
    EstimatorComponents yg;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        const double diff = row_sub[a] / dm.pi1(s.rows[a]) - row_sub[b] / dm.pi1(s.rows[b]);
        yg.c1 += -0.5 * gm[a][b] * diff * diff;
      }
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t e = 0; e < d; ++e) {
        if (c == e) continue;
        const double diff = col_sub[c] / dd.pi1(s.cols[c]) - col_sub[e] / dd.pi1(s.cols[e]);
        yg.c2 += -0.5 * gd[c][e] * diff * diff;
      }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t b = 0; b < m; ++b)
          for (std::size_t e = 0; e < d; ++e) {
            if (a == b && c == e) continue;
            const double diff = w(a, c) - w(b, e);
            yg.c3 += -0.5 * gm[a][b] * gd[c][e] * diff * diff;
          }
    yg.total = yg.c1 + yg.c2 - yg.c3;
    out.yg = yg;
    out.simplified = SimplifiedEstimates{yg.c1, yg.c2, yg.c1 + yg.c2};
  }
  finish_flags(out, w);
  return out;
}

namespace {

// sum_h N_h^2 (1/n_h - 1/N_h) s_h^2 over the sub-totals of one dimension.
double stratified_fpc_variance(const Design& design, const std::vector<std::size_t>& units,
                               const std::vector<double>& subtotals) {
  if (design.kind() == DesignKind::kPoisson) {
    throw std::invalid_argument("closed-form simplified estimators need SI or STSI designs");
  }
  const auto& strata = design.strata();
  std::vector<double> sum(strata.size(), 0.0), sum_sq(strata.size(), 0.0);
  std::vector<std::size_t> count(strata.size(), 0);
  for (std::size_t a = 0; a < units.size(); ++a) {
    const std::size_t h = design.stratum_of(units[a]);
    sum[h] += subtotals[a];
    ++count[h];
  }
  for (std::size_t h = 0; h < strata.size(); ++h) {
    if (count[h] != strata[h].take) {
      throw std::invalid_argument("sample does not hold n_h units in stratum " +
                                  std::to_string(h + 1));
    }
  }
  std::vector<double> mean(strata.size());
  for (std::size_t h = 0; h < strata.size(); ++h) mean[h] = sum[h] / static_cast<double>(count[h]);
  for (std::size_t a = 0; a < units.size(); ++a) {
    const std::size_t h = design.stratum_of(units[a]);
    const double dev = subtotals[a] - mean[h];
    sum_sq[h] += dev * dev;
  }
  double total = 0.0;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    const double n = static_cast<double>(strata[h].take);
    const double big_n = static_cast<double>(strata[h].size);
    if (strata[h].take < 2) continue;  // no within-stratum pairs
    total += big_n * big_n * (1.0 / n - 1.0 / big_n) * sum_sq[h] / (n - 1.0);
  }
  return total;
}

}  // namespace

SimplifiedEstimates simplified_closed_form(const Grid& sampled, const Design& dm,
                                           const Design& dd, const CrossSample& s) {
  const SampleEstimate est = ht_total_sampled(sampled, dm, dd, s);
  SimplifiedEstimates out;
  out.simp1 = stratified_fpc_variance(dm, s.rows, est.row_subtotals);
  out.simp2 = stratified_fpc_variance(dd, s.cols, est.col_subtotals);
  out.simp3 = out.simp1 + out.simp2;
  return out;
}

std::optional<NegativeWitness> find_negative_case(const ModelParams& base, const Design& dm,
                                                  const Design& dd, std::size_t budget,
                                                  std::uint64_t seed) {
  if (budget == 0) throw std::invalid_argument("find_negative_case: budget must be positive");
  for (std::size_t t = 0; t < budget; ++t) {
    ModelParams params = base;
    params.seed = RandomStream::derive(seed, static_cast<std::uint64_t>(StreamFamily::kSearch), t);
    PopulationGrid grid = generate_grid(params);
    RandomStream stream(seed, StreamFamily::kSearch, t);
    CrossSample s = draw_cross_sample(dm, dd, stream);
    const Grid sampled = grid.values.restricted(s.rows, s.cols);
    const VarianceEstimates v = estimate_variances(sampled, dm, dd, s);
    if (v.negative_ht || v.negative_yg) return NegativeWitness{std::move(grid), std::move(s), v, t};
  }
  return std::nullopt;
}

}  // namespace ccs
