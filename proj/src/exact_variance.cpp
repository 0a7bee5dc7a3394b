#include "ccs/exact_variance.hpp"

#include <stdexcept>
#include <string>

#include "ccs/kernel.hpp"

namespace ccs {

namespace {

void check_shapes(const PopulationGrid& y, const Design& dm, const Design& dd) {
  if (dm.population_size() != y.n_rows() || dd.population_size() != y.n_cols()) {
    throw std::invalid_argument("design sizes (" + std::to_string(dm.population_size()) + ", " +
                                std::to_string(dd.population_size()) +
                                ") do not match population grid (" +
                                std::to_string(y.n_rows()) + ", " + std::to_string(y.n_cols()) +
                                ")");
  }
}

void check_generic_size(const PopulationGrid& y, double limit) {
  const double nm = static_cast<double>(y.n_rows());
  const double nd = static_cast<double>(y.n_cols());
  if (nm * nm * nd * nd > limit) {
    throw std::length_error("population too large for the quadruple-sum path (" +
                            std::to_string(nm * nm * nd * nd) + " terms)");
  }
}

// pi_kl for k != l, zero diagonal.
StructuredKernel offdiagonal_joint(const Design& d) {
  const StructuredKernel joint = d.joint_kernel();
  std::vector<double> diag = *joint.diag();
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] -= d.pi1(i);
  return {joint.size(), make_shared_vector(std::move(diag)), joint.terms()};
}

}  // namespace

double gamma(const Design& dm, const Design& dd, std::size_t i, std::size_t j, std::size_t k,
             std::size_t l) {
  return dm.pi2(i, j) * dd.pi2(k, l) - dm.pi1(i) * dm.pi1(j) * dd.pi1(k) * dd.pi1(l);
}

Grid expanded_population(const PopulationGrid& y, const Design& dm, const Design& dd) {
  check_shapes(y, dm, dd);
  Grid w(y.n_rows(), y.n_cols());
  for (std::size_t i = 0; i < y.n_rows(); ++i) {
    const double pi = dm.pi1(i);
    if (pi <= 0.0) {
      throw std::domain_error("zero inclusion probability for row " + std::to_string(i + 1));
    }
    for (std::size_t k = 0; k < y.n_cols(); ++k) {
      const double pk = dd.pi1(k);
      if (pk <= 0.0) {
        throw std::domain_error("zero inclusion probability for column " + std::to_string(k + 1));
      }
      w(i, k) = y.values(i, k) / (pi * pk);
    }
  }
  return w;
}

double v_ccs_generic(const PopulationGrid& y, const Design& dm, const Design& dd,
                     double term_limit) {
  check_generic_size(y, term_limit);
  const Grid w = expanded_population(y, dm, dd);
  const std::size_t nm = y.n_rows(), nd = y.n_cols();
  double total = 0.0;
  for (std::size_t i = 0; i < nm; ++i)
    for (std::size_t j = 0; j < nm; ++j)
      for (std::size_t k = 0; k < nd; ++k)
        for (std::size_t l = 0; l < nd; ++l) total += gamma(dm, dd, i, j, k, l) * w(i, k) * w(j, l);
  return total;
}

double v_ccs_syg(const PopulationGrid& y, const Design& dm, const Design& dd, double term_limit) {
  if (!dm.fixed_size() || !dd.fixed_size()) {
    throw std::invalid_argument("the pairwise-difference variance form needs fixed-size designs");
  }
  check_generic_size(y, term_limit);
  const Grid w = expanded_population(y, dm, dd);
  const std::size_t nm = y.n_rows(), nd = y.n_cols();
  double total = 0.0;
  for (std::size_t i = 0; i < nm; ++i)
    for (std::size_t k = 0; k < nd; ++k)
      for (std::size_t j = 0; j < nm; ++j)
        for (std::size_t l = 0; l < nd; ++l) {
          if (i == j && k == l) continue;
          const double diff = w(i, k) - w(j, l);
          total += gamma(dm, dd, i, j, k, l) * diff * diff;
        }
  return -0.5 * total;
}

ExactVarianceReport decompose_generic(const PopulationGrid& y, const Design& dm,
                                      const Design& dd, double term_limit) {
  check_generic_size(y, term_limit);
  const Grid w = expanded_population(y, dm, dd);
  const auto joint_m = dm.dense_joint(), joint_d = dd.dense_joint();
  const auto delta_m = dm.dense_delta(), delta_d = dd.dense_delta();
  auto outer = [](const Design& d) {
    const std::size_t n = d.population_size();
    std::vector<std::vector<double>> o(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) o[i][j] = d.pi1(i) * d.pi1(j);
    return o;
  };
  auto diagonal = [](const Design& d) {
    const std::size_t n = d.population_size();
    std::vector<std::vector<double>> o(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) o[i][i] = d.pi1(i);
    return o;
  };
  ExactVarianceReport r;
  r.v_ccs = v_ccs_generic(y, dm, dd, term_limit);
  r.v1 = dense_quadratic_form(delta_m, joint_d, w);
  r.v2 = dense_quadratic_form(joint_m, delta_d, w);
  r.v3 = dense_quadratic_form(delta_m, delta_d, w);
  r.v_md_psu = dense_quadratic_form(delta_m, outer(dd), w);
  r.v_md_ssu = dense_quadratic_form(diagonal(dm), delta_d, w);
  r.v_dm_psu = dense_quadratic_form(outer(dm), delta_d, w);
  r.v_dm_ssu = dense_quadratic_form(delta_m, diagonal(dd), w);
  r.v_md = r.v_md_psu + r.v_md_ssu;
  r.v_dm = r.v_dm_psu + r.v_dm_ssu;
  return r;
}

ExactVarianceReport decompose(const PopulationGrid& y, const Design& dm, const Design& dd) {
  const Grid w = expanded_population(y, dm, dd);
  QuadraticForms q(w);
  const auto joint_m = dm.joint_kernel(), joint_d = dd.joint_kernel();
  const auto delta_m = dm.delta_kernel(), delta_d = dd.delta_kernel();
  const auto outer_m = dm.outer_kernel(), outer_d = dd.outer_kernel();
  const auto diag_m = dm.inclusion_diagonal(), diag_d = dd.inclusion_diagonal();
  ExactVarianceReport r;
  r.v1 = q.evaluate(delta_m, joint_d);
  r.v2 = q.evaluate(joint_m, delta_d);
  r.v3 = q.evaluate(delta_m, delta_d);
  r.v_md_psu = q.evaluate(delta_m, outer_d);
  r.v_md_ssu = q.evaluate(diag_m, delta_d);
  r.v_dm_psu = q.evaluate(outer_m, delta_d);
  r.v_dm_ssu = q.evaluate(delta_m, diag_d);
  r.v_md = r.v_md_psu + r.v_md_ssu;
  r.v_dm = r.v_dm_psu + r.v_dm_ssu;
  // Gamma = Delta^M pi^D pi^D + Delta^D pi^M pi^M + Delta^M Delta^D avoids
  // subtracting t_Y^2 from a sum of the same magnitude.
  r.v_ccs = r.v_md_psu + r.v_dm_psu + r.v3;
  return r;
}

DesignDifference ccs_vs_dm_difference(const PopulationGrid& y, const Design& dm,
                                      const Design& dd, double pair_work_limit) {
  const Grid w = expanded_population(y, dm, dd);
  QuadraticForms q(w);
  DesignDifference out;
  out.ccs_minus_dm = q.evaluate(dm.delta_kernel(), offdiagonal_joint(dd));

  const std::size_t nm = y.n_rows(), nd = y.n_cols();
  const StructuredKernel ratio = dd.offdiagonal_joint_ratio_kernel();
  const double work = static_cast<double>(nm) * static_cast<double>(nm) *
                      static_cast<double>(nd) * static_cast<double>(ratio.terms().size() + 1);
  if (!dm.fixed_size() || work > pair_work_limit) return out;

  // sum_{i != j} (-Delta_ij / 2) sum_{k != l} pi_kl/(pi_k pi_l) d_k d_l with
  // d_k = Y_ik/pi_i - Y_jk/pi_j; each unordered pair counted once.
  std::vector<double> d(nd);
  double total = 0.0;
  for (std::size_t i = 0; i < nm; ++i) {
    for (std::size_t j = i + 1; j < nm; ++j) {
      const double delta = dm.delta(i, j);
      if (delta == 0.0) continue;
      const double pi = dm.pi1(i), pj = dm.pi1(j);
      for (std::size_t k = 0; k < nd; ++k) d[k] = y.values(i, k) / pi - y.values(j, k) / pj;
      double f = 0.0;
      const auto& diag = *ratio.diag();
      for (std::size_t k = 0; k < nd; ++k) f += diag[k] * d[k] * d[k];
      for (const auto& t : ratio.terms()) {
        double s = 0.0;
        for (std::size_t k = 0; k < nd; ++k) s += (*t.vec)[k] * d[k];
        f += t.weight * s * s;
      }
      total += -delta * f;
    }
  }
  out.fixed_size_form = total;
  return out;
}

double ccs_vs_dm_difference_generic(const PopulationGrid& y, const Design& dm, const Design& dd,
                                    double term_limit) {
  check_generic_size(y, term_limit);
  const Grid w = expanded_population(y, dm, dd);
  const std::size_t nm = y.n_rows(), nd = y.n_cols();
  double total = 0.0;
  for (std::size_t i = 0; i < nm; ++i)
    for (std::size_t j = 0; j < nm; ++j) {
      const double delta = dm.delta(i, j);
      double inner = 0.0;
      for (std::size_t k = 0; k < nd; ++k)
        for (std::size_t l = 0; l < nd; ++l)
          if (k != l) inner += dd.pi2(k, l) * w(i, k) * w(j, l);
      total += delta * inner;
    }
  return total;
}

std::vector<SizeRatio> variance_ratio_sweep(
    const PopulationGrid& y, const std::vector<std::pair<std::size_t, std::size_t>>& sizes) {
  std::vector<SizeRatio> out;
  out.reserve(sizes.size());
  for (const auto& [n_m, n_d] : sizes) {
    const Design dm = Design::simple_random(y.n_rows(), n_m);
    const Design dd = Design::simple_random(y.n_cols(), n_d);
    const ExactVarianceReport r = decompose(y, dm, dd);
    SizeRatio row{n_m, n_d, r.v_ccs, r.v_md, std::nullopt};
    if (r.v_ccs != 0.0) row.ratio_pct = 100.0 * r.v_md / r.v_ccs;
    out.push_back(row);
  }
  return out;
}

}  // namespace ccs
