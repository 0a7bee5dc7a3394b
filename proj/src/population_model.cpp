#include "ccs/population_model.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ccs/random.hpp"

namespace ccs {

void ModelParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(sigma_m) || !std::isfinite(sigma_d) ||
      !std::isfinite(sigma_e)) {
    throw std::invalid_argument("model parameters must be finite");
  }
  if (sigma_m < 0.0 || sigma_d < 0.0 || sigma_e < 0.0) {
    throw std::invalid_argument("model standard deviations must be non-negative");
  }
  if (n_rows == 0 || n_cols == 0) {
    throw std::invalid_argument("model grid dimensions must be positive");
  }
}

std::string ModelParams::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "model mu=" << mu << " sigma_m=" << sigma_m << " sigma_d=" << sigma_d
     << " sigma_e=" << sigma_e << " seed=" << seed;
  return os.str();
}

PopulationGrid generate_grid(const ModelParams& params) {
  params.validate();
  RandomStream stream(params.seed, StreamFamily::kPopulation);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(params.n_rows), v(params.n_cols);
  for (double& x : u) x = normal(stream);
  for (double& x : v) x = normal(stream);
  Grid g(params.n_rows, params.n_cols);
  for (std::size_t i = 0; i < params.n_rows; ++i) {
    auto row = g.row(i);
    const double base = params.mu + params.sigma_m * u[i];
    for (std::size_t k = 0; k < params.n_cols; ++k) {
      row[k] = base + params.sigma_d * v[k] + params.sigma_e * normal(stream);
    }
  }
  return {std::move(g), params.describe()};
}

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

double mean_probability(const Grid& z, double beta) {
  double s = 0.0;
  for (double v : z.data()) s += logistic(beta * v);
  return s / static_cast<double>(z.size());
}

}  // namespace

double calibrate_beta(const Grid& z, double target) {
  if (!(target > 0.0 && target < 1.0)) {
    throw std::invalid_argument("calibrate_beta: target must lie in (0, 1)");
  }
  if (z.empty()) throw std::invalid_argument("calibrate_beta: empty grid");
  // The mean is increasing in beta when every Z is positive (decreasing when
  // every Z is negative); mixed signs are handled as long as the bracket
  // endpoints straddle the target.
  double lo = -1.0, hi = 1.0;
  auto f = [&](double b) { return mean_probability(z, b) - target; };
  double flo = f(lo), fhi = f(hi);
  constexpr double kMaxBracket = 1e6;
  while (flo * fhi > 0.0 && hi < kMaxBracket) {
    lo *= 2.0;
    hi *= 2.0;
    flo = f(lo);
    fhi = f(hi);
  }
  if (flo * fhi > 0.0) {
    std::ostringstream os;
    os << "calibrate_beta: target " << target << " not reachable on bracket [" << lo << ", "
       << hi << "] (mean probability " << flo + target << " .. " << fhi + target << ")";
    throw std::domain_error(os.str());
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CountVariablePair generate_count_pair(const ModelParams& params, const ProbabilityMode& mode) {
  if (const auto* c = std::get_if<ConstantProbability>(&mode)) {
    if (!(c->p > 0.0 && c->p <= 1.0)) {
      throw std::invalid_argument("count pair: probability must lie in (0, 1]");
    }
  }
  const PopulationGrid zpop = generate_grid(params);
  const Grid& z = zpop.values;
  CountVariablePair out{{Grid(z.rows(), z.cols()), ""}, {Grid(z.rows(), z.cols()), ""}, mode};

  double beta = 0.0;
  if (const auto* l = std::get_if<LogitProbability>(&mode)) {
    beta = calibrate_beta(z, l->target_mean);
  }
  out.beta = beta;

  RandomStream stream(params.seed, StreamFamily::kCounts);
  double psum = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (std::size_t k = 0; k < z.cols(); ++k) {
      const double intensity = std::max(z(i, k), kPoissonFloor);
      std::poisson_distribution<long long> poisson(intensity);
      const long long xi = poisson(stream);
      const double p = std::holds_alternative<ConstantProbability>(mode)
                           ? std::get<ConstantProbability>(mode).p
                           : logistic(beta * z(i, k));
      psum += p;
      long long yi = xi;
      if (p < 1.0 && xi > 0) {
        std::binomial_distribution<long long> binom(xi, p);
        yi = binom(stream);
      }
      out.x.values(i, k) = static_cast<double>(xi);
      out.y.values(i, k) = static_cast<double>(yi);
    }
  }
  out.mean_probability = psum / static_cast<double>(z.size());
  std::ostringstream mode_text;
  mode_text.precision(17);
  if (const auto* c = std::get_if<ConstantProbability>(&mode)) {
    mode_text << "p=" << c->p;
  } else {
    mode_text << "logit beta=" << beta;
  }
  out.x.label = "counts x " + params.describe();
  out.y.label = "counts y " + mode_text.str() + " " + params.describe();
  return out;
}

}  // namespace ccs
