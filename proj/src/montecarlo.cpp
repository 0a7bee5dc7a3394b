#include "ccs/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "ccs/exact_variance.hpp"
#include "ccs/random.hpp"
#include "ccs/variance_estimation.hpp"

namespace ccs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

unsigned resolve_threads(unsigned requested) {
  if (requested) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Runs body(index) for every index in [0, count). The first failure by index
// is rethrown after all workers finish.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
  constexpr std::size_t kChunk = 16;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::string error_message;
  auto worker = [&] {
    while (true) {
      const std::size_t start = next.fetch_add(kChunk);
      if (start >= count) return;
      const std::size_t stop = std::min(count, start + kChunk);
      for (std::size_t b = start; b < stop; ++b) {
        try {
          body(b);
        } catch (const std::exception& e) {
          std::lock_guard lock(error_mutex);
          if (b < error_index) {
            error_index = b;
            error_message = e.what();
          }
        }
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                                  (count + kChunk - 1) / kChunk)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (error_index != std::numeric_limits<std::size_t>::max()) {
    throw std::runtime_error("replication " + std::to_string(error_index) + ": " + error_message);
  }
}

struct Replication {
  bool skipped = false;
  double estimate = kNaN;
  std::array<double, kEstimatorCount> variance{kNaN, kNaN, kNaN, kNaN, kNaN};
  bool covered = false;
  bool negative_ht = false;
  bool negative_yg = false;
};

}  // namespace

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

void ExperimentSpec::validate() const {
  if (!y) throw std::invalid_argument("experiment: no population variable");
  if (reps == 0) throw std::invalid_argument("experiment: reps must be at least 1");
  if (dm.population_size() != y->n_rows() || dd.population_size() != y->n_cols()) {
    throw std::invalid_argument("experiment: design sizes (" +
                                std::to_string(dm.population_size()) + ", " +
                                std::to_string(dd.population_size()) +
                                ") do not match the population (" + std::to_string(y->n_rows()) +
                                ", " + std::to_string(y->n_cols()) + ")");
  }
  if (target == Target::kRatio) {
    if (!x) throw std::invalid_argument("experiment: ratio target needs a second variable");
    if (x->n_rows() != y->n_rows() || x->n_cols() != y->n_cols()) {
      throw std::invalid_argument("experiment: ratio variables differ in shape");
    }
    if (truth == TruthMode::kExact) {
      throw std::invalid_argument("experiment: exact truth is only available for totals");
    }
  }
  if (truth == TruthMode::kMonteCarlo && truth_reps < 2) {
    throw std::invalid_argument("experiment: truth_reps must be at least 2");
  }
  if (ci_level && !(*ci_level > 0.0 && *ci_level < 1.0)) {
    throw std::invalid_argument("experiment: ci_level must lie in (0, 1)");
  }
}

double ht_total_value(const Grid& y, const Design& dm, const Design& dd, const CrossSample& s) {
  thread_local std::vector<double> inv_col;
  inv_col.resize(s.cols.size());
  for (std::size_t b = 0; b < s.cols.size(); ++b) inv_col[b] = 1.0 / dd.pi1(s.cols[b]);
  double total = 0.0;
  for (std::size_t i : s.rows) {
    const auto r = y.row(i);
    double acc = 0.0;
    for (std::size_t b = 0; b < s.cols.size(); ++b) acc += r[s.cols[b]] * inv_col[b];
    total += acc / dm.pi1(i);
  }
  return total;
}

SimulationSummary run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  const auto started = std::chrono::steady_clock::now();
  const unsigned threads = resolve_threads(options.threads);
  const bool ratio = spec.target == Target::kRatio;
  const Grid& y = spec.y->values;
  const Grid* x = ratio ? &spec.x->values : nullptr;

  SimulationSummary out;
  out.label = spec.label;
  out.parameter = ratio ? y.total() / x->total() : y.total();

  // True variance of the point estimator.
  if (spec.truth == TruthMode::kExact) {
    out.true_variance = decompose(*spec.y, spec.dm, spec.dd).v_ccs;
  } else {
    std::vector<double> draws(spec.truth_reps, kNaN);
    parallel_for(spec.truth_reps, threads, [&](std::size_t t) {
      RandomStream stream(spec.seed, StreamFamily::kTruth, t);
      const CrossSample s = draw_cross_sample(spec.dm, spec.dd, stream);
      const double ty = ht_total_value(y, spec.dm, spec.dd, s);
      if (!ratio) {
        draws[t] = ty;
        return;
      }
      const double tx = ht_total_value(*x, spec.dm, spec.dd, s);
      if (tx != 0.0) draws[t] = ty / tx;
    });
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : draws) {
      if (std::isnan(v)) continue;
      sum += v;
      ++n;
    }
    out.truth_skipped = draws.size() - n;
    if (n < 2) throw std::runtime_error("truth replications: fewer than two usable draws");
    const double mean = sum / static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (double v : draws) {
      if (std::isnan(v)) continue;
      const double d2 = (v - mean) * (v - mean);
      m2 += d2;
      m4 += d2 * d2;
    }
    const double dn = static_cast<double>(n);
    out.true_variance = m2 / (dn - 1.0);
    const double pop_var = m2 / dn;
    out.true_variance_se = std::sqrt(std::max(0.0, m4 / dn - pop_var * pop_var) / dn);
  }

  const double z = spec.ci_level ? normal_quantile(0.5 + 0.5 * *spec.ci_level) : 0.0;
  std::vector<Replication> reps(spec.reps);
  parallel_for(spec.reps, threads, [&](std::size_t b) {
    RandomStream stream(spec.seed, StreamFamily::kReplication, b);
    const CrossSample s = draw_cross_sample(spec.dm, spec.dd, stream);
    Replication& rep = reps[b];
    Grid values = y.restricted(s.rows, s.cols);
    if (ratio) {
      const Grid xs = x->restricted(s.rows, s.cols);
      const double ty = ht_total_sampled(values, spec.dm, spec.dd, s).total;
      const double tx = ht_total_sampled(xs, spec.dm, spec.dd, s).total;
      if (tx == 0.0) {
        rep.skipped = true;
        return;
      }
      rep.estimate = ty / tx;
      values = linearize_sampled(values, xs, rep.estimate, tx);
    } else {
      rep.estimate = ht_total_sampled(values, spec.dm, spec.dd, s).total;
    }
    const VarianceEstimates v = estimate_variances(values, spec.dm, spec.dd, s);
    rep.variance[0] = v.ht.total;
    rep.negative_ht = v.negative_ht;
    rep.negative_yg = v.negative_yg;
    if (v.yg) rep.variance[1] = v.yg->total;
    if (v.simplified) {
      rep.variance[2] = v.simplified->simp1;
      rep.variance[3] = v.simplified->simp2;
      rep.variance[4] = v.simplified->simp3;
    }
    if (spec.ci_level) {
      const double ci_var = v.simplified ? v.simplified->simp3 : v.ht.total;
      const double half = z * std::sqrt(std::max(ci_var, 0.0));
      // Rounding slack so a zero-width interval still covers an exact estimate.
      const double slack = 1e-12 * std::fabs(out.parameter);
      rep.covered = std::fabs(rep.estimate - out.parameter) <= half + slack;
    }
  });

  std::size_t used = 0, covered = 0;
  double est_sum = 0.0;
  std::array<double, kEstimatorCount> sum{};
  std::array<std::size_t, kEstimatorCount> count{};
  for (const Replication& rep : reps) {
    if (rep.skipped) {
      ++out.skipped;
      continue;
    }
    ++used;
    est_sum += rep.estimate;
    if (rep.covered) ++covered;
    for (std::size_t e = 0; e < kEstimatorCount; ++e) {
      const double v = rep.variance[e];
      if (std::isnan(v)) continue;
      sum[e] += v;
      ++count[e];
    }
    if (rep.negative_ht) ++out.neg_v_ht;
    if (rep.negative_yg) ++out.neg_v_yg;
  }
  if (used == 0) throw std::runtime_error("every replication was skipped");
  out.mean_estimate = est_sum / static_cast<double>(used);
  for (std::size_t e = 0; e < kEstimatorCount; ++e) {
    if (count[e] == 0) continue;
    const double n = static_cast<double>(count[e]);
    const double mean = sum[e] / n;
    out.mean_variance[e] = mean;
    if (out.true_variance != 0.0) {
      out.rb_mc[e] = 100.0 * (mean - out.true_variance) / out.true_variance;
      if (count[e] > 1) {
        double ss = 0.0;
        for (const Replication& rep : reps) {
          const double v = rep.variance[e];
          if (!rep.skipped && !std::isnan(v)) ss += (v - mean) * (v - mean);
        }
        out.rb_mc_se[e] = 100.0 * std::sqrt(ss / (n - 1.0) / n) / std::fabs(out.true_variance);
      }
    }
  }
  if (spec.ci_level) out.coverage = static_cast<double>(covered) / static_cast<double>(used);
  out.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             started)
                       .count();
  return out;
}

std::vector<TableRow> run_table(const std::vector<ExperimentSpec>& matrix,
                                const RunOptions& options) {
  std::vector<TableRow> out;
  out.reserve(matrix.size());
  for (const auto& spec : matrix) {
    TableRow row{spec, std::nullopt, {}};
    try {
      row.summary = run_experiment(spec, options);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

double coverage_study(ExperimentSpec spec, double level, const RunOptions& options) {
  spec.ci_level = level;
  return *run_experiment(spec, options).coverage;
}

}  // namespace ccs
