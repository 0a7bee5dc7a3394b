#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccs/design.hpp"
#include "ccs/grid.hpp"
#include "ccs/ht_estimation.hpp"

namespace ccs {

enum class Target { kTotal, kRatio };
enum class TruthMode { kMonteCarlo, kExact };

// Estimators tracked by the replication engine, in report order.
enum class Estimator : std::size_t { kHt = 0, kYg, kSimp1, kSimp2, kSimp3 };
inline constexpr std::size_t kEstimatorCount = 5;
inline constexpr std::array<const char*, kEstimatorCount> kEstimatorNames = {
    "v_ht", "v_yg", "v_simp1", "v_simp2", "v_simp3"};

struct ExperimentSpec {
  std::shared_ptr<const PopulationGrid> y;
  std::shared_ptr<const PopulationGrid> x;  // denominator variable for ratios
  Design dm;
  Design dd;
  Target target = Target::kTotal;
  std::size_t reps = 10'000;
  std::size_t truth_reps = 50'000;
  std::uint64_t seed = 1;
  std::optional<double> ci_level;
  TruthMode truth = TruthMode::kMonteCarlo;
  std::string label;

  void validate() const;
};

struct SimulationSummary {
  std::string label;
  double parameter = 0.0;  // t_Y or R = t_Y / t_X
  double mean_estimate = 0.0;
  std::array<std::optional<double>, kEstimatorCount> rb_mc{};     // percent
  std::array<std::optional<double>, kEstimatorCount> rb_mc_se{};   // percent
  std::array<std::optional<double>, kEstimatorCount> mean_variance{};
  std::size_t neg_v_ht = 0;
  std::size_t neg_v_yg = 0;
  double true_variance = 0.0;
  double true_variance_se = 0.0;
  std::optional<double> coverage;
  std::size_t skipped = 0;        // replications with that_X == 0
  std::size_t truth_skipped = 0;  // truth draws with that_X == 0
  double elapsed_ms = 0.0;
};

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Replication b draws its cross sample from stream (seed, kReplication, b);
// truth draw t from (seed, kTruth, t). Per-draw results are reduced in index
// order, so the summary does not depend on the thread count.
SimulationSummary run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

struct TableRow {
  ExperimentSpec spec;
  std::optional<SimulationSummary> summary;
  std::string error;  // set when the cell failed
};

std::vector<TableRow> run_table(const std::vector<ExperimentSpec>& matrix,
                                const RunOptions& options = {});

// Empirical coverage of normal intervals built with SIMP3.
double coverage_study(ExperimentSpec spec, double level, const RunOptions& options = {});

// HT total without intermediate grids; the hot loop of truth replications.
double ht_total_value(const Grid& y, const Design& dm, const Design& dd, const CrossSample& s);

double normal_quantile(double p);

}  // namespace ccs
