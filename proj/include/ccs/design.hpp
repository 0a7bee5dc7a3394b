#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccs/kernel.hpp"
#include "ccs/random.hpp"

namespace ccs {

enum class DesignKind { kSimpleRandom, kStratified, kPoisson };

struct Stratum {
  std::size_t size = 0;  // N_h
  std::size_t take = 0;  // n_h
};

struct WeightedSample {
  std::vector<std::size_t> units;  // sorted, 0-based
  double probability = 0.0;
};

// One-dimensional sampling design over units 0..N-1. SI is a single-stratum
// STSI internally; strata are contiguous blocks in declaration order.
class Design {
 public:
  Design() = default;  // empty design; assign a real one before use

  static Design simple_random(std::size_t population, std::size_t n);
  static Design stratified(std::vector<Stratum> strata);
  static Design poisson(std::vector<double> probabilities);

  DesignKind kind() const { return kind_; }
  std::size_t population_size() const { return pi_.size(); }
  bool fixed_size() const { return kind_ != DesignKind::kPoisson; }
  double expected_size() const;
  const std::vector<Stratum>& strata() const { return strata_; }
  std::size_t stratum_of(std::size_t i) const;
  const std::vector<double>& inclusion() const { return pi_; }

  double pi1(std::size_t i) const;
  double pi2(std::size_t i, std::size_t j) const;
  double delta(std::size_t i, std::size_t j) const;

  std::vector<std::size_t> draw(RandomStream& stream) const;
  std::vector<WeightedSample> enumerate(std::size_t limit = 1'000'000) const;
  bool syg_condition_holds() const;

  // Population-level pairwise matrices in structured form.
  StructuredKernel joint_kernel() const;      // pi_ij
  StructuredKernel delta_kernel() const;      // Delta_ij
  StructuredKernel outer_kernel() const;      // pi_i pi_j
  StructuredKernel inclusion_diagonal() const;  // diag(pi_i)
  // pi_kl / (pi_k pi_l) with a zero diagonal.
  StructuredKernel offdiagonal_joint_ratio_kernel() const;

  // Delta_ij / pi_ij over the sampled units (positions follow `sample`).
  StructuredKernel sample_delta_ratio_kernel(std::span<const std::size_t> sample) const;
  // Dense version from the pi1/pi2 accessors; throws if a sampled pair has
  // zero joint probability.
  std::vector<std::vector<double>> dense_sample_delta_ratio(
      std::span<const std::size_t> sample) const;
  std::vector<std::vector<double>> dense_joint() const;
  std::vector<std::vector<double>> dense_delta() const;

  // Grammar form, e.g. "si(n=25)".
  std::string describe() const;

 private:
  void check_index(std::size_t i) const;
  double same_stratum_joint(std::size_t h) const;

  DesignKind kind_ = DesignKind::kSimpleRandom;
  std::vector<Stratum> strata_;
  std::vector<std::size_t> stratum_start_;
  std::vector<std::size_t> unit_stratum_;
  std::vector<double> pi_;
  std::string poisson_source_;
  friend Design parse_design(std::string_view, std::size_t);
};

class DesignParseError : public std::invalid_argument {
 public:
  DesignParseError(const std::string& message, std::size_t position)
      : std::invalid_argument(message + " (at column " + std::to_string(position + 1) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Parses `si(n=25)`, `stsi(108:21,108:41)`, `poisson(p=0.1)` or
// `poisson(file=probs.csv)`. `population_size` is the dimension the design is
// drawn on; it is validated against the strata total.
Design parse_design(std::string_view text, std::size_t population_size);

}  // namespace ccs
