#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "ccs/grid.hpp"

namespace ccs {

using SharedVector = std::shared_ptr<const std::vector<double>>;

inline SharedVector make_shared_vector(std::vector<double> v) {
  return std::make_shared<const std::vector<double>>(std::move(v));
}

struct RankOneTerm {
  double weight = 0.0;
  SharedVector vec;
};

// Symmetric matrix stored as diag(d) + sum_t w_t u_t u_t^T. Every pairwise
// matrix of an SI, STSI or Poisson design (pi_ij, Delta_ij, pi_i pi_j,
// Delta_ij / pi_ij) has this form with at most H + 1 terms, H = strata count.
// A null diagonal means a zero diagonal.
class StructuredKernel {
 public:
  StructuredKernel() = default;
  StructuredKernel(std::size_t n, SharedVector diag, std::vector<RankOneTerm> terms);

  static StructuredKernel ones(std::size_t n);
  static StructuredKernel diagonal(std::vector<double> d);
  static StructuredKernel outer(std::vector<double> u);

  std::size_t size() const { return n_; }
  const SharedVector& diag() const { return diag_; }
  const std::vector<RankOneTerm>& terms() const { return terms_; }

  double at(std::size_t i, std::size_t j) const;
  std::vector<double> row_sums() const;
  std::vector<std::vector<double>> dense() const;

 private:
  std::size_t n_ = 0;
  SharedVector diag_;
  std::vector<RankOneTerm> terms_;
};

// Evaluates Q(A, B) = sum_{i,j} sum_{k,l} A_ij B_kl W_ik W_jl for a fixed
// weighted grid W in O(rows * cols) per distinct vector, caching the
// projections of W on every vector it has seen. Vectors are shared-owned so a
// cached address cannot be recycled while the cache lives.
class QuadraticForms {
 public:
  explicit QuadraticForms(const Grid& weighted);

  double evaluate(const StructuredKernel& row_kernel, const StructuredKernel& col_kernel);

  // sum_ik a_i b_k W_ik^2
  double weighted_squares(const std::vector<double>& a, const SharedVector& b);

  // W v (length rows) and u^T W (length cols)
  const std::vector<double>& right_projection(const SharedVector& v);
  const std::vector<double>& left_projection(const SharedVector& u);

 private:
  const std::vector<double>& row_squares(const SharedVector& b);

  const Grid& w_;
  template <typename T>
  struct Entry {
    SharedVector key;
    T value;
  };
  std::unordered_map<const void*, Entry<std::vector<double>>> right_;
  std::unordered_map<const void*, Entry<std::vector<double>>> left_;
  std::unordered_map<const void*, Entry<std::vector<double>>> squares_;
};

// Literal quadruple sum over dense matrices; reference path for small grids.
double dense_quadratic_form(const std::vector<std::vector<double>>& row_matrix,
                            const std::vector<std::vector<double>>& col_matrix,
                            const Grid& weighted);

}  // namespace ccs
