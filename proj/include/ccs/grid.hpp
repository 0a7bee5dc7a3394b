#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ccs {

// Dense row-major matrix of reals. Rows index the first dimension
// (maternities), columns the second (days).
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Grid(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double total() const;
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  Grid scaled(double factor) const;
  Grid restricted(std::span<const std::size_t> rows,
                  std::span<const std::size_t> cols) const;

  bool operator==(const Grid&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A population variable Y_ik over N_M x N_D cells.
struct PopulationGrid {
  Grid values;
  std::string label;

  std::size_t n_rows() const { return values.rows(); }
  std::size_t n_cols() const { return values.cols(); }
  double total() const { return values.total(); }
};

}  // namespace ccs
