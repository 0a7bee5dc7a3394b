#include "ccs/grid.hpp"

#include <numeric>
#include <stdexcept>

namespace ccs {

Grid::Grid(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Grid: data length does not match dimensions");
  }
}

double Grid::total() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0);
}

std::vector<double> Grid::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto r = row(i);
    out[i] = std::accumulate(r.begin(), r.end(), 0.0);
  }
  return out;
}

std::vector<double> Grid::col_sums() const {
  std::vector<double> out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto r = row(i);
    for (std::size_t k = 0; k < cols_; ++k) out[k] += r[k];
  }
  return out;
}

Grid Grid::scaled(double factor) const {
  Grid out = *this;
  for (double& v : out.data_) v *= factor;
  return out;
}

Grid Grid::restricted(std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols) const {
  Grid out(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const auto src = row(rows[a]);
    auto dst = out.row(a);
    for (std::size_t b = 0; b < cols.size(); ++b) dst[b] = src[cols[b]];
  }
  return out;
}

}  // namespace ccs
