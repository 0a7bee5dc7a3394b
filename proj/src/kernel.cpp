#include "ccs/kernel.hpp"

#include <numeric>
#include <stdexcept>

namespace ccs {

StructuredKernel::StructuredKernel(std::size_t n, SharedVector diag,
                                   std::vector<RankOneTerm> terms)
    : n_(n), diag_(std::move(diag)), terms_(std::move(terms)) {
  if (diag_ && diag_->size() != n_) {
    throw std::invalid_argument("StructuredKernel: diagonal length mismatch");
  }
  for (const auto& t : terms_) {
    if (!t.vec || t.vec->size() != n_) {
      throw std::invalid_argument("StructuredKernel: term length mismatch");
    }
  }
}

StructuredKernel StructuredKernel::ones(std::size_t n) {
  return {n, nullptr, {{1.0, make_shared_vector(std::vector<double>(n, 1.0))}}};
}

StructuredKernel StructuredKernel::diagonal(std::vector<double> d) {
  const std::size_t n = d.size();
  return {n, make_shared_vector(std::move(d)), {}};
}

StructuredKernel StructuredKernel::outer(std::vector<double> u) {
  const std::size_t n = u.size();
  return {n, nullptr, {{1.0, make_shared_vector(std::move(u))}}};
}

double StructuredKernel::at(std::size_t i, std::size_t j) const {
  double v = (i == j && diag_) ? (*diag_)[i] : 0.0;
  for (const auto& t : terms_) v += t.weight * (*t.vec)[i] * (*t.vec)[j];
  return v;
}

std::vector<double> StructuredKernel::row_sums() const {
  std::vector<double> out = diag_ ? *diag_ : std::vector<double>(n_, 0.0);
  for (const auto& t : terms_) {
    const double s = std::accumulate(t.vec->begin(), t.vec->end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) out[i] += t.weight * (*t.vec)[i] * s;
  }
  return out;
}

std::vector<std::vector<double>> StructuredKernel::dense() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = at(i, j);
  return out;
}

QuadraticForms::QuadraticForms(const Grid& weighted) : w_(weighted) {}

const std::vector<double>& QuadraticForms::right_projection(const SharedVector& v) {
  auto it = right_.find(v.get());
  if (it != right_.end()) return it->second.value;
  std::vector<double> out(w_.rows(), 0.0);
  const auto& vv = *v;
  for (std::size_t i = 0; i < w_.rows(); ++i) {
    const auto r = w_.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * vv[k];
    out[i] = s;
  }
  return right_.emplace(v.get(), Entry<std::vector<double>>{v, std::move(out)})
      .first->second.value;
}

const std::vector<double>& QuadraticForms::left_projection(const SharedVector& u) {
  auto it = left_.find(u.get());
  if (it != left_.end()) return it->second.value;
  std::vector<double> out(w_.cols(), 0.0);
  const auto& uu = *u;
  for (std::size_t i = 0; i < w_.rows(); ++i) {
    if (uu[i] == 0.0) continue;
    const auto r = w_.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) out[k] += uu[i] * r[k];
  }
  return left_.emplace(u.get(), Entry<std::vector<double>>{u, std::move(out)})
      .first->second.value;
}

const std::vector<double>& QuadraticForms::row_squares(const SharedVector& b) {
  auto it = squares_.find(b.get());
  if (it != squares_.end()) return it->second.value;
  std::vector<double> out(w_.rows(), 0.0);
  const auto& bb = *b;
  for (std::size_t i = 0; i < w_.rows(); ++i) {
    const auto r = w_.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += bb[k] * r[k] * r[k];
    out[i] = s;
  }
  return squares_.emplace(b.get(), Entry<std::vector<double>>{b, std::move(out)})
      .first->second.value;
}

double QuadraticForms::weighted_squares(const std::vector<double>& a, const SharedVector& b) {
  const auto& q = row_squares(b);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += a[i] * q[i];
  return s;
}

double QuadraticForms::evaluate(const StructuredKernel& rk, const StructuredKernel& ck) {
  if (rk.size() != w_.rows() || ck.size() != w_.cols()) {
    throw std::invalid_argument("QuadraticForms: kernel sizes do not match grid");
  }
  double total = 0.0;
  if (rk.diag() && ck.diag()) total += weighted_squares(*rk.diag(), ck.diag());
  if (rk.diag()) {
    const auto& a = *rk.diag();
    for (const auto& t : ck.terms()) {
      const auto& p = right_projection(t.vec);
      double s = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) s += a[i] * p[i] * p[i];
      total += t.weight * s;
    }
  }
  if (ck.diag()) {
    const auto& b = *ck.diag();
    for (const auto& t : rk.terms()) {
      const auto& p = left_projection(t.vec);
      double s = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) s += b[k] * p[k] * p[k];
      total += t.weight * s;
    }
  }
  for (const auto& tc : ck.terms()) {
    const auto& p = right_projection(tc.vec);
    for (const auto& tr : rk.terms()) {
      const auto& u = *tr.vec;
      double s = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) s += u[i] * p[i];
      total += tr.weight * tc.weight * s * s;
    }
  }
  return total;
}

double dense_quadratic_form(const std::vector<std::vector<double>>& a,
                            const std::vector<std::vector<double>>& b,
                            const Grid& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.rows(); ++j) {
      if (a[i][j] == 0.0) continue;
      double inner = 0.0;
      for (std::size_t k = 0; k < w.cols(); ++k)
        for (std::size_t l = 0; l < w.cols(); ++l) inner += b[k][l] * w(i, k) * w(j, l);
      total += a[i][j] * inner;
    }
  return total;
}

}  // namespace ccs
