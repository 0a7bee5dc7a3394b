#include "ccs/design.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ccs {

namespace {

double binomial_count(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t t = 1; t <= k; ++t) c = c * static_cast<double>(n - k + t) / t;
  return c;
}

// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return out;
  while (true) {
    out.push_back(idx);
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t t = pos; t < k; ++t) idx[t] = idx[t - 1] + 1;
  }
  return out;
}

}  // namespace

Design Design::simple_random(std::size_t population, std::size_t n) {
  if (population == 0) throw std::invalid_argument("si: population size must be positive");
  if (n == 0 || n > population) {
    throw std::invalid_argument("si: sample size " + std::to_string(n) +
                                " outside [1, " + std::to_string(population) + "]");
  }
  Design d = stratified({{population, n}});
  d.kind_ = DesignKind::kSimpleRandom;
  return d;
}

Design Design::stratified(std::vector<Stratum> strata) {
  if (strata.empty()) throw std::invalid_argument("stsi: at least one stratum required");
  Design d;
  d.kind_ = DesignKind::kStratified;
  std::size_t start = 0;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    const auto [size, take] = strata[h];
    if (size == 0 || take == 0 || take > size) {
      throw std::invalid_argument("stsi: stratum " + std::to_string(h + 1) +
                                  " needs 1 <= n_h <= N_h (got " + std::to_string(size) +
                                  ":" + std::to_string(take) + ")");
    }
    d.stratum_start_.push_back(start);
    const double p = static_cast<double>(take) / static_cast<double>(size);
    for (std::size_t t = 0; t < size; ++t) {
      d.unit_stratum_.push_back(h);
      d.pi_.push_back(p);
    }
    start += size;
  }
  d.strata_ = std::move(strata);
  return d;
}

Design Design::poisson(std::vector<double> probabilities) {
  if (probabilities.empty()) throw std::invalid_argument("poisson: empty probability list");
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("poisson: probability of unit " + std::to_string(i + 1) +
                                  " outside [0, 1]");
    }
  }
  Design d;
  d.kind_ = DesignKind::kPoisson;
  d.pi_ = std::move(probabilities);
  return d;
}

double Design::expected_size() const { return std::accumulate(pi_.begin(), pi_.end(), 0.0); }

void Design::check_index(std::size_t i) const {
  if (i >= pi_.size()) {
    throw std::out_of_range("design: unit index " + std::to_string(i) +
                            " out of range for population of size " +
                            std::to_string(pi_.size()));
  }
}

std::size_t Design::stratum_of(std::size_t i) const {
  check_index(i);
  return kind_ == DesignKind::kPoisson ? 0 : unit_stratum_[i];
}

double Design::pi1(std::size_t i) const {
  check_index(i);
  return pi_[i];
}

double Design::same_stratum_joint(std::size_t h) const {
  const auto [size, take] = strata_[h];
  if (size < 2) return 0.0;
  return static_cast<double>(take) * static_cast<double>(take - 1) /
         (static_cast<double>(size) * static_cast<double>(size - 1));
}

double Design::pi2(std::size_t i, std::size_t j) const {
  check_index(i);
  check_index(j);
  if (i == j) return pi_[i];
  if (kind_ == DesignKind::kPoisson) return pi_[i] * pi_[j];
  const std::size_t h = unit_stratum_[i];
  if (h != unit_stratum_[j]) return pi_[i] * pi_[j];
  return same_stratum_joint(h);
}

double Design::delta(std::size_t i, std::size_t j) const {
  return pi2(i, j) - pi1(i) * pi1(j);
}

std::vector<std::size_t> Design::draw(RandomStream& stream) const {
  std::vector<std::size_t> out;
  if (kind_ == DesignKind::kPoisson) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < pi_.size(); ++i) {
      // Draw for every unit so the stream position does not depend on pi.
      const double r = u(stream);
      if (r < pi_[i]) out.push_back(i);
    }
    return out;
  }
  // Partial Fisher-Yates shuffle inside each stratum.
  std::vector<std::size_t> pool;
  for (std::size_t h = 0; h < strata_.size(); ++h) {
    const auto [size, take] = strata_[h];
    const std::size_t start = stratum_start_[h];
    if (take == size) {
      for (std::size_t t = 0; t < size; ++t) out.push_back(start + t);
      continue;
    }
    pool.resize(size);
    std::iota(pool.begin(), pool.end(), start);
    for (std::size_t t = 0; t < take; ++t) {
      std::uniform_int_distribution<std::size_t> pick(t, size - 1);
      std::swap(pool[t], pool[pick(stream)]);
    }
    const auto first = out.size();
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
  }
  return out;
}

std::vector<WeightedSample> Design::enumerate(std::size_t limit) const {
  if (kind_ == DesignKind::kPoisson) {
    const std::size_t n = pi_.size();
    if (n >= 63 || (std::size_t{1} << n) > limit) {
      throw std::length_error("enumerate: support of 2^" + std::to_string(n) +
                              " samples exceeds limit");
    }
    std::vector<WeightedSample> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      WeightedSample s;
      s.probability = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::size_t{1} << i)) {
          s.units.push_back(i);
          s.probability *= pi_[i];
        } else {
          s.probability *= 1.0 - pi_[i];
        }
      }
      out.push_back(std::move(s));
    }
    return out;
  }
  double support = 1.0;
  for (const auto& st : strata_) support *= binomial_count(st.size, st.take);
  if (support > static_cast<double>(limit)) {
    throw std::length_error("enumerate: support of " + std::to_string(support) +
                            " samples exceeds limit");
  }
  std::vector<WeightedSample> out{{{}, 1.0}};
  for (std::size_t h = 0; h < strata_.size(); ++h) {
    const auto subsets = combinations(strata_[h].size, strata_[h].take);
    const double p = 1.0 / static_cast<double>(subsets.size());
    std::vector<WeightedSample> next;
    next.reserve(out.size() * subsets.size());
    for (const auto& prefix : out)
      for (const auto& sub : subsets) {
        WeightedSample s = prefix;
        for (std::size_t u : sub) s.units.push_back(stratum_start_[h] + u);
        s.probability *= p;
        next.push_back(std::move(s));
      }
    out = std::move(next);
  }
  return out;
}

bool Design::syg_condition_holds() const {
  const std::size_t n = pi_.size();
  if (kind_ != DesignKind::kPoisson) {
    // Off-diagonal Delta is zero across strata and constant within a stratum,
    // so one representative pair per stratum decides the sign.
    for (std::size_t h = 0; h < strata_.size(); ++h) {
      if (strata_[h].size < 2) continue;
      const std::size_t i = stratum_start_[h];
      if (delta(i, i + 1) > 0.0) return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (delta(i, j) > 0.0) return false;
  return true;
}

StructuredKernel Design::delta_kernel() const {
  const std::size_t n = pi_.size();
  std::vector<double> diag(n);
  std::vector<RankOneTerm> terms;
  if (kind_ == DesignKind::kPoisson) {
    for (std::size_t i = 0; i < n; ++i) diag[i] = pi_[i] * (1.0 - pi_[i]);
    return {n, make_shared_vector(std::move(diag)), {}};
  }
  for (std::size_t h = 0; h < strata_.size(); ++h) {
    const double p = pi_[stratum_start_[h]];
    const double c = strata_[h].size >= 2 ? same_stratum_joint(h) - p * p : 0.0;
    std::vector<double> indicator(n, 0.0);
    for (std::size_t t = 0; t < strata_[h].size; ++t) {
      diag[stratum_start_[h] + t] = p * (1.0 - p) - c;
      indicator[stratum_start_[h] + t] = 1.0;
    }
    if (c != 0.0) terms.push_back({c, make_shared_vector(std::move(indicator))});
  }
  return {n, make_shared_vector(std::move(diag)), std::move(terms)};
}

StructuredKernel Design::joint_kernel() const {
  const StructuredKernel d = delta_kernel();
  auto terms = d.terms();
  terms.push_back({1.0, make_shared_vector(pi_)});
  return {pi_.size(), d.diag(), std::move(terms)};
}

StructuredKernel Design::outer_kernel() const { return StructuredKernel::outer(pi_); }

StructuredKernel Design::inclusion_diagonal() const { return StructuredKernel::diagonal(pi_); }

StructuredKernel Design::offdiagonal_joint_ratio_kernel() const {
  // pi_kl/(pi_k pi_l) = 1 + Delta_kl/(pi_k pi_l) off the diagonal.
  const std::size_t n = pi_.size();
  std::vector<RankOneTerm> terms{{1.0, make_shared_vector(std::vector<double>(n, 1.0))}};
  std::vector<double> diag(n, -1.0);
  if (kind_ != DesignKind::kPoisson) {
    for (std::size_t h = 0; h < strata_.size(); ++h) {
      const double p = pi_[stratum_start_[h]];
      const double c = strata_[h].size >= 2 ? same_stratum_joint(h) - p * p : 0.0;
      std::vector<double> indicator(n, 0.0);
      for (std::size_t t = 0; t < strata_[h].size; ++t) indicator[stratum_start_[h] + t] = 1.0;
      const double w = c / (p * p);
      for (std::size_t t = 0; t < strata_[h].size; ++t) diag[stratum_start_[h] + t] -= w;
      if (w != 0.0) terms.push_back({w, make_shared_vector(std::move(indicator))});
    }
  }
  return {n, make_shared_vector(std::move(diag)), std::move(terms)};
}

StructuredKernel Design::sample_delta_ratio_kernel(std::span<const std::size_t> sample) const {
  const std::size_t m = sample.size();
  std::vector<double> diag(m);
  for (std::size_t a = 0; a < m; ++a) diag[a] = 1.0 - pi1(sample[a]);
  if (kind_ == DesignKind::kPoisson) return {m, make_shared_vector(std::move(diag)), {}};
  std::vector<RankOneTerm> terms;
  for (std::size_t h = 0; h < strata_.size(); ++h) {
    const double joint = same_stratum_joint(h);
    if (joint <= 0.0) continue;  // at most one unit of this stratum is ever sampled
    const double p = pi_[stratum_start_[h]];
    const double g = (joint - p * p) / joint;
    if (g == 0.0) continue;
    std::vector<double> indicator(m, 0.0);
    bool any = false;
    for (std::size_t a = 0; a < m; ++a) {
      if (unit_stratum_[sample[a]] == h) {
        indicator[a] = 1.0;
        diag[a] -= g;
        any = true;
      }
    }
    if (any) terms.push_back({g, make_shared_vector(std::move(indicator))});
  }
  return {m, make_shared_vector(std::move(diag)), std::move(terms)};
}

std::vector<std::vector<double>> Design::dense_sample_delta_ratio(
    std::span<const std::size_t> sample) const {
  const std::size_t m = sample.size();
  std::vector<std::vector<double>> out(m, std::vector<double>(m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      const double joint = pi2(sample[a], sample[b]);
      if (joint <= 0.0) {
        throw std::domain_error("zero joint inclusion probability for sampled units " +
                                std::to_string(sample[a] + 1) + ", " +
                                std::to_string(sample[b] + 1));
      }
      out[a][b] = delta(sample[a], sample[b]) / joint;
    }
  return out;
}

std::vector<std::vector<double>> Design::dense_joint() const {
  const std::size_t n = pi_.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = pi2(i, j);
  return out;
}

std::vector<std::vector<double>> Design::dense_delta() const {
  const std::size_t n = pi_.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = delta(i, j);
  return out;
}

std::string Design::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case DesignKind::kSimpleRandom:
      os << "si(n=" << strata_[0].take << ")";
      break;
    case DesignKind::kStratified:
      os << "stsi(";
      for (std::size_t h = 0; h < strata_.size(); ++h) {
        if (h) os << ",";
        os << strata_[h].size << ":" << strata_[h].take;
      }
      os << ")";
      break;
    case DesignKind::kPoisson: {
      if (!poisson_source_.empty()) {
        os << "poisson(file=" << poisson_source_ << ")";
        break;
      }
      const bool constant = std::all_of(pi_.begin(), pi_.end(),
                                        [&](double p) { return p == pi_.front(); });
      os.precision(17);
      if (constant) {
        os << "poisson(p=" << pi_.front() << ")";
      } else {
        os << "poisson(probs=[";
        for (std::size_t i = 0; i < pi_.size(); ++i) os << (i ? "," : "") << pi_[i];
        os << "])";
      }
      break;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Grammar

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  std::size_t pos() const { return pos_; }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_) throw DesignParseError("expected identifier", start);
    std::string out(text_.substr(start, pos_ - start));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) {
      throw DesignParseError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::size_t integer() {
    skip_ws();
    std::size_t value = 0;
    const auto* first = text_.data() + pos_;
    const auto* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) throw DesignParseError("expected integer", pos_);
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  double real() {
    skip_ws();
    double value = 0.0;
    const auto* first = text_.data() + pos_;
    const auto* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) throw DesignParseError("expected number", pos_);
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  std::string until(char stop) {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != stop) ++pos_;
    std::string out(text_.substr(start, pos_ - start));
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    if (out.empty()) throw DesignParseError("expected value", start);
    return out;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::vector<double> read_probabilities(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("poisson: cannot open probability file '" + path + "'");
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = cell.find_last_not_of(" \t\r");
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data() + b, cell.data() + e + 1, v);
      if (ec != std::errc() || ptr != cell.data() + e + 1) {
        throw std::runtime_error("poisson: bad probability '" + cell + "' in " + path);
      }
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

Design parse_design(std::string_view text, std::size_t population_size) {
  Cursor cur(text);
  const std::size_t name_pos = (cur.skip_ws(), cur.pos());
  const std::string name = cur.identifier();
  cur.expect('(');
  Design design = [&]() -> Design {
    if (name == "si") {
      const std::size_t key_pos = (cur.skip_ws(), cur.pos());
      if (cur.identifier() != "n") throw DesignParseError("si expects 'n='", key_pos);
      cur.expect('=');
      const std::size_t n_pos = (cur.skip_ws(), cur.pos());
      const std::size_t n = cur.integer();
      if (n == 0 || n > population_size) {
        throw DesignParseError("si sample size " + std::to_string(n) + " outside [1, " +
                                   std::to_string(population_size) + "]",
                               n_pos);
      }
      return Design::simple_random(population_size, n);
    }
    if (name == "stsi") {
      std::vector<Stratum> strata;
      do {
        const std::size_t pos = (cur.skip_ws(), cur.pos());
        Stratum s;
        s.size = cur.integer();
        cur.expect(':');
        s.take = cur.integer();
        if (s.size == 0 || s.take == 0 || s.take > s.size) {
          throw DesignParseError("stratum needs 1 <= n_h <= N_h", pos);
        }
        strata.push_back(s);
      } while (cur.accept(','));
      std::size_t total = 0;
      for (const auto& s : strata) total += s.size;
      if (total != population_size) {
        throw DesignParseError("strata sizes sum to " + std::to_string(total) +
                                   " but the population has " + std::to_string(population_size) +
                                   " units",
                               name_pos);
      }
      return Design::stratified(std::move(strata));
    }
    if (name == "poisson") {
      const std::size_t key_pos = (cur.skip_ws(), cur.pos());
      const std::string key = cur.identifier();
      cur.expect('=');
      if (key == "p") {
        const std::size_t p_pos = (cur.skip_ws(), cur.pos());
        const double p = cur.real();
        if (!(p >= 0.0 && p <= 1.0)) throw DesignParseError("probability outside [0, 1]", p_pos);
        return Design::poisson(std::vector<double>(population_size, p));
      }
      if (key == "file") {
        const std::string path = cur.until(')');
        auto probs = read_probabilities(path);
        if (probs.size() != population_size) {
          throw DesignParseError("probability file has " + std::to_string(probs.size()) +
                                     " entries, population has " +
                                     std::to_string(population_size),
                                 key_pos);
        }
        Design d = Design::poisson(std::move(probs));
        d.poisson_source_ = path;
        return d;
      }
      throw DesignParseError("poisson expects 'p=' or 'file='", key_pos);
    }
    throw DesignParseError("unknown design '" + name + "'", name_pos);
  }();
  cur.expect(')');
  if (!cur.at_end()) throw DesignParseError("unexpected trailing input", cur.pos());
  return design;
}

}  // namespace ccs
