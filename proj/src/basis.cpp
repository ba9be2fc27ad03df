#include "eqdesign/basis.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace eqdesign {

namespace {

void check_dim(int d) {
  if (d < 1) throw ValidationError("invalid dimension " + std::to_string(d) + ": must be >= 1");
}

void check_degree(int n) {
  if (n < 0) throw ValidationError("invalid degree " + std::to_string(n) + ": must be >= 0");
}

// Compositions of `total` into exponents[pos..], larger leading exponents first.
void enumerate_degree(std::vector<int>& exps, std::size_t pos, int total,
                      std::vector<MultiIndex>& out) {
  if (pos + 1 == exps.size()) {
    exps[pos] = total;
    out.emplace_back(exps);
    return;
  }
  for (int v = total; v >= 0; --v) {
    exps[pos] = v;
    enumerate_degree(exps, pos + 1, total - v, out);
  }
  exps[pos] = 0;
}

// Number of multi-indices in `parts` variables with total degree exactly m.
std::int64_t count_exact_degree(int parts, int m) {
  return m == 0 ? 1 : dim_poly(parts, m) - dim_poly(parts, m - 1);
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw ValidationError("multi-index exponents must be nonnegative");
  }
  degree_ = std::accumulate(exps_.begin(), exps_.end(), 0);
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents)
    : MultiIndex(std::vector<int>(exponents)) {}

MultiIndex MultiIndex::zero(int d) {
  check_dim(d);
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(d), 0));
}

MultiIndex MultiIndex::unit(int d, int i) {
  check_dim(d);
  std::vector<int> e(static_cast<std::size_t>(d), 0);
  e.at(static_cast<std::size_t>(i)) = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (dim() != other.dim()) throw ValidationError("multi-index dimension mismatch");
  std::vector<int> e(exps_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.exps_[i];
  return MultiIndex(std::move(e));
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (auto c = degree_ <=> other.degree_; c != 0) return c;
  // Larger leading exponent comes first within a degree.
  return other.exps_ <=> exps_;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    if (i) os << ',';
    os << exps_[i];
  }
  os << ')';
  return os.str();
}

std::int64_t dim_poly(int d, int n) {
  check_dim(d);
  check_degree(n);
  // C(n+i, i) for i = 1..d; each intermediate is an exact binomial.
  __int128 r = 1;
  for (int i = 1; i <= d; ++i) {
    r = r * (n + i) / i;
    if (r > std::numeric_limits<std::int64_t>::max()) {
      throw std::overflow_error("dim_poly(" + std::to_string(d) + ", " + std::to_string(n) +
                                ") overflows a 64-bit integer");
    }
  }
  return static_cast<std::int64_t>(r);
}

std::vector<MultiIndex> multi_indices(int d, int n) {
  check_dim(d);
  check_degree(n);
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(dim_poly(d, n)));
  std::vector<int> exps(static_cast<std::size_t>(d), 0);
  for (int k = 0; k <= n; ++k) enumerate_degree(exps, 0, k, out);
  return out;
}

std::int64_t graded_lex_rank(const MultiIndex& alpha) {
  const int d = alpha.dim();
  const int k = alpha.degree();
  std::int64_t rank = k == 0 ? 0 : dim_poly(d, k - 1);
  int remaining = k;
  for (int i = 0; i + 1 < d; ++i) {
    // Indices with the same prefix and a larger exponent at position i come first.
    const int parts = d - i - 1;
    for (int v = remaining; v > alpha[i]; --v) rank += count_exact_degree(parts, remaining - v);
    remaining -= alpha[i];
  }
  return rank;
}

MonomialBasis::MonomialBasis(int d, int n) : dim_(d), degree_(n), indices_(multi_indices(d, n)) {
  parents_.resize(indices_.size(), {0, 0});
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    const auto& a = indices_[i];
    int var = 0;
    while (a[var] == 0) ++var;
    std::vector<int> e = a.exponents();
    --e[static_cast<std::size_t>(var)];
    parents_[i] = {index_of(MultiIndex(std::move(e))), var};
  }
}

int MonomialBasis::index_of(const MultiIndex& alpha) const {
  if (alpha.dim() != dim_) throw ValidationError("multi-index dimension mismatch");
  if (alpha.degree() > degree_) return -1;
  return static_cast<int>(graded_lex_rank(alpha));
}

std::shared_ptr<const MonomialBasis> basis_for(int d, int n) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
  check_dim(d);
  check_degree(n);
  std::lock_guard lock(mutex);
  auto& slot = cache[{d, n}];
  if (!slot) slot = std::make_shared<const MonomialBasis>(d, n);
  return slot;
}

Polynomial::Polynomial(int dim) : dim_(dim) { check_dim(dim); }

Polynomial::Polynomial(int dim, const Terms& terms) : Polynomial(dim) {
  for (const auto& [alpha, c] : terms) add_term(alpha, c);
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(MultiIndex::zero(dim), c);
  return p;
}

Polynomial Polynomial::variable(int dim, int i) {
  Polynomial p(dim);
  p.add_term(MultiIndex::unit(dim, i), 1.0);
  return p;
}

int Polynomial::degree() const {
  int deg = 0;
  for (const auto& [alpha, c] : terms_) deg = std::max(deg, alpha.degree());
  return deg;
}

bool Polynomial::is_constant_one() const {
  return terms_.size() == 1 && terms_.begin()->first.degree() == 0 &&
         terms_.begin()->second == 1.0;
}

double Polynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& alpha, double coef) {
  if (alpha.dim() != dim_) {
    throw ValidationError("term " + alpha.to_string() + " does not match polynomial dimension " +
                          std::to_string(dim_));
  }
  if (coef == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(alpha, coef);
  if (!inserted) {
    it->second += coef;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  if (dim_ != other.dim_) throw ValidationError("polynomial dimension mismatch");
  Polynomial r(*this);
  for (const auto& [alpha, c] : other.terms_) r.add_term(alpha, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + other * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (dim_ != other.dim_) throw ValidationError("polynomial dimension mismatch");
  Polynomial r(dim_);
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : other.terms_) r.add_term(a + b, ca * cb);
  }
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(dim_);
  for (const auto& [alpha, c] : terms_) r.add_term(alpha, c * s);
  return r;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [alpha, c] : terms_) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << '-';
    first = false;
    const double mag = std::abs(c);
    if (alpha.degree() == 0 || mag != 1.0) os << mag;
    for (int i = 0; i < dim_; ++i) {
      if (alpha[i] == 0) continue;
      os << "x" << (i + 1);
      if (alpha[i] > 1) os << '^' << alpha[i];
    }
  }
  return os.str();
}

}  // namespace eqdesign
