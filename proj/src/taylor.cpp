#include "iccbf/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <unordered_map>

namespace iccbf {

namespace {

constexpr double kDropRel = 1e-14;

uint64_t pack_exponents(const MonomialBasis::Exponents& e) {
  uint64_t k = 0;
  for (int i = 0; i < MonomialBasis::kMaxVars; ++i) {
    k = (k << 8) | e[i];
  }
  return k;
}

void enumerate_exponents(int n_vars, int order, int var, int remaining,
                         MonomialBasis::Exponents& cur,
                         std::vector<MonomialBasis::Exponents>& out) {
  if (var == n_vars) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[var] = static_cast<uint8_t>(e);
    enumerate_exponents(n_vars, order, var + 1, remaining - e, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }

Interval operator*(Interval a, Interval b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {std::min(std::min(p1, p2), std::min(p3, p4)),
          std::max(std::max(p1, p2), std::max(p3, p4))};
}

Interval interval_pow(Interval a, int e) {
  if (e == 0) return {1.0, 1.0};
  if (e == 1) return a;
  const double pl = std::pow(a.lo, e);
  const double ph = std::pow(a.hi, e);
  if (e % 2 != 0) return {pl, ph};
  Interval r{std::min(pl, ph), std::max(pl, ph)};
  if (a.lo <= 0.0 && a.hi >= 0.0) r.lo = 0.0;
  return r;
}

BoxDomain::BoxDomain(Eigen::VectorXd c, Eigen::VectorXd hw)
    : center(std::move(c)), half_widths(std::move(hw)) {
  if (center.size() != half_widths.size()) {
    throw DimensionError("BoxDomain: center/half_widths size mismatch");
  }
  for (int i = 0; i < half_widths.size(); ++i) {
    if (!(half_widths[i] > 0.0)) {
      throw std::invalid_argument("BoxDomain: half_widths must be positive");
    }
  }
}

bool BoxDomain::contains(const Eigen::VectorXd& x) const {
  if (x.size() != center.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - center[i]) > half_widths[i]) return false;
  }
  return true;
}

MonomialBasis::MonomialBasis(int n_vars, int order) : n_vars_(n_vars), order_(order) {
  if (n_vars < 1 || n_vars > kMaxVars) {
    throw DimensionError("MonomialBasis: unsupported variable count");
  }
  if (order < 0 || order > 12) {
    throw std::invalid_argument("MonomialBasis: unsupported order");
  }
  Exponents cur{};
  enumerate_exponents(n_vars, order, 0, order, cur, exps_);
  // Graded order: sort by total degree, then lexicographically. The
  // constant monomial lands at index 0.
  std::sort(exps_.begin(), exps_.end(), [](const Exponents& a, const Exponents& b) {
    int da = 0, db = 0;
    for (int i = 0; i < kMaxVars; ++i) {
      da += a[i];
      db += b[i];
    }
    if (da != db) return da < db;
    return a < b;
  });
  size_ = static_cast<int>(exps_.size());
  degree_.resize(size_);
  keys_.resize(size_);
  for (int i = 0; i < size_; ++i) {
    int d = 0;
    for (int v = 0; v < n_vars_; ++v) d += exps_[i][v];
    degree_[i] = static_cast<uint8_t>(d);
    keys_[i] = pack_exponents(exps_[i]);
  }
  std::vector<int32_t> perm(size_);
  for (int i = 0; i < size_; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(),
            [&](int a, int b) { return keys_[a] < keys_[b]; });
  key_index_ = perm;
  std::sort(keys_.begin(), keys_.end());

  prod_.assign(static_cast<size_t>(size_) * size_, -1);
  for (int i = 0; i < size_; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (degree_[i] + degree_[j] > order_) continue;
      Exponents e;
      for (int v = 0; v < kMaxVars; ++v) {
        e[v] = static_cast<uint8_t>(exps_[i][v] + exps_[j][v]);
      }
      const int32_t k = static_cast<int32_t>(index_of(e));
      prod_[static_cast<size_t>(i) * size_ + j] = k;
      prod_[static_cast<size_t>(j) * size_ + i] = k;
    }
  }

  lower_.assign(static_cast<size_t>(size_) * n_vars_, -1);
  for (int i = 0; i < size_; ++i) {
    for (int v = 0; v < n_vars_; ++v) {
      if (exps_[i][v] == 0) continue;
      Exponents e = exps_[i];
      e[v] -= 1;
      lower_[static_cast<size_t>(i) * n_vars_ + v] = index_of(e);
    }
  }
}

int MonomialBasis::index_of(const Exponents& e) const {
  const uint64_t key = pack_exponents(e);
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return -1;
  return key_index_[static_cast<size_t>(it - keys_.begin())];
}

std::shared_ptr<const MonomialBasis> MonomialBasis::get(int n_vars, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n_vars, order}];
  if (!slot) {
    slot = std::shared_ptr<const MonomialBasis>(new MonomialBasis(n_vars, order));
  }
  return slot;
}

TaylorPoly TaylorPoly::constant(double value, const Eigen::VectorXd& zeta, int order) {
  TaylorPoly p;
  p.basis_ = MonomialBasis::get(static_cast<int>(zeta.size()), order);
  p.zeta_ = zeta;
  p.coeffs_.assign(p.basis_->size(), 0.0);
  p.coeffs_[0] = value;
  return p;
}

TaylorPoly TaylorPoly::variable(int var, double center, const Eigen::VectorXd& zeta,
                                int order) {
  if (var < 0 || var >= zeta.size()) {
    throw DimensionError("TaylorPoly::variable: index out of range");
  }
  TaylorPoly p = constant(center, zeta, order);
  if (order >= 1) {
    MonomialBasis::Exponents e{};
    e[var] = 1;
    p.coeffs_[p.basis_->index_of(e)] = 1.0;
  }
  return p;
}

std::vector<TaylorPoly> TaylorPoly::variables(const Eigen::VectorXd& center,
                                              const Eigen::VectorXd& zeta, int order) {
  if (center.size() != zeta.size()) {
    throw DimensionError("TaylorPoly::variables: center/zeta size mismatch");
  }
  std::vector<TaylorPoly> out;
  out.reserve(center.size());
  for (int i = 0; i < center.size(); ++i) {
    out.push_back(variable(i, center[i], zeta, order));
  }
  return out;
}

double TaylorPoly::coeff(const MonomialBasis::Exponents& e) const {
  const int i = basis_->index_of(e);
  return i < 0 ? 0.0 : coeffs_[i];
}

double TaylorPoly::max_abs_coeff() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

bool TaylorPoly::is_zero(double tol) const { return max_abs_coeff() <= tol; }

void TaylorPoly::check_compatible(const TaylorPoly& rhs) const {
  if (empty() || rhs.empty()) {
    throw DimensionError("TaylorPoly: operation on empty polynomial");
  }
  if (basis_ != rhs.basis_) {
    if (basis_->n_vars() != rhs.basis_->n_vars() || basis_->order() != rhs.basis_->order()) {
      throw DimensionError("TaylorPoly: mismatched variable count or order");
    }
  }
}

void TaylorPoly::drop_small_coeffs() {
  const double cut = kDropRel * max_abs_coeff();
  if (cut == 0.0) return;
  for (double& c : coeffs_) {
    if (std::abs(c) < cut) c = 0.0;
  }
}

TaylorPoly& TaylorPoly::operator+=(const TaylorPoly& rhs) {
  check_compatible(rhs);
  for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  return *this;
}

TaylorPoly& TaylorPoly::operator-=(const TaylorPoly& rhs) {
  check_compatible(rhs);
  for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  return *this;
}

TaylorPoly& TaylorPoly::operator+=(double rhs) {
  coeffs_[0] += rhs;
  return *this;
}

TaylorPoly& TaylorPoly::operator-=(double rhs) {
  coeffs_[0] -= rhs;
  return *this;
}

TaylorPoly& TaylorPoly::operator*=(double rhs) {
  for (double& c : coeffs_) c *= rhs;
  return *this;
}

TaylorPoly operator-(double a, const TaylorPoly& b) {
  TaylorPoly r = b;
  for (double& c : r.coeffs_) c = -c;
  r.coeffs_[0] += a;
  return r;
}

TaylorPoly operator-(const TaylorPoly& a) { return 0.0 - a; }

TaylorPoly operator*(const TaylorPoly& a, const TaylorPoly& b) {
  a.check_compatible(b);
  TaylorPoly r;
  r.basis_ = a.basis_;
  r.zeta_ = a.zeta_;
  r.coeffs_.assign(a.coeffs_.size(), 0.0);
  const auto& table = a.basis_->product_table();
  const int n = a.basis_->size();
  for (int i = 0; i < n; ++i) {
    const double ai = a.coeffs_[i];
    if (ai == 0.0) continue;
    const int32_t* row = table.data() + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double bj = b.coeffs_[j];
      if (bj == 0.0) continue;
      const int32_t k = row[j];
      if (k >= 0) r.coeffs_[k] += ai * bj;
    }
  }
  r.drop_small_coeffs();
  return r;
}

TaylorPoly operator/(const TaylorPoly& a, const TaylorPoly& b) { return a * recip(b); }

TaylorPoly operator/(double a, const TaylorPoly& b) { return recip(b) * a; }

TaylorPoly TaylorPoly::derive(int var) const {
  if (empty()) throw DimensionError("TaylorPoly::derive on empty polynomial");
  if (var < 0 || var >= basis_->n_vars()) {
    throw DimensionError("TaylorPoly::derive: variable index out of range");
  }
  TaylorPoly r;
  r.basis_ = basis_;
  r.zeta_ = zeta_;
  r.coeffs_.assign(coeffs_.size(), 0.0);
  for (int i = 0; i < basis_->size(); ++i) {
    const double c = coeffs_[i];
    if (c == 0.0) continue;
    const int lo = basis_->lower_index(i, var);
    if (lo >= 0) r.coeffs_[lo] += c * basis_->exponents(i)[var];
  }
  return r;
}

double TaylorPoly::eval(std::span<const double> dx) const {
  if (static_cast<int>(dx.size()) != basis_->n_vars()) {
    throw DimensionError("TaylorPoly::eval: point dimension mismatch");
  }
  double acc = 0.0;
  for (int i = 0; i < basis_->size(); ++i) {
    const double c = coeffs_[i];
    if (c == 0.0) continue;
    double m = c;
    const auto& e = basis_->exponents(i);
    for (int v = 0; v < basis_->n_vars(); ++v) {
      for (int k = 0; k < e[v]; ++k) m *= dx[v];
    }
    acc += m;
  }
  return acc;
}

Interval TaylorPoly::bound() const { return bound(zeta_); }

Interval TaylorPoly::bound(const Eigen::VectorXd& half_widths) const {
  if (half_widths.size() != basis_->n_vars()) {
    throw DimensionError("TaylorPoly::bound: half_widths dimension mismatch");
  }
  double lo = 0.0, hi = 0.0, absmax = 0.0;
  for (int i = 0; i < basis_->size(); ++i) {
    const double c = coeffs_[i];
    if (c == 0.0) continue;
    const auto& e = basis_->exponents(i);
    double m = 1.0;
    bool odd = false;
    for (int v = 0; v < basis_->n_vars(); ++v) {
      if (e[v] == 0) continue;
      m *= std::pow(half_widths[v], static_cast<int>(e[v]));
      if (e[v] % 2 != 0) odd = true;
    }
    // dx^e over the centered box: any odd exponent makes the monomial
    // range symmetric, even exponents keep it in [0, m]; the constant
    // monomial contributes exactly.
    const double t = c * m;
    if (basis_->degree(i) == 0) {
      lo += t;
      hi += t;
    } else if (odd) {
      lo -= std::abs(t);
      hi += std::abs(t);
    } else {
      lo += std::min(t, 0.0);
      hi += std::max(t, 0.0);
    }
    absmax += std::abs(t);
  }
  // Outward guard against accumulation rounding.
  const double pad = 32.0 * std::numeric_limits<double>::epsilon() * absmax;
  return {lo - pad, hi + pad};
}

Interval TaylorPoly::bound_refined() const {
  const int n = basis_->n_vars();
  Interval full = bound();
  Interval out{std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity()};
  for (int orthant = 0; orthant < (1 << n); ++orthant) {
    double lo = 0.0, hi = 0.0, absmax = 0.0;
    for (int i = 0; i < basis_->size(); ++i) {
      const double c = coeffs_[i];
      if (c == 0.0) continue;
      const auto& e = basis_->exponents(i);
      Interval m{1.0, 1.0};
      for (int v = 0; v < n; ++v) {
        if (e[v] == 0) continue;
        const Interval axis = (orthant >> v) & 1 ? Interval{0.0, zeta_[v]}
                                                 : Interval{-zeta_[v], 0.0};
        m = m * interval_pow(axis, e[v]);
      }
      const Interval t = Interval{c, c} * m;
      lo += t.lo;
      hi += t.hi;
      absmax += t.mag();
    }
    const double pad = 32.0 * std::numeric_limits<double>::epsilon() * absmax;
    out.lo = std::min(out.lo, lo - pad);
    out.hi = std::max(out.hi, hi + pad);
  }
  // Refinement may only shrink the baseline enclosure.
  out.lo = std::max(out.lo, full.lo);
  out.hi = std::min(out.hi, full.hi);
  return out;
}

TaylorPoly TaylorPoly::compose_series(std::span<const double> series) const {
  TaylorPoly q = *this;
  q.coeffs_[0] = 0.0;
  TaylorPoly r = TaylorPoly::constant(series.empty() ? 0.0 : series.back(), zeta_, order());
  for (int j = static_cast<int>(series.size()) - 2; j >= 0; --j) {
    r = r * q;
    r += series[j];
  }
  r.drop_small_coeffs();
  return r;
}

Interval poly_bound(const TaylorPoly& p, const BoxDomain& box) {
  if (box.dim() != p.n_vars()) {
    throw DimensionError("poly_bound: box dimension mismatch");
  }
  return p.bound(box.half_widths);
}

namespace {

// Coefficients of the univariate truncated series of fn about c, as used by
// the composition helpers below.
std::vector<double> series_pow_real(double c, double alpha, int order) {
  std::vector<double> s(order + 1);
  double coef = std::pow(c, alpha);
  s[0] = coef;
  for (int j = 1; j <= order; ++j) {
    coef *= (alpha - (j - 1)) / (j * c);
    s[j] = coef;
  }
  return s;
}

std::vector<double> uv_recip(const std::vector<double>& a) {
  std::vector<double> b(a.size(), 0.0);
  b[0] = 1.0 / a[0];
  for (size_t k = 1; k < a.size(); ++k) {
    double acc = 0.0;
    for (size_t j = 1; j <= k; ++j) acc += a[j] * b[k - j];
    b[k] = -b[0] * acc;
  }
  return b;
}

std::vector<double> uv_sqrt(const std::vector<double>& a) {
  std::vector<double> b(a.size(), 0.0);
  b[0] = std::sqrt(a[0]);
  for (size_t k = 1; k < a.size(); ++k) {
    double acc = 0.0;
    for (size_t j = 1; j < k; ++j) acc += b[j] * b[k - j];
    b[k] = (a[k] - acc) / (2.0 * b[0]);
  }
  return b;
}

std::vector<double> uv_integrate(const std::vector<double>& dg, double g0) {
  std::vector<double> g(dg.size(), 0.0);
  g[0] = g0;
  for (size_t j = 1; j < g.size(); ++j) g[j] = dg[j - 1] / static_cast<double>(j);
  return g;
}

}  // namespace

TaylorPoly sqrt(const TaylorPoly& p) {
  const double c = p.constant_term();
  const Interval e = p.bound();
  // The series stays anchored at the center value; a spuriously negative
  // enclosure lower bound (common for sums of squares under monomial-wise
  // bounding) does not abort the composition.
  if (!(c > 0.0) || !(e.hi > 0.0)) {
    throw SingularDomainError("sqrt: non-positive inner polynomial on the box");
  }
  return p.compose_series(series_pow_real(c, 0.5, p.order()));
}

TaylorPoly recip(const TaylorPoly& p) {
  const Interval e = p.bound();
  if (e.lo <= 0.0 && e.hi >= 0.0) {
    throw SingularDomainError("recip: inner polynomial enclosure contains zero");
  }
  return p.compose_series(series_pow_real(p.constant_term(), -1.0, p.order()));
}

TaylorPoly pow(const TaylorPoly& p, int e) {
  if (e < 0) return recip(pow(p, -e));
  TaylorPoly r = TaylorPoly::constant(1.0, p.zeta(), p.order());
  TaylorPoly base = p;
  int k = e;
  while (k > 0) {
    if (k & 1) r = r * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return r;
}

TaylorPoly pow(const TaylorPoly& p, double alpha) {
  if (alpha == std::floor(alpha) && std::abs(alpha) < 64.0) {
    return pow(p, static_cast<int>(alpha));
  }
  const double c = p.constant_term();
  const Interval e = p.bound();
  if (!(c > 0.0) || (alpha < 0.0 && e.lo <= 0.0)) {
    throw SingularDomainError("pow: fractional power of non-positive polynomial");
  }
  return p.compose_series(series_pow_real(c, alpha, p.order()));
}

TaylorPoly sin(const TaylorPoly& p) {
  const double c = p.constant_term();
  std::vector<double> s(p.order() + 1);
  double fact = 1.0;
  for (int j = 0; j <= p.order(); ++j) {
    if (j > 0) fact *= j;
    s[j] = std::sin(c + j * M_PI_2) / fact;
  }
  return p.compose_series(s);
}

TaylorPoly cos(const TaylorPoly& p) {
  const double c = p.constant_term();
  std::vector<double> s(p.order() + 1);
  double fact = 1.0;
  for (int j = 0; j <= p.order(); ++j) {
    if (j > 0) fact *= j;
    s[j] = std::cos(c + j * M_PI_2) / fact;
  }
  return p.compose_series(s);
}

TaylorPoly atan(const TaylorPoly& p) {
  const double c = p.constant_term();
  const int order = p.order();
  // g'(t) = 1 / (1 + (c + t)^2), integrated coefficient-wise.
  std::vector<double> denom(order + 1, 0.0);
  denom[0] = 1.0 + c * c;
  if (order >= 1) denom[1] = 2.0 * c;
  if (order >= 2) denom[2] = 1.0;
  return p.compose_series(uv_integrate(uv_recip(denom), std::atan(c)));
}

TaylorPoly asin(const TaylorPoly& p) {
  const double c = p.constant_term();
  const Interval e = p.bound();
  if (!(std::abs(c) < 1.0) || e.lo <= -1.0 || e.hi >= 1.0) {
    throw SingularDomainError("asin: inner polynomial leaves (-1, 1)");
  }
  const int order = p.order();
  // g'(t) = 1 / sqrt(1 - (c + t)^2).
  std::vector<double> inner(order + 1, 0.0);
  inner[0] = 1.0 - c * c;
  if (order >= 1) inner[1] = -2.0 * c;
  if (order >= 2) inner[2] = -1.0;
  return p.compose_series(uv_integrate(uv_recip(uv_sqrt(inner)), std::asin(c)));
}

TaylorPoly acos(const TaylorPoly& p) { return M_PI_2 - asin(p); }

}  // namespace iccbf
